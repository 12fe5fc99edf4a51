#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fbound/integral_eq.hpp"
#include "fbound/math/interp.hpp"
#include "fbound/pde_solver.hpp"

using namespace fbound;

namespace {

MarketParams bench() { return MarketParams{}; }

// Dense Gaussian elimination oracle for small tridiagonal instances.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c2 = r + 1; c2 < n; ++c2) s -= a[r][c2] * x[c2];
        x[r] = s / a[r][r];
    }
    return x;
}

}  // namespace

TEST_CASE("initial portfolio datum") {
    MarketParams p = bench();
    SolverConfig cfg;
    cfg.n = 300;
    cfg.L = 3.0;
    const auto pi = initial_portfolio(p, cfg);
    const double h = cfg.L / cfg.n;
    const double jump = std::log(2.0);  // ln(r/q) = ln 2
    for (int i = 0; i <= cfg.n; ++i) {
        if (i * h < jump)
            CHECK(pi[i] == -p.E);
        else
            CHECK(pi[i] == 0.0);
    }
    CHECK(p.rho0_call() == doctest::Approx(2.0 * p.E));  // r = 2q
}

TEST_CASE("transport is the identity for zero shift") {
    MarketParams p = bench();
    p.q = p.r;  // r - q = 0 (transport_step does not validate the call regime)
    const int n = 50;
    const double h = 0.06;
    std::vector<double> prev(n + 1);
    for (int i = 0; i <= n; ++i) prev[i] = -10.0 + 10.0 * i / n;
    prev[n] = 0.0;
    const auto half = transport_step(prev, 21.0, 21.0, p, 0.01, h, -10.0);
    for (int i = 0; i <= n; ++i) CHECK(half[i] == doctest::Approx(prev[i]));
}

TEST_CASE("transport shifts a linear profile exactly") {
    MarketParams p = bench();
    const int n = 60;
    const double h = 0.05;
    const double c = 2.5;
    std::vector<double> prev(n + 1);
    for (int i = 0; i <= n; ++i) prev[i] = c * i * h;
    const double rho_prev = 20.0, rho_new = 20.5;
    const double k = 1e-3;
    const double shift = std::log(rho_new / rho_prev) + (p.r - p.q) * k;
    const auto half = transport_step(prev, rho_prev, rho_new, p, k, h, -10.0);
    for (int i = 1; i < n; ++i) {
        const double xi = i * h - shift;
        if (xi > 0.0 && xi < (n - 1) * h)
            CHECK(half[i] == doctest::Approx(c * xi).epsilon(1e-12));
    }
    // shift beyond a node fills from the exercise side
    const auto far = transport_step(prev, rho_prev, rho_prev * std::exp(10.0), p, k, h,
                                    -10.0);
    for (int i = 0; i < n; ++i) CHECK(far[i] == -10.0);
}

TEST_CASE("diffusion reduces to the reaction solve for vanishing volatility") {
    MarketParams p = bench();
    p.sigma_hat = 0.0;  // bypasses validate(); the step itself is well defined
    const int n = 40;
    const double h = 0.075, k = 1e-3;
    std::vector<double> half(n + 1, -3.0);
    half[0] = -p.E;
    half[n] = 0.0;
    const auto out = diffusion_step(half, half, 20.0, p, ConstantVol{}, k, h, 0.5, nullptr);
    for (int i = 1; i < n; ++i)
        CHECK(out[i] == doctest::Approx(half[i] / (1.0 + p.r * k)).epsilon(1e-14));
}

TEST_CASE("diffusion matches a dense solve and has tiny residual") {
    const MarketParams p = bench();
    const int n = 8;
    const double h = 3.0 / n, k = 1e-3, rho = 20.5, tau = 0.4;
    std::vector<double> half = {-10.0, -9.0, -7.5, -5.0, -3.0, -1.5, -0.6, -0.2, 0.0};
    std::vector<double> lag = half;
    const auto out = diffusion_step(half, lag, rho, p, ConstantVol{}, k, h, tau, nullptr);

    // recompute the row coefficients exactly as specified
    const double s2 = p.sigma_hat * p.sigma_hat;
    const double kh2 = k / (2.0 * h * h), kh = k / (2.0 * h);
    std::vector<std::vector<double>> a(n - 1, std::vector<double>(n - 1, 0.0));
    std::vector<double> rhs(n - 1);
    for (int i = 1; i < n; ++i) {
        const double ai = -kh2 * s2 + 0.5 * kh * s2;
        const double ci = -kh2 * s2 - 0.5 * kh * s2;
        const double bi = 1.0 + p.r * k - (ai + ci);
        if (i > 1) a[i - 1][i - 2] = ai;
        a[i - 1][i - 1] = bi;
        if (i < n - 1) a[i - 1][i] = ci;
        rhs[i - 1] = half[i];
        if (i == 1) rhs[i - 1] -= ai * (-p.E);
    }
    const auto dense = dense_solve(a, rhs);
    double resid = 0.0;
    for (int i = 1; i < n; ++i) {
        CHECK(out[i] == doctest::Approx(dense[i - 1]).epsilon(1e-12));
        const double ai = -kh2 * s2 + 0.5 * kh * s2;
        const double ci = -kh2 * s2 - 0.5 * kh * s2;
        const double bi = 1.0 + p.r * k - (ai + ci);
        const double row = ai * out[i - 1] + bi * out[i] + ci * out[i + 1] - half[i];
        resid = std::max(resid, std::abs(row) / p.E);
    }
    CHECK(resid < 1e-12);
}

TEST_CASE("boundary constraint zero-slope limit") {
    const MarketParams p = bench();
    std::vector<double> pi(11, -p.E);
    CHECK(boundary_constraint(pi, p, ConstantVol{}, 0.3, 0.01, 20.0) ==
          doctest::Approx(p.r * p.E / p.q));
}

TEST_CASE("converged level is a fixed point of one sweep") {
    const MarketParams p = bench();
    SolverConfig cfg;
    cfg.n = 100;
    cfg.m = 1000;
    const double h = cfg.L / cfg.n, k = p.T / cfg.m;
    TimeLevelState prev{initial_portfolio(p, cfg), p.rho0_call()};
    TimeLevelState next;
    for (int j = 1; j <= 30; ++j) {
        advance_time_level(prev, next, p, ConstantVol{}, cfg, j * k, k, nullptr);
        prev = next;
    }
    // one more plain sweep from the converged state
    const double rho2 =
        boundary_constraint(prev.pi, p, ConstantVol{}, 30 * k, h, prev.rho);
    CHECK(std::abs(rho2 - prev.rho) < cfg.micro_tol);
}

TEST_CASE("tiny time step leaves the datum nearly unchanged away from the jump") {
    const MarketParams p = bench();
    SolverConfig cfg;
    cfg.n = 100;
    cfg.m = 1000;
    const double k = 1e-8;
    TimeLevelState prev{initial_portfolio(p, cfg), p.rho0_call()};
    TimeLevelState next;
    advance_time_level(prev, next, p, ConstantVol{}, cfg, k, k, nullptr);
    const double h = cfg.L / cfg.n;
    for (int i = 1; i < cfg.n; ++i)
        if (std::abs(i * h - std::log(2.0)) > 0.15)
            CHECK(std::abs(next.pi[i] - prev.pi[i]) < 1e-4);
}

TEST_CASE("CI-profile benchmark march") {
    const MarketParams p = bench();
    const PortfolioSurface surf =
        solve_free_boundary(p, ConstantVol{}, SolverConfig::ci_profile());
    // within 1% of the integral-equation boundary value
    CHECK(surf.boundary.back() == doctest::Approx(22.375).epsilon(0.01));
    // discrete maximum principle over the whole march
    CHECK(surf.diag.min_pi >= -p.E - 1e-9);
    CHECK(surf.diag.max_pi <= 1e-9);
    // boundary nondecreasing, above rE/q
    CHECK(surf.diag.min_rho_step >= -1e-9);
    CHECK(surf.boundary.front() == doctest::Approx(20.0));
    CHECK(surf.diag.dominance_warnings == 0);
}

TEST_CASE("micro-iterations stay cheap on the benchmark march") {
    const MarketParams p = bench();
    const auto surf = solve_free_boundary(p, ConstantVol{}, SolverConfig::ci_profile());
    CHECK(surf.diag.mean_micro <= 6.0);
}

TEST_CASE("nonlinear volatilities lift the boundary") {
    const MarketParams p = bench();
    SolverConfig cfg;
    cfg.n = 100;
    cfg.m = 5000;
    const auto ref = solve_free_boundary(p, ConstantVol{}, cfg);
    const auto rapm = solve_free_boundary(p, RapmVol::from_costs(0.01, 100.0), cfg);
    const auto leland = solve_free_boundary(p, LelandVol{0.1}, cfg);
    for (std::size_t j = 0; j < ref.boundary.size(); ++j) {
        CHECK(rapm.boundary.rhos[j] >= ref.boundary.rhos[j] - 1e-9);
        CHECK(leland.boundary.rhos[j] >= ref.boundary.rhos[j] - 1e-9);
    }
    CHECK(rapm.diag.min_pi >= -p.E - 1e-9);
}

TEST_CASE("avellaneda band behaves like its convex-side volatility for calls") {
    const MarketParams p = bench();
    SolverConfig cfg;
    cfg.n = 100;
    cfg.m = 5000;
    const auto ref = solve_free_boundary(p, ConstantVol{}, cfg);
    // degenerate band = constant volatility
    const auto same = solve_free_boundary(p, AvellanedaVol{0.2, 0.2}, cfg);
    CHECK(same.boundary.back() == doctest::Approx(ref.boundary.back()).epsilon(1e-12));
    // a wider band prices off the upper volatility where Pi is increasing
    const auto wide = solve_free_boundary(p, AvellanedaVol{0.1, 0.25}, cfg);
    CHECK(wide.boundary.back() > ref.boundary.back());
}

TEST_CASE("negative transport shift reads rightward and clamps to zero") {
    const MarketParams p = bench();
    const int n = 40;
    const double h = 0.075;
    std::vector<double> prev(n + 1);
    for (int i = 0; i <= n; ++i) prev[i] = -1.0 + static_cast<double>(i) / n;
    // rho drops enough that the shift is negative
    const auto half = transport_step(prev, 20.0, 18.0, p, 1e-4, h, -1.0);
    const double shift = std::log(18.0 / 20.0) + (p.r - p.q) * 1e-4;
    REQUIRE(shift < 0.0);
    for (int i = n - 3; i < n; ++i) {
        const double xi = i * h - shift;
        if (xi >= n * h) CHECK(half[i] == 0.0);
    }
    CHECK(half[5] == doctest::Approx(math::lerp_uniform(prev, 0.0, h, 5 * h - shift)));
}

TEST_CASE("parabolicity guard rejects pathological feedback") {
    const MarketParams p = bench();
    SolverConfig cfg;
    cfg.n = 50;
    cfg.m = 100;
    CHECK_THROWS_AS(
        (void)solve_free_boundary(p, FreyStremmeVol{0.9, 5.0}, cfg), Error);
}

TEST_CASE("price recovery from the surface") {
    const MarketParams p = bench();
    IntegralSolveConfig icfg;
    const auto ie = solve_boundary(p, icfg);
    const auto surf = solve_free_boundary(p, ConstantVol{}, SolverConfig::ci_profile());

    const double rho_T = surf.boundary.back();
    CHECK(recover_price(surf, rho_T, p.T).value == doctest::Approx(rho_T - p.E));
    CHECK(recover_price(surf, 20.0, p.T).value == doctest::Approx(10.03).epsilon(0.005));
    const PriceResult ex = recover_price(surf, 24.0, p.T);
    CHECK(ex.early_exercise);
    CHECK(ex.value == doctest::Approx(14.0));

    // cross-method agreement with the semi-explicit formula within 0.5%
    for (double S : {15.0, 18.0, 20.0, 21.0, 22.0}) {
        const double v_pde = recover_price(surf, S, p.T).value;
        const double v_semi = price_call_semi_explicit(S, p.T, ie.curve, p).value;
        CHECK(v_pde == doctest::Approx(v_semi).epsilon(0.005));
    }
}

TEST_CASE("eoc computation") {
    const auto e1 = eoc({{0.03, 0.5}, {0.012, 0.215}});
    REQUIRE(e1.size() == 1);
    CHECK(e1[0] == doctest::Approx(0.92).epsilon(0.005));
    const auto e2 = eoc({{0.006, 0.0836}, {0.004, 0.0462}});
    CHECK(e2[0] == doctest::Approx(1.46).epsilon(0.005));
    // exact first order
    const auto e3 = eoc({{0.1, 0.2}, {0.05, 0.1}, {0.025, 0.05}});
    CHECK(e3[0] == doctest::Approx(1.0));
    CHECK(e3[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)eoc({{0.1, 0.2}}), InvalidParams);
    CHECK_THROWS_AS((void)eoc({{0.1, 0.0}, {0.05, 0.1}}), InvalidParams);
    CHECK_THROWS_AS((void)eoc({{0.1, 0.2}, {0.1, 0.1}}), InvalidParams);
}

TEST_CASE("mesh refinement converges monotonically from below") {
    const MarketParams p = bench();
    IntegralSolveConfig icfg;
    icfg.n = 200;
    const auto ref = solve_boundary(p, icfg);
    double prev_diff = -1e9;
    for (int n : {100, 200, 400}) {
        SolverConfig cfg;
        cfg.n = n;
        cfg.m = std::lround(2.0 * p.sigma_hat * p.sigma_hat * p.T * n * n / 9.0);
        const auto surf = solve_free_boundary(p, ConstantVol{}, cfg);
        const double diff = surf.boundary.back() - ref.curve.back();
        CHECK(diff < 0.0);       // from below
        CHECK(diff > prev_diff); // monotone toward the reference
        prev_diff = diff;
    }
}
