#include "fbound/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbound/math/tridiag.hpp"

namespace fbound {

void SolverConfig::validate(const MarketParams& params) const {
    if (n < 2 || m < 2) throw InvalidParams("SolverConfig: need n, m >= 2");
    if (!(micro_tol > 0.0)) throw InvalidParams("SolverConfig: micro_tol must be > 0");
    if (micro_max < 1) throw InvalidParams("SolverConfig: micro_max must be >= 1");
    if (params.q > 0.0 && !(L > std::log(params.r / params.q)))
        throw InvalidParams("SolverConfig: L must exceed ln(r/q)");
}

const std::vector<double>& PortfolioSurface::level_at(double tau, double tol) const {
    for (const auto& [t, values] : levels)
        if (std::abs(t - tau) <= tol) return values;
    throw InvalidParams("PortfolioSurface: no stored level near tau=" +
                        std::to_string(tau));
}

std::vector<double> initial_portfolio(const MarketParams& params, const SolverConfig& cfg) {
    const double h = cfg.L / cfg.n;
    const double jump = std::log(params.r / params.q);
    std::vector<double> pi(cfg.n + 1);
    for (int i = 0; i <= cfg.n; ++i) pi[i] = (i * h < jump) ? -params.E : 0.0;
    return pi;
}

std::vector<double> transport_step(const std::vector<double>& prev, double rho_prev,
                                   double rho_new, const MarketParams& params, double k,
                                   double h, double fill) {
    const int n = static_cast<int>(prev.size()) - 1;
    // Integrated drift over the step; never forms rho_dot/rho, so the
    // near-expiry blow-up of the boundary speed is harmless.
    const double shift = std::log(rho_new / rho_prev) + (params.r - params.q) * k;
    std::vector<double> half(prev.size());
    half[0] = fill;
    for (int i = 1; i <= n; ++i) {
        const double xi = i * h - shift;
        if (xi <= 0.0)
            half[i] = fill;
        else if (xi >= n * h)
            half[i] = 0.0;
        else
            half[i] = math::lerp_uniform(prev, 0.0, h, xi);
    }
    half[n] = 0.0;
    return half;
}

namespace {

// sigma^2 row values evaluated on the lagged level: the forward slope
// (Pi_{i+1} - Pi_i)/h stands in for the curvature argument at node i.
void eval_sigma_row(const std::vector<double>& lagged_pi, double rho,
                    const MarketParams& params, const VolatilitySpec& spec, double h,
                    double tau, std::vector<double>& sigma2) {
    const int n = static_cast<int>(lagged_pi.size()) - 1;
    const bool clamp = clamps_curvature(spec);
    sigma2.resize(n);
    for (int i = 0; i < n; ++i) {
        double p = (lagged_pi[i + 1] - lagged_pi[i]) / h;
        if (clamp && p < 0.0) p = 0.0;
        sigma2[i] = sigma_squared(spec, params, p, rho * std::exp(-i * h), tau);
    }
}

}  // namespace

std::vector<double> diffusion_step(const std::vector<double>& half,
                                   const std::vector<double>& lagged_pi, double rho,
                                   const MarketParams& params, const VolatilitySpec& spec,
                                   double k, double h, double tau, PdeDiagnostics* diag) {
    const int n = static_cast<int>(half.size()) - 1;
    static thread_local std::vector<double> sigma2, lo, di, up, rhs, sol, scratch;
    eval_sigma_row(lagged_pi, rho, params, spec, h, tau, sigma2);

    const int rows = n - 1;
    lo.resize(rows);
    di.resize(rows);
    up.resize(rows);
    rhs.resize(rows);
    sol.resize(rows);
    const double kh2 = k / (2.0 * h * h);
    const double kh = k / (2.0 * h);
    for (int i = 1; i <= rows; ++i) {
        const double a = -kh2 * sigma2[i - 1] + 0.5 * kh * sigma2[i];
        const double c = -kh2 * sigma2[i] - 0.5 * kh * sigma2[i];
        const double b = 1.0 + params.r * k - (a + c);
        lo[i - 1] = a;
        di[i - 1] = b;
        up[i - 1] = c;
        rhs[i - 1] = half[i];
        if (diag && (a > 0.0 || c > 0.0 || b < 1.0 ||
                     std::abs(b) < std::abs(a) + std::abs(c))) {
            ++diag->dominance_warnings;
            diag->worst_dominance_row = i;
        }
    }
    rhs[0] -= lo[0] * (-params.E);  // Dirichlet left end
    // right end value is 0, nothing to move

    math::solve_tridiagonal(lo, di, up, rhs, sol, scratch);

    std::vector<double> out(half.size());
    out[0] = -params.E;
    for (int i = 1; i <= rows; ++i) out[i] = sol[i - 1];
    out[n] = 0.0;
    return out;
}

double boundary_constraint(const std::vector<double>& pi, const MarketParams& params,
                           const VolatilitySpec& spec, double tau, double h,
                           double rho_lagged) {
    double slope = (pi[1] - pi[0]) / h;
    if (clamps_curvature(spec) && slope < 0.0) slope = 0.0;
    const double s2 = sigma_squared(spec, params, slope, rho_lagged, tau);
    return params.r * params.E / params.q + s2 * slope / (2.0 * params.q);
}

int advance_time_level(const TimeLevelState& prev, TimeLevelState& next,
                       const MarketParams& params, const VolatilitySpec& spec,
                       const SolverConfig& cfg, double tau, double k,
                       PdeDiagnostics* diag, double rho_predicted) {
    const double h = cfg.L / cfg.n;

    // Each sweep is one application of the split scheme at a trial boundary
    // value: transport with the shift implied by rho, tridiagonal solve with
    // the volatility frozen on the latest level iterate, constraint read from
    // the new slope. The level problem is a scalar root-find rho = sweep(rho)
    // (exactly scalar for constant volatility); plain substitution is
    // unstable once sigma^2 Pi_x(0)/(2 q rho h) exceeds one, which coarse
    // meshes reach early in the march.
    int sweeps = 0;
    std::vector<double> pi_lag = prev.pi;  // sigma evaluation state
    std::vector<double> pi_new;
    const auto sweep = [&](double rho_trial) -> double {
        std::vector<double> half =
            transport_step(prev.pi, prev.rho, rho_trial, params, k, h, -params.E);
        pi_new = diffusion_step(half, pi_lag, rho_trial, params, spec, k, h, tau, diag);
        ++sweeps;
        return boundary_constraint(pi_new, params, spec, tau, h, rho_trial);
    };

    double rho_b = (rho_predicted > 0.0) ? rho_predicted : prev.rho;
    double g_b = sweep(rho_b) - rho_b;
    double rho_a = rho_b, g_a = g_b;
    bool have_pair = false;
    double change = std::abs(g_b);
    while (sweeps < cfg.micro_max) {
        if (std::abs(g_b) < 0.25 * cfg.micro_tol) {
            // Verification sweep with the stopping rule of the abstract
            // iteration: the change of one further plain sweep from the
            // candidate state must drop below micro_tol.
            std::vector<double> pi_old = pi_new;
            pi_lag = std::move(pi_new);
            const double rho_check = sweep(rho_b);
            change = std::abs(rho_check - rho_b);
            for (std::size_t i = 0; i < pi_new.size(); ++i)
                change = std::max(change, std::abs(pi_new[i] - pi_old[i]));
            if (change < cfg.micro_tol) {
                next.pi = std::move(pi_new);
                next.rho = rho_check;
                return sweeps;
            }
            pi_lag = pi_new;
            rho_b = rho_check;
            g_b = sweep(rho_b) - rho_b;
            have_pair = false;
            continue;
        }
        double rho_c;
        if (have_pair && g_b != g_a)
            rho_c = rho_b - g_b * (rho_b - rho_a) / (g_b - g_a);
        else
            rho_c = rho_b + g_b;  // Picard step seeds the secant pair
        rho_a = rho_b;
        g_a = g_b;
        rho_b = rho_c;
        pi_lag = std::move(pi_new);
        g_b = sweep(rho_b) - rho_b;
        have_pair = true;
    }
    throw ConvergenceError("advance_time_level: micro-iteration cap at tau=" +
                               std::to_string(tau) + ", residual " +
                               std::to_string(change),
                           change);
}

PortfolioSurface solve_free_boundary(const MarketParams& params, const VolatilitySpec& spec,
                                     const SolverConfig& cfg) {
    params.validate_call();
    validate(spec);
    cfg.validate(params);

    // Parabolicity probe on a small nonnegative-curvature grid before
    // committing to the march.
    const double rho0 = params.rho0_call();
    for (double p : {0.0, 0.5 * params.E, 2.0 * params.E})
        for (double S : {rho0 * std::exp(-cfg.L), params.E, rho0})
            for (double tau : {0.0, params.T})
                if (!(parabolicity_margin(spec, params, p, S, tau) > 0.0))
                    throw InvalidParams(
                        "solve_free_boundary: volatility loses parabolicity at p=" +
                        std::to_string(p) + ", S=" + std::to_string(S));

    const double h = cfg.L / cfg.n;
    const double k = params.T / cfg.m;

    PortfolioSurface surf;
    surf.params = params;
    surf.x.resize(cfg.n + 1);
    for (int i = 0; i <= cfg.n; ++i) surf.x[i] = i * h;

    TimeLevelState state;
    state.pi = initial_portfolio(params, cfg);
    state.rho = rho0;

    surf.boundary.taus.reserve(cfg.m + 1);
    surf.boundary.rhos.reserve(cfg.m + 1);
    surf.boundary.taus.push_back(0.0);
    surf.boundary.rhos.push_back(state.rho);

    PdeDiagnostics diag;
    diag.min_pi = -params.E;
    diag.max_pi = 0.0;
    diag.min_rho_step = 0.0;
    long total_micro = 0;

    if (cfg.snapshot_stride > 0) surf.levels.emplace_back(0.0, state.pi);

    TimeLevelState next;
    double rho_two_back = rho0;
    for (long j = 1; j <= cfg.m; ++j) {
        const double tau = j * k;
        const double rho_before = state.rho;
        const double predicted =
            (j >= 2) ? std::max(2.0 * state.rho - rho_two_back, rho0) : 0.0;
        const int micro =
            advance_time_level(state, next, params, spec, cfg, tau, k, &diag, predicted);
        rho_two_back = rho_before;
        state = std::move(next);

        total_micro += micro;
        diag.max_micro = std::max(diag.max_micro, micro);
        diag.min_rho_step = std::min(diag.min_rho_step, state.rho - rho_before);
        for (double v : state.pi) {
            diag.min_pi = std::min(diag.min_pi, v);
            diag.max_pi = std::max(diag.max_pi, v);
        }

        surf.boundary.taus.push_back(tau);
        surf.boundary.rhos.push_back(state.rho);
        if (cfg.snapshot_stride > 0 && (j % cfg.snapshot_stride == 0) && j != cfg.m)
            surf.levels.emplace_back(tau, state.pi);
    }
    surf.levels.emplace_back(params.T, state.pi);
    diag.mean_micro = static_cast<double>(total_micro) / static_cast<double>(cfg.m);
    surf.diag = diag;
    return surf;
}

PriceResult recover_price(const PortfolioSurface& surface, double S, double tau) {
    if (!(S > 0.0)) throw InvalidParams("recover_price: S must be > 0");
    double gap = surface.boundary.taus.size() > 1 ? surface.boundary.taus[1] : 0.0;
    for (std::size_t i = 1; i < surface.levels.size(); ++i)
        gap = std::max(gap, surface.levels[i].first - surface.levels[i - 1].first);
    const std::vector<double>& pi = surface.level_at(tau, 0.5 * gap + 1e-12);
    const double rho = surface.boundary.rho_at(tau);
    if (S > rho) return {S - surface.params.E, true};

    const double x_end = std::log(rho / S);
    const double h = surface.x[1] - surface.x[0];
    const int n_full = std::min(static_cast<int>(x_end / h),
                                static_cast<int>(surface.x.size()) - 1);
    double integral = 0.0;
    for (int i = 0; i < n_full; ++i) {
        const double fa = std::exp(surface.x[i]) * pi[i];
        const double fb = std::exp(surface.x[i + 1]) * pi[i + 1];
        integral += 0.5 * h * (fa + fb);
    }
    const double x_last = surface.x[n_full];
    if (x_end > x_last) {
        const double pi_end = math::lerp_uniform(pi, 0.0, h, x_end);
        integral += 0.5 * (x_end - x_last) *
                    (std::exp(x_last) * pi[n_full] + std::exp(x_end) * pi_end);
    }
    return {S / rho * (rho - surface.params.E + integral), false};
}

std::vector<double> eoc(const std::vector<std::pair<double, double>>& errors) {
    if (errors.size() < 2) throw InvalidParams("eoc: need at least two (h, err) entries");
    std::vector<double> out;
    out.reserve(errors.size() - 1);
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const auto& [h0, e0] = errors[i - 1];
        const auto& [h1, e1] = errors[i];
        if (h0 == h1) throw InvalidParams("eoc: mesh sizes must be distinct");
        if (e0 <= 0.0 || e1 <= 0.0)
            throw InvalidParams("eoc: error entries must be positive");
        out.push_back(std::log(e1 / e0) / std::log(h1 / h0));
    }
    return out;
}

CurveDistance boundary_distance(const BoundaryCurve& curve, const BoundaryCurve& reference) {
    CurveDistance d;
    double sum = 0.0;
    for (std::size_t j = 0; j < curve.size(); ++j) {
        const double diff = curve.rhos[j] - reference.rho_at(curve.taus[j]);
        d.linf = std::max(d.linf, std::abs(diff));
        // trapezoid weights on the curve's own (possibly nonuniform) grid
        double w = 0.0;
        if (j > 0) w += 0.5 * (curve.taus[j] - curve.taus[j - 1]);
        if (j + 1 < curve.size()) w += 0.5 * (curve.taus[j + 1] - curve.taus[j]);
        sum += w * diff * diff;
    }
    d.l2 = std::sqrt(sum);
    return d;
}

}  // namespace fbound
