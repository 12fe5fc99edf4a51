#include "fbound/asian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbound/math/tridiag.hpp"
#include "fbound/pde_solver.hpp"

namespace fbound {

void AsianConfig::validate() const {
    if (n < 2 || m < 2) throw InvalidParams("AsianConfig: need n, m >= 2");
    if (!(micro_tol > 0.0)) throw InvalidParams("AsianConfig: micro_tol must be > 0");
    if (!(L > 0.0)) throw InvalidParams("AsianConfig: L must be > 0");
}

namespace {

void validate_asian(const MarketParams& params) {
    params.validate();
    if (!(params.r > params.q))
        throw InvalidParams("asian: structural assumption r > q >= 0 violated");
}

}  // namespace

double asian_initial_boundary(const MarketParams& params) {
    params.validate();
    // (1 + rT)/(1 + qT), floored at 1 for the general-rate form; the march
    // itself requires r > q where the ratio exceeds 1.
    return std::max((1.0 + params.r * params.T) / (1.0 + params.q * params.T), 1.0);
}

double asian_boundary_constraint(const std::vector<double>& pi, const MarketParams& params,
                                 double tau, double h) {
    if (tau >= params.T)
        throw DomainError("asian_boundary_constraint: degenerate at the horizon tau=" +
                          std::to_string(tau));
    const double tm = params.T - tau;
    const double slope = (pi[1] - pi[0]) / h;
    const double s2 = params.sigma_hat * params.sigma_hat;
    return (1.0 + params.r * tm + tm * 0.5 * s2 * slope) / (1.0 + params.q * tm);
}

namespace {

// Tridiagonal solve of the diffusive part with drift
// sigma^2/2 + (rho e^{-xi} - 1)/(T - tau) and reaction r + 1/(T - tau).
std::vector<double> asian_diffusion(const std::vector<double>& half, double rho,
                                    const MarketParams& params, double k, double h,
                                    double tau) {
    const int n = static_cast<int>(half.size()) - 1;
    const double tm = params.T - tau;
    const double s2 = params.sigma_hat * params.sigma_hat;
    const double kh2 = k / (2.0 * h * h);
    const double kh = k / (2.0 * h);

    static thread_local std::vector<double> lo, di, up, rhs, sol, scratch;
    const int rows = n - 1;
    lo.resize(rows);
    di.resize(rows);
    up.resize(rows);
    rhs.resize(rows);
    sol.resize(rows);
    for (int i = 1; i <= rows; ++i) {
        const double drift = 0.5 * s2 + (rho * std::exp(-i * h) - 1.0) / tm;
        const double a = -kh2 * s2 + kh * drift;
        const double c = -kh2 * s2 - kh * drift;
        const double b = 1.0 + (params.r + 1.0 / tm) * k - (a + c);
        lo[i - 1] = a;
        di[i - 1] = b;
        up[i - 1] = c;
        rhs[i - 1] = half[i];
    }
    rhs[0] -= lo[0] * (-1.0);
    math::solve_tridiagonal(lo, di, up, rhs, sol, scratch);

    std::vector<double> out(half.size());
    out[0] = -1.0;
    for (int i = 1; i <= rows; ++i) out[i] = sol[i - 1];
    out[n] = 0.0;
    return out;
}

}  // namespace

int asian_advance(const AsianLevelState& prev, AsianLevelState& next,
                  const MarketParams& params, const AsianConfig& cfg, double tau,
                  double k, AsianDiagnostics*, double rho_predicted) {
    const double h = cfg.L / cfg.n;

    // One sweep of the split scheme at a trial boundary value: transport with
    // the shift implied by rho, tridiagonal solve, then the constraint read
    // from the new slope at xi = 0. The volatility is constant, so the level
    // problem is exactly a scalar root-find rho = sweep_constraint(rho); the
    // plain substitution loop is unstable at this coupling strength (the
    // constraint multiplies the slope by (T-tau) sigma^2 / 2h).
    int sweeps = 0;
    std::vector<double> pi_new;
    const auto sweep = [&](double rho_trial) -> double {
        if (std::abs(rho_trial - prev.rho) > cfg.blowup_guard)
            throw SchemeFailureError("asian_advance: boundary step " +
                                     std::to_string(rho_trial - prev.rho) +
                                     " exceeds guard at tau=" + std::to_string(tau));
        // Same characteristics formula as the vanilla case; a negative shift
        // (out-flowing boundary) reads interior values leftward and the
        // xi > L side clamps to 0.
        std::vector<double> half =
            transport_step(prev.pi, prev.rho, rho_trial, params, k, h, -1.0);
        pi_new = asian_diffusion(half, rho_trial, params, k, h, tau);
        ++sweeps;
        return asian_boundary_constraint(pi_new, params, tau, h);
    };

    double rho_a = (rho_predicted > 0.0) ? rho_predicted : prev.rho;
    double g_a = sweep(rho_a) - rho_a;
    if (std::abs(g_a) < cfg.micro_tol) {
        next.pi = std::move(pi_new);
        next.rho = rho_a;
        return sweeps;
    }
    double rho_b = rho_a + g_a;  // Picard step as the second secant point
    double g_b = sweep(rho_b) - rho_b;
    while (sweeps < cfg.micro_max) {
        if (std::abs(g_b) < cfg.micro_tol) {
            next.pi = std::move(pi_new);
            next.rho = rho_b;
            return sweeps;
        }
        if (g_b == g_a)
            throw ConvergenceError("asian_advance: stalled secant at tau=" +
                                       std::to_string(tau),
                                   std::abs(g_b));
        const double rho_c = rho_b - g_b * (rho_b - rho_a) / (g_b - g_a);
        rho_a = rho_b;
        g_a = g_b;
        rho_b = rho_c;
        g_b = sweep(rho_b) - rho_b;
    }
    throw ConvergenceError("asian_advance: micro-iteration cap at tau=" +
                               std::to_string(tau) + ", residual " +
                               std::to_string(std::abs(g_b)),
                           std::abs(g_b));
}

AsianResult asian_solve(const MarketParams& params, const AsianConfig& cfg) {
    validate_asian(params);
    cfg.validate();

    const double h = cfg.L / cfg.n;
    const double k = params.T / cfg.m;
    const double rho0 = asian_initial_boundary(params);

    AsianResult res;
    res.params = params;
    res.xi.resize(cfg.n + 1);
    for (int i = 0; i <= cfg.n; ++i) res.xi[i] = i * h;

    AsianLevelState state;
    state.rho = rho0;
    state.pi.resize(cfg.n + 1);
    const double jump = std::log(rho0);
    for (int i = 0; i <= cfg.n; ++i) state.pi[i] = (i * h < jump) ? -1.0 : 0.0;

    res.boundary.taus.reserve(cfg.m);
    res.boundary.rhos.reserve(cfg.m);
    res.boundary.taus.push_back(0.0);
    res.boundary.rhos.push_back(rho0);

    AsianDiagnostics diag;
    diag.min_pi = -1.0;
    diag.max_pi = 0.0;
    diag.min_rho = rho0;
    long total_micro = 0;

    // The reaction and drift scale like 1/(T - tau): the march stops one step
    // short of the singular horizon.
    AsianLevelState next;
    double rho_two_back = rho0;
    for (long j = 1; j <= cfg.m - 1; ++j) {
        const double tau = j * k;
        const double predicted =
            (j >= 2) ? std::max(2.0 * state.rho - rho_two_back, 1.0) : 0.0;
        const double rho_before = state.rho;
        const int micro = asian_advance(state, next, params, cfg, tau, k, &diag, predicted);
        rho_two_back = rho_before;
        state = std::move(next);
        if (std::log(state.rho / rho_before) + (params.r - params.q) * k < 0.0)
            ++diag.negative_drift_levels;

        total_micro += micro;
        diag.max_micro = std::max(diag.max_micro, micro);
        diag.min_rho = std::min(diag.min_rho, state.rho);
        for (double v : state.pi) {
            diag.min_pi = std::min(diag.min_pi, v);
            diag.max_pi = std::max(diag.max_pi, v);
        }
        res.boundary.taus.push_back(tau);
        res.boundary.rhos.push_back(state.rho);
    }
    diag.mean_micro = static_cast<double>(total_micro) / static_cast<double>(cfg.m - 1);
    res.diag = diag;
    res.final_tau = res.boundary.taus.back();
    res.final_pi = std::move(state.pi);
    return res;
}

}  // namespace fbound
