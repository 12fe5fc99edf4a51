#include "fbound/gamma_eq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbound/math/interp.hpp"
#include "fbound/math/normal.hpp"
#include "fbound/math/tridiag.hpp"
#include "fbound/oracles.hpp"

namespace fbound {

double RapmParams::mu() const { return 3.0 * std::cbrt(C * C * R / (2.0 * math::kPi)); }

void RapmParams::validate() const {
    if (C < 0.0 || R < 0.0) throw InvalidParams("RapmParams: C, R must be nonnegative");
}

double transaction_cost_rate(const RapmParams& rapm, double sigma_hat, double S,
                             double gamma, double dt) {
    return rapm.C * sigma_hat * S * std::abs(gamma) /
           (std::sqrt(2.0 * math::kPi) * std::sqrt(dt));
}

double volatile_portfolio_rate(const RapmParams& rapm, double sigma_hat, double S,
                               double gamma, double dt) {
    const double s2 = sigma_hat * sigma_hat;
    return 0.5 * rapm.R * s2 * s2 * S * S * gamma * gamma * dt;
}

HedgingOptimum optimal_hedging_interval(const RapmParams& rapm, double sigma_hat, double S,
                                        double gamma) {
    rapm.validate();
    if (!(sigma_hat > 0.0) || S * gamma == 0.0)
        throw InvalidParams("optimal_hedging_interval: need sigma_hat > 0 and S*Gamma != 0");
    HedgingOptimum out;
    if (rapm.C == 0.0 || rapm.R == 0.0) {
        out.degenerate = true;
        out.r_r_min = 0.0;
        out.dt_opt = (rapm.C == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
        return out;
    }
    const double sg = std::abs(S * gamma);
    const double K = std::cbrt(rapm.C / (rapm.R * std::sqrt(2.0 * math::kPi)));
    out.dt_opt = K * K / (sigma_hat * sigma_hat * std::pow(sg, 2.0 / 3.0));
    out.r_r_min = 1.5 * std::cbrt(rapm.C * rapm.C * rapm.R / (2.0 * math::kPi)) *
                  sigma_hat * sigma_hat * std::pow(sg, 4.0 / 3.0);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> initial_gamma(const MarketParams& params, double tau_star,
                                  const std::vector<double>& grid) {
    if (!(tau_star > 0.0)) throw InvalidParams("initial_gamma: tau_star must be > 0");
    const double s = params.sigma_hat;
    const double denom = s * std::sqrt(tau_star);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = (grid[i] + (params.r - params.q - 0.5 * s * s) * tau_star) / denom;
        out[i] = math::norm_pdf(d) / denom;
    }
    return out;
}

namespace {

double beta_fn(double h, double mu, double s2half) {
    const double hp = std::max(h, 0.0);
    return s2half * (1.0 + mu * std::cbrt(hp)) * hp;
}

double beta_prime(double h, double mu, double s2half) {
    const double hp = std::max(h, 0.0);
    return s2half * (1.0 + (4.0 / 3.0) * mu * std::cbrt(hp));
}

double trapezoid_mass(const std::vector<double>& v, double h) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]);
    return s * h;
}

}  // namespace

GammaField solve_gamma_equation(const MarketParams& params, const RapmParams& rapm,
                                const GammaConfig& cfg) {
    params.validate();
    rapm.validate();
    if (cfg.n < 4 || cfg.m < 1) throw InvalidParams("GammaConfig: n >= 4, m >= 1");

    const double mu = rapm.mu();
    const double s2half = 0.5 * params.sigma_hat * params.sigma_hat;
    const double X = (cfg.X > 0.0) ? cfg.X : 6.0 * params.sigma_hat * std::sqrt(params.T);
    const int n = cfg.n;
    const double h = 2.0 * X / n;
    const double k = params.T / cfg.m;

    GammaField field;
    field.tau_star = cfg.tau_star;
    field.x.resize(n + 1);
    for (int i = 0; i <= n; ++i) field.x[i] = -X + i * h;
    std::vector<double> H = initial_gamma(params, cfg.tau_star, field.x);
    H.front() = 0.0;
    H.back() = 0.0;
    field.mass_initial = trapezoid_mass(H, h);

    // Conservative flux form: F_{i+1/2} = (beta_{i+1} - beta_i)/h
    //   + (beta_{i+1} + beta_i)/2 + r (H_{i+1} + H_i)/2,  dH/dtau = dF/dx.
    // beta is advanced implicitly through its lagged-slope linearization
    // beta(H) ~ beta(H_lag) + beta'(H_lag)(H - H_lag); the centered advective
    // flux keeps the telescoping mass balance exact up to the boundary fluxes.
    const int rows = n - 1;
    std::vector<double> g(n + 1), b0(n + 1);
    std::vector<double> lo(rows), di(rows), up(rows), rhs(rows), sol(rows), scratch;

    if (cfg.snapshot_stride > 0) field.levels.emplace_back(0.0, H);
    field.min_value = 0.0;

    const double r = params.r;
    for (long j = 1; j <= cfg.m; ++j) {
        for (int i = 0; i <= n; ++i) {
            g[i] = beta_prime(H[i], mu, s2half);
            b0[i] = beta_fn(H[i], mu, s2half) - g[i] * H[i];
        }
        const double kh = k / h;
        for (int i = 1; i <= rows; ++i) {
            const double a_c = g[i - 1] * (1.0 / h - 0.5) - 0.5 * r;
            const double c_c = g[i + 1] * (1.0 / h + 0.5) + 0.5 * r;
            lo[i - 1] = -kh * a_c;
            di[i - 1] = 1.0 + kh * 2.0 * g[i] / h;
            up[i - 1] = -kh * c_c;
            const double fc_hi = (b0[i + 1] - b0[i]) / h + 0.5 * (b0[i + 1] + b0[i]);
            const double fc_lo = (b0[i] - b0[i - 1]) / h + 0.5 * (b0[i] + b0[i - 1]);
            rhs[i - 1] = H[i] + kh * (fc_hi - fc_lo);
        }
        math::solve_tridiagonal(lo, di, up, rhs, sol, scratch);

        for (int i = 1; i <= rows; ++i) H[i] = sol[i - 1];
        double mn = 0.0;
        for (double v : H) mn = std::min(mn, v);
        field.min_value = std::min(field.min_value, mn);
        if (mn < -1e-12)
            throw SchemeFailureError("solve_gamma_equation: negative H = " +
                                     std::to_string(mn) + " at tau=" +
                                     std::to_string(j * k));
        for (double& v : H) v = std::max(v, 0.0);

        field.max_mass_drift = std::max(
            field.max_mass_drift, std::abs(trapezoid_mass(H, h) - field.mass_initial));
        if (cfg.snapshot_stride > 0 && j % cfg.snapshot_stride == 0 && j != cfg.m)
            field.levels.emplace_back(j * k, H);
    }
    field.tau = params.T;
    field.values = std::move(H);
    field.levels.emplace_back(field.tau, field.values);
    return field;
}

// ---------------------------------------------------------------------------

double RapmPriceCurve::value_at(double spot) const {
    return math::lerp_sorted(S, V, spot);
}

RapmPriceCurve price_european_rapm(const MarketParams& params, double mu, double tau,
                                   const RapmPriceConfig& cfg) {
    params.validate();
    if (mu < 0.0) throw InvalidParams("price_european_rapm: mu must be >= 0");
    if (!(tau > 0.0)) throw InvalidParams("price_european_rapm: tau must be > 0");

    const double X = (cfg.X > 0.0)
                         ? cfg.X
                         : std::max(3.0, 5.0 * params.sigma_hat * std::sqrt(params.T) +
                                             std::abs(params.r - params.q) * params.T + 1.0);
    const int n = cfg.n;
    const double h = 2.0 * X / n;
    const long m = std::max<long>(1, std::lround(cfg.m * tau / params.T));
    const double k = tau / m;
    const double s2hat = params.sigma_hat * params.sigma_hat;

    std::vector<double> x(n + 1);
    for (int i = 0; i <= n; ++i) x[i] = -X + i * h;

    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = std::max(params.E * (std::exp(x[i]) - 1.0), 0.0);

    const int rows = n - 1;
    std::vector<double> lo(rows), di(rows), up(rows), rhs(rows), sol(rows), scratch;
    std::vector<double> sigma2(n + 1, s2hat), vs(v);

    for (long j = 1; j <= m; ++j) {
        const double tj = j * k;
        const double left = 0.0;
        const double right = params.E * (std::exp(x[n] - params.q * tj) -
                                         std::exp(-params.r * tj));
        vs = v;
        double change = 0.0;
        int sweep = 0;
        for (; sweep < cfg.inner_max; ++sweep) {
            // freeze sigma^2 from the previous sweep
            for (int i = 1; i < n; ++i) {
                const double curv = (vs[i + 1] - 2.0 * vs[i] + vs[i - 1]) / (h * h) -
                                    (vs[i + 1] - vs[i - 1]) / (2.0 * h);
                const double sgamma =
                    std::max(curv, 0.0) * std::exp(-x[i]) / params.E;
                sigma2[i] = s2hat * (1.0 + mu * std::cbrt(sgamma));
            }
            for (int i = 1; i <= rows; ++i) {
                const double half = 0.5 * sigma2[i];
                const double a = half / (h * h) + half / (2.0 * h) -
                                 (params.r - params.q) / (2.0 * h);
                const double c = half / (h * h) - half / (2.0 * h) +
                                 (params.r - params.q) / (2.0 * h);
                lo[i - 1] = -k * a;
                di[i - 1] = 1.0 + k * (sigma2[i] / (h * h) + params.r);
                up[i - 1] = -k * c;
                rhs[i - 1] = v[i];
            }
            rhs[0] -= lo[0] * left;
            rhs[rows - 1] -= up[rows - 1] * right;
            math::solve_tridiagonal(lo, di, up, rhs, sol, scratch);

            change = 0.0;
            for (int i = 1; i <= rows; ++i)
                change = std::max(change, std::abs(sol[i - 1] - vs[i]));
            for (int i = 1; i <= rows; ++i) vs[i] = sol[i - 1];
            vs[0] = left;
            vs[n] = right;
            if (mu == 0.0 || change < cfg.inner_tol * params.E) {
                ++sweep;
                break;
            }
        }
        if (mu > 0.0 && change >= cfg.inner_tol * params.E)
            throw ConvergenceError("price_european_rapm: inner sweeps stalled at level " +
                                       std::to_string(j),
                                   change);
        v = vs;
    }

    RapmPriceCurve curve;
    curve.tau = tau;
    curve.S.resize(n + 1);
    curve.V = std::move(v);
    for (int i = 0; i <= n; ++i) curve.S[i] = params.E * std::exp(x[i]);
    return curve;
}

double rapm_price_at(const MarketParams& params, const RapmParams& rapm, double S,
                     double t, const RapmPriceConfig& cfg) {
    const double tau = params.T - t;
    return price_european_rapm(params, rapm.mu(), tau, cfg).value_at(S);
}

BidAsk bid_ask(const MarketParams& params, const RapmParams& rapm, double S, double t,
               const RapmPriceConfig& cfg) {
    BidAsk out;
    out.ask = rapm_price_at(params, rapm, S, t, cfg);
    out.mid = rapm_price_at(params, RapmParams{rapm.C, 0.0}, S, t, cfg);
    out.bid = 2.0 * out.mid - out.ask;
    return out;
}

CalibrationResult calibrate_rapm(double v_mid_obs, double v_ask_obs, double C,
                                 const MarketParams& params, double S, double t,
                                 const RapmPriceConfig& cfg) {
    if (v_ask_obs < v_mid_obs)
        throw ConvergenceError("calibrate_rapm: infeasible quotes, V_ask < V_mid",
                               v_mid_obs - v_ask_obs);
    const double tau = params.T - t;
    if (!(tau > 0.0)) throw InvalidParams("calibrate_rapm: need t < T");

    const auto model = [&](double sigma, double R) {
        MarketParams p = params;
        p.sigma_hat = sigma;
        return rapm_price_at(p, RapmParams{C, R}, S, t, cfg);
    };

    // Starting point: Black-Scholes implied vol of the mid quote, unit risk
    // premium.
    double sigma;
    try {
        sigma = bs_implied_vol(v_mid_obs, S, params, tau, Payoff::Call);
    } catch (const Error&) {
        sigma = 0.3;
    }
    double R = 1.0;

    const double tol = 1e-6 * params.E;
    double f_mid = model(sigma, 0.0) - v_mid_obs;
    double f_ask = model(sigma, R) - v_ask_obs;
    CalibrationResult out;
    for (int it = 0; it < 50; ++it) {
        if (std::abs(f_mid) < tol && std::abs(f_ask) < tol) {
            out.sigma = sigma;
            out.R = R;
            out.resid_mid = f_mid;
            out.resid_ask = f_ask;
            out.iterations = it;
            return out;
        }
        const double ds = std::max(1e-5, 1e-4 * sigma);
        const double dr = std::max(1e-3, 1e-3 * R);
        const double j11 = (model(sigma + ds, 0.0) - v_mid_obs - f_mid) / ds;  // dF_mid/dsigma
        const double j21 = (model(sigma + ds, R) - v_ask_obs - f_ask) / ds;    // dF_ask/dsigma
        const double j22 = (model(sigma, R + dr) - v_ask_obs - f_ask) / dr;    // dF_ask/dR
        const double det = j11 * j22;  // dF_mid/dR = 0: triangular Jacobian
        if (!std::isfinite(det) || std::abs(det) < 1e-30)
            throw ConvergenceError("calibrate_rapm: singular Jacobian",
                                   std::max(std::abs(f_mid), std::abs(f_ask)));
        double step_s = -f_mid / j11;
        double step_r = -(f_ask + j21 * step_s) / j22;

        // damped update with step halving
        const double base = std::abs(f_mid) + std::abs(f_ask);
        double lambda = 1.0;
        double ns = sigma, nr = R, nf_mid = f_mid, nf_ask = f_ask;
        for (int halving = 0; halving < 10; ++halving) {
            ns = std::clamp(sigma + lambda * step_s, 1e-3, 10.0);
            nr = std::max(R + lambda * step_r, 0.0);
            nf_mid = model(ns, 0.0) - v_mid_obs;
            nf_ask = model(ns, nr) - v_ask_obs;
            if (std::abs(nf_mid) + std::abs(nf_ask) < base) break;
            lambda *= 0.5;
        }
        sigma = ns;
        R = nr;
        f_mid = nf_mid;
        f_ask = nf_ask;
    }
    throw ConvergenceError("calibrate_rapm: no convergence in 50 iterations",
                           std::max(std::abs(f_mid), std::abs(f_ask)));
}

}  // namespace fbound
