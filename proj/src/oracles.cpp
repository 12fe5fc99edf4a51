#include "fbound/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbound/math/normal.hpp"

namespace fbound {

double bs_european_price(double S, const MarketParams& params, double tau, Payoff payoff) {
    if (!(S > 0.0)) throw InvalidParams("bs_european_price: S must be > 0");
    if (tau < 0.0) throw InvalidParams("bs_european_price: tau must be >= 0");
    const double fwd = S * std::exp(-params.q * tau);
    const double disc_e = params.E * std::exp(-params.r * tau);
    const double vol = params.sigma_hat * std::sqrt(tau);
    if (vol < 1e-12) {
        const double call = std::max(fwd - disc_e, 0.0);
        return payoff == Payoff::Call ? call : call - fwd + disc_e;
    }
    const double d1 = (std::log(S / params.E) +
                       (params.r - params.q + 0.5 * params.sigma_hat * params.sigma_hat) * tau) /
                      vol;
    const double d2 = d1 - vol;
    const double call = fwd * math::norm_cdf(d1) - disc_e * math::norm_cdf(d2);
    if (payoff == Payoff::Call) return call;
    return call - fwd + disc_e;  // put-call parity
}

double bs_implied_vol(double price, double S, const MarketParams& params, double tau,
                      Payoff payoff) {
    MarketParams p = params;
    double lo = 1e-6, hi = 5.0;
    p.sigma_hat = lo;
    const double f_lo = bs_european_price(S, p, tau, payoff) - price;
    p.sigma_hat = hi;
    const double f_hi = bs_european_price(S, p, tau, payoff) - price;
    if (f_lo * f_hi > 0.0)
        throw DomainError("bs_implied_vol: price outside attainable range");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        p.sigma_hat = mid;
        const double f = bs_european_price(S, p, tau, payoff) - price;
        if ((f_lo < 0.0) == (f < 0.0))
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

LatticeResult binomial_price(double S, const MarketParams& params, const LatticeConfig& cfg) {
    if (cfg.steps < 1) throw InvalidParams("binomial_price: steps must be >= 1");
    params.validate();
    const int N = cfg.steps;
    const double dt = params.T / N;
    const double u = std::exp(params.sigma_hat * std::sqrt(dt));
    const double d = 1.0 / u;
    const double disc = std::exp(-params.r * dt);
    const double growth = std::exp((params.r - params.q) * dt);
    const double pu = (growth - d) / (u - d);
    if (pu <= 0.0 || pu >= 1.0)
        throw NumericError("binomial_price: risk-neutral probability outside (0,1); "
                           "increase steps");
    const double pd = 1.0 - pu;

    // S at level j, node i is S * upow[2i - j + N].
    std::vector<double> upow(2 * N + 1);
    upow[N] = 1.0;
    for (int k = 1; k <= N; ++k) {
        upow[N + k] = upow[N + k - 1] * u;
        upow[N - k] = upow[N - k + 1] * d;
    }
    const auto node_s = [&](int j, int i) { return S * upow[2 * i - j + N]; };
    const auto intrinsic = [&](double s) {
        return cfg.payoff == Payoff::Call ? std::max(s - params.E, 0.0)
                                          : std::max(params.E - s, 0.0);
    };

    std::vector<double> v(N + 1);
    for (int i = 0; i <= N; ++i) v[i] = intrinsic(node_s(N, i));

    std::vector<double> b_taus, b_vals;
    for (int j = N - 1; j >= 0; --j) {
        const double tau_level = params.T - j * dt;
        int cross = -1;       // node index where exercise becomes optimal
        double f_prev = 0.0;  // continuation - intrinsic at the previous node
        for (int i = 0; i <= j; ++i) {
            const double cont = disc * (pu * v[i + 1] + pd * v[i]);
            const double s_node = node_s(j, i);
            const double intr = intrinsic(s_node);
            const double f = cont - intr;
            if (cfg.style == Style::American) {
                v[i] = std::max(cont, intr);
                if (cfg.payoff == Payoff::Call) {
                    if (cross < 0 && i > 0 && intr > 0.0 && f <= 0.0 && f_prev > 0.0) {
                        cross = i;
                        const double s_lo = node_s(j, i - 1);
                        b_taus.push_back(tau_level);
                        b_vals.push_back(s_lo + (s_node - s_lo) * f_prev / (f_prev - f));
                    }
                } else {
                    // put: boundary where exercise stops being optimal going up
                    if (cross < 0 && i > 0 && f >= 0.0 && f_prev < 0.0 &&
                        intrinsic(node_s(j, i - 1)) > 0.0) {
                        cross = i;
                        const double s_lo = node_s(j, i - 1);
                        b_taus.push_back(tau_level);
                        b_vals.push_back(s_lo + (s_node - s_lo) * (-f_prev) / (f - f_prev));
                    }
                }
            } else {
                v[i] = cont;
            }
            f_prev = f;
        }
    }

    LatticeResult res;
    res.price = v[0];
    // the backward induction visits levels in ascending time-to-expiry order
    res.boundary.taus = std::move(b_taus);
    res.boundary.rhos = std::move(b_vals);
    return res;
}

double PsorResult::value_at(double spot) const { return math::lerp_sorted(S, V, spot); }

PsorResult psor_price(const MarketParams& params, const PsorConfig& cfg) {
    params.validate();
    const int n = cfg.n, m = cfg.m;
    if (n < 4 || m < 1) throw InvalidParams("psor_price: need n >= 4, m >= 1");
    const double x_lo = (cfg.x_lo != 0.0 || cfg.x_hi != 0.0) ? cfg.x_lo
                                                             : std::log(params.E) - 2.5;
    const double x_hi = (cfg.x_lo != 0.0 || cfg.x_hi != 0.0) ? cfg.x_hi
                                                             : std::log(params.E) + 2.5;
    const double h = (x_hi - x_lo) / n;
    const double k = params.T / m;
    const double s2 = params.sigma_hat * params.sigma_hat;
    const double drift = params.r - params.q - 0.5 * s2;

    std::vector<double> x(n + 1), s(n + 1), intr(n + 1), v(n + 1);
    for (int i = 0; i <= n; ++i) {
        x[i] = x_lo + i * h;
        s[i] = std::exp(x[i]);
        intr[i] = cfg.payoff == Payoff::Call ? std::max(s[i] - params.E, 0.0)
                                             : std::max(params.E - s[i], 0.0);
        v[i] = intr[i];
    }

    const double lo_c = -k * (0.5 * s2 / (h * h) - drift / (2.0 * h));
    const double up_c = -k * (0.5 * s2 / (h * h) + drift / (2.0 * h));
    const double di_c = 1.0 + k * (s2 / (h * h) + params.r);

    PsorResult res;
    res.S = s;
    std::vector<double> rhs(n + 1);
    for (int j = 1; j <= m; ++j) {
        rhs = v;
        // Dirichlet ends stay on the payoff (deep in/out of the money).
        int sweep = 0;
        for (; sweep < cfg.max_sweeps; ++sweep) {
            double change = 0.0;
            for (int i = 1; i < n; ++i) {
                const double gs = (rhs[i] - lo_c * v[i - 1] - up_c * v[i + 1]) / di_c;
                const double next = std::max(intr[i], v[i] + cfg.omega * (gs - v[i]));
                change = std::max(change, std::abs(next - v[i]));
                v[i] = next;
            }
            if (change < cfg.tol) break;
        }
        if (sweep >= cfg.max_sweeps)
            throw ConvergenceError("psor_price: relaxation sweep stalled at level " +
                                       std::to_string(j),
                                   cfg.tol);
        res.max_sweeps_used = std::max(res.max_sweeps_used, sweep + 1);

        // complementarity residual on the k-scaled system
        for (int i = 1; i < n; ++i) {
            const double av = lo_c * v[i - 1] + di_c * v[i] + up_c * v[i + 1] - rhs[i];
            const double slack = v[i] - intr[i];
            res.max_lcp_residual =
                std::max(res.max_lcp_residual, std::abs(std::min(av, slack)));
        }

        // contact boundary for this level
        const double contact_tol = 1e-7 * params.E;
        if (cfg.payoff == Payoff::Call) {
            for (int i = 1; i <= n; ++i) {
                if (intr[i] > 0.0 && v[i] - intr[i] <= contact_tol) {
                    const double f_prev = v[i - 1] - intr[i - 1];
                    const double f = v[i] - intr[i];
                    double sb = s[i];
                    if (f_prev > f)
                        sb = s[i - 1] + (s[i] - s[i - 1]) * (f_prev - contact_tol) /
                                            (f_prev - f);
                    res.boundary.taus.push_back(j * k);
                    res.boundary.rhos.push_back(std::min(sb, s[i]));
                    break;
                }
            }
        } else {
            for (int i = n - 1; i >= 0; --i) {
                if (intr[i] > 0.0 && v[i] - intr[i] <= contact_tol) {
                    res.boundary.taus.push_back(j * k);
                    res.boundary.rhos.push_back(s[i]);
                    break;
                }
            }
        }
    }
    res.V = v;
    return res;
}

namespace {

double baw_critical_call(const MarketParams& params, double tau, double q2) {
    const double sqt = std::sqrt(tau);
    const double eq = std::exp(-params.q * tau);
    // seed from the perpetual boundary, per the original approximation
    const double m = 2.0 * params.r / (params.sigma_hat * params.sigma_hat);
    const double nn = 2.0 * (params.r - params.q) / (params.sigma_hat * params.sigma_hat);
    const double q2_inf = 0.5 * (-(nn - 1.0) + std::sqrt((nn - 1.0) * (nn - 1.0) + 4.0 * m));
    const double s_inf = params.E / (1.0 - 1.0 / q2_inf);
    const double h2 = -((params.r - params.q) * tau + 2.0 * params.sigma_hat * sqt) *
                      params.E / (s_inf - params.E);
    double s = params.E + (s_inf - params.E) * (1.0 - std::exp(h2));

    for (int it = 0; it < 100; ++it) {
        const double d1 =
            (std::log(s / params.E) +
             (params.r - params.q + 0.5 * params.sigma_hat * params.sigma_hat) * tau) /
            (params.sigma_hat * sqt);
        const double nd1 = math::norm_cdf(d1);
        const double euro = bs_european_price(s, params, tau, Payoff::Call);
        const double f = euro + (1.0 - eq * nd1) * s / q2 - (s - params.E);
        const double fp = eq * nd1 - 1.0 +
                          ((1.0 - eq * nd1) -
                           eq * math::norm_pdf(d1) / (params.sigma_hat * sqt)) /
                              q2;
        const double step = f / fp;
        s -= step;
        if (!(s > params.E))
            s = params.E * (1.0 + 1e-6);
        if (std::abs(step) < 1e-10 * params.E) return s;
    }
    throw NumericError("baw_price: Newton on the critical price did not converge");
}

double baw_critical_put(const MarketParams& params, double tau, double q1) {
    const double sqt = std::sqrt(tau);
    const double eq = std::exp(-params.q * tau);
    const double m = 2.0 * params.r / (params.sigma_hat * params.sigma_hat);
    const double nn = 2.0 * (params.r - params.q) / (params.sigma_hat * params.sigma_hat);
    const double q1_inf = 0.5 * (-(nn - 1.0) - std::sqrt((nn - 1.0) * (nn - 1.0) + 4.0 * m));
    const double s_inf = params.E / (1.0 - 1.0 / q1_inf);
    const double h1 = ((params.r - params.q) * tau - 2.0 * params.sigma_hat * sqt) *
                      params.E / (params.E - s_inf);
    double s = s_inf + (params.E - s_inf) * std::exp(h1);

    for (int it = 0; it < 100; ++it) {
        const double d1 =
            (std::log(s / params.E) +
             (params.r - params.q + 0.5 * params.sigma_hat * params.sigma_hat) * tau) /
            (params.sigma_hat * sqt);
        const double nd1m = math::norm_cdf(-d1);
        const double euro = bs_european_price(s, params, tau, Payoff::Put);
        const double f = euro - (1.0 - eq * nd1m) * s / q1 - (params.E - s);
        const double fp = -eq * nd1m + 1.0 -
                          ((1.0 - eq * nd1m) +
                           eq * math::norm_pdf(d1) / (params.sigma_hat * sqt)) /
                              q1;
        const double step = f / fp;
        s -= step;
        if (!(s > 0.0) || s >= params.E) s = 0.5 * params.E;
        if (std::abs(step) < 1e-10 * params.E) return s;
    }
    throw NumericError("baw_price: Newton on the critical price did not converge");
}

}  // namespace

double baw_price(double S, const MarketParams& params, double tau, Payoff payoff) {
    if (!(tau > 0.0)) throw InvalidParams("baw_price: tau must be > 0");
    params.validate();
    const double s2 = params.sigma_hat * params.sigma_hat;
    const double m = 2.0 * params.r / s2;
    const double nn = 2.0 * (params.r - params.q) / s2;
    const double kk = 1.0 - std::exp(-params.r * tau);

    if (payoff == Payoff::Call) {
        if (params.q <= 0.0) return bs_european_price(S, params, tau, Payoff::Call);
        const double q2 =
            0.5 * (-(nn - 1.0) + std::sqrt((nn - 1.0) * (nn - 1.0) + 4.0 * m / kk));
        const double s_star = baw_critical_call(params, tau, q2);
        if (S >= s_star) return S - params.E;
        const double d1 =
            (std::log(s_star / params.E) + (params.r - params.q + 0.5 * s2) * tau) /
            (params.sigma_hat * std::sqrt(tau));
        const double a2 =
            (s_star / q2) * (1.0 - std::exp(-params.q * tau) * math::norm_cdf(d1));
        return bs_european_price(S, params, tau, Payoff::Call) +
               a2 * std::pow(S / s_star, q2);
    }

    const double q1 =
        0.5 * (-(nn - 1.0) - std::sqrt((nn - 1.0) * (nn - 1.0) + 4.0 * m / kk));
    const double s_star = baw_critical_put(params, tau, q1);
    if (S <= s_star) return params.E - S;
    const double d1 = (std::log(s_star / params.E) + (params.r - params.q + 0.5 * s2) * tau) /
                      (params.sigma_hat * std::sqrt(tau));
    const double a1 =
        -(s_star / q1) * (1.0 - std::exp(-params.q * tau) * math::norm_cdf(-d1));
    return bs_european_price(S, params, tau, Payoff::Put) + a1 * std::pow(S / s_star, q1);
}

}  // namespace fbound
