#include "fbound/integral_eq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbound/math/normal.hpp"
#include "fbound/math/quadrature.hpp"

namespace fbound {

namespace {

constexpr double kSqrtPi = 1.77245385090551602730;

double lambda_of(const MarketParams& p) {
    return (p.r - p.q) / p.sigma_hat - 0.5 * p.sigma_hat;
}

// log((1 + c H1) / (1 + c H2)) without cancellation for H1 ~ H2.
double log_ratio(double c, double h1, double h2) {
    return std::log1p(c * (h1 - h2) / (1.0 + c * h2));
}

struct ThetaIntegrand {
    const MarketParams& params;
    const std::vector<double>& h;  // current iterate on the uniform grid
    double dxi;                    // grid step
    double xi;                     // evaluation node
    double h_xi;                   // H(xi)
    double hp_xi;                  // H'(xi)
    double lambda;
    double eps;

    double h_interp(double x) const {
        return math::lerp_uniform(h, 0.0, dxi, x);
    }

    // Limit of cotg(theta) g_H(xi, theta) as theta -> 0.
    double patch() const {
        const double c = params.sigma_hat * math::kSqrt2;
        return 0.5 * hp_xi / (1.0 + c * h_xi) + lambda / math::kSqrt2 * xi;
    }

    double operator()(double theta) const {
        const double c = std::cos(theta), s = std::sin(theta);
        const double h_c = h_interp(xi * c);
        double g, cotg_g;
        if (theta < eps) {
            cotg_g = patch();
            g = cotg_g * s;
        } else {
            const double sc = params.sigma_hat * math::kSqrt2;
            g = log_ratio(sc, h_xi, h_c) / (sc * xi * s) +
                lambda / math::kSqrt2 * xi * s;
            cotg_g = (c / s) * g;
        }
        const double expo = -params.r * xi * xi * s * s - g * g;
        return (xi * c - 2.0 * h_c * cotg_g) * std::exp(expo);
    }
};

// The limit substitution must cover every theta for which xi cos(theta) falls
// inside the grid cell adjacent to xi: there the finite-difference ratio in
// g_H samples sub-cell variation of the interpolant, which the singular
// cot(theta) factor amplifies into a node-scale instability of the fixed
// point. Below the first-cell angle the limit formula (exact up to O(theta^2))
// sees only the smooth slope.
double patch_threshold(double xi, double dxi, double eps) {
    if (xi <= dxi) return 0.5 * math::kPi;
    return std::max(eps, std::acos(1.0 - dxi / xi));
}

double f_term(const MarketParams& params, double xi, double h_xi, double lambda) {
    const double sc = params.sigma_hat * math::kSqrt2;
    const double g_half_pi = std::log1p(sc * h_xi) / (sc * xi) + lambda / math::kSqrt2 * xi;
    const double shift = g_half_pi + std::log(params.r / params.q) / (xi * sc);
    const double expo = -params.r * xi * xi - shift * shift;
    if (expo < -700.0) return 0.0;
    return std::exp(expo) / (2.0 * params.r * kSqrtPi * xi);
}

}  // namespace

BoundaryFunctionH BoundaryFunctionH::linear_ansatz(const MarketParams& params, int n) {
    BoundaryFunctionH out;
    out.lambda = lambda_of(params);
    out.xi.resize(n + 1);
    out.h.resize(n + 1);
    const double dxi = std::sqrt(params.T) / n;
    for (int i = 0; i <= n; ++i) {
        out.xi[i] = i * dxi;
        out.h[i] = 0.451381 * out.xi[i];
    }
    return out;
}

BoundaryFunctionH iterate_boundary(const BoundaryFunctionH& h, const MarketParams& params,
                                   const QuadratureConfig& quad) {
    const int n = static_cast<int>(h.xi.size()) - 1;
    const double dxi = h.xi[1] - h.xi[0];
    BoundaryFunctionH out = h;
    out.h[0] = 0.0;

    for (int i = 1; i <= n; ++i) {
        const double xi = h.xi[i];
        double hp;
        if (i == n)
            hp = (3.0 * h.h[n] - 4.0 * h.h[n - 1] + h.h[n - 2]) / (2.0 * dxi);
        else
            hp = (h.h[i + 1] - h.h[i - 1]) / (2.0 * dxi);

        const double eps_i = patch_threshold(xi, dxi, quad.theta_eps);
        ThetaIntegrand f{params, h.h, dxi, xi, h.h[i], hp, h.lambda, eps_i};

        // Strip (0, eps) contributes its theta -> 0 limit times eps; the
        // composite rule covers the rest of (0, pi/2).
        const double strip = quad.theta_eps * (xi - 2.0 * h.h[i] * f.patch());
        const double integral = math::gauss_legendre_composite(
            f, quad.theta_eps, 0.5 * math::kPi, quad.panels);
        const double value = f_term(params, xi, h.h[i], h.lambda) +
                             (strip + integral) / kSqrtPi;
        if (!std::isfinite(value))
            throw NumericError("iterate_boundary: non-finite value at xi=" +
                               std::to_string(xi));
        out.h[i] = value;
    }
    return out;
}

namespace {

// Backward least-squares slope over the trailing sqrt(xi/dxi) cells. The
// limit patch multiplies the slope by an O(sqrt(dxi))-wide window, so a fixed
// small stencil would amplify node-scale noise by O(1/sqrt(dxi)) and
// destabilize the march on fine grids; the square-root stencil keeps the
// noise gain mesh-independent while its O(sqrt(dxi)) slope bias stays within
// the scheme's first-order consistency.
double trailing_slope(int i, const std::vector<double>& work, double dxi) {
    // xi_i / dxi = i, so the stencil is ceil(sqrt(i)) cells
    const int k = std::clamp(static_cast<int>(std::ceil(std::sqrt(double(i)))), 2, i);
    // fit h ~ a + b (xi - xi_i) over nodes i-k..i
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = i - k; j <= i; ++j) {
        const double x = (j - i) * dxi;
        sw += 1.0;
        sx += x;
        sy += work[j];
        sxx += x * x;
        sxy += x * work[j];
    }
    return (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
}

// Nodal residual evaluation for the sweep solver: the operator value at node
// i with the trial value y substituted for H(xi_i). The equation is Volterra
// in xi (the integrand samples H only at xi cos(theta) <= xi), so an
// ascending sweep with the node equation solved implicitly is a direct
// solver.
double eval_node(int i, double y, std::vector<double>& work,
                 const BoundaryFunctionH& base, const MarketParams& params,
                 const QuadratureConfig& quad) {
    const double dxi = base.xi[1] - base.xi[0];
    const double xi = base.xi[i];
    work[i] = y;
    const double hp = trailing_slope(i, work, dxi);

    const double eps_i = patch_threshold(xi, dxi, quad.theta_eps);
    ThetaIntegrand f{params, work, dxi, xi, y, hp, base.lambda, eps_i};
    const double strip = quad.theta_eps * (xi - 2.0 * y * f.patch());
    const double integral =
        math::gauss_legendre_composite(f, quad.theta_eps, 0.5 * math::kPi, quad.panels);
    const double value =
        f_term(params, xi, y, base.lambda) + (strip + integral) / kSqrtPi;
    if (!std::isfinite(value))
        throw NumericError("solve_boundary: non-finite operator value at xi=" +
                           std::to_string(xi));
    return value;
}

// Scalar fixed point y = F(y) at one node by secant iteration on y - F(y).
// Trials are clamped to the admissible range (H >= 0 and the boundary stays
// below a generous multiple of its start) so the kernel logarithms stay
// defined along the way.
// The nodal residual y - F(y) is monotone increasing in y (the operator's
// self-coupling keeps F' < 1) but develops a sharp elbow on fine grids, so an
// unguarded secant can bounce. Bracket the root first, then run secant
// safeguarded by bisection.
double solve_node(int i, double y0, std::vector<double>& work,
                  const BoundaryFunctionH& base, const MarketParams& params,
                  const QuadratureConfig& quad, double tol) {
    const double cap = 10.0 * (1.0 + base.xi.back()) / params.sigma_hat;
    const auto residual = [&](double y) {
        return eval_node(i, y, work, base, params, quad) - y;
    };

    double ya = std::clamp(y0, 0.0, cap);
    double fa = residual(ya);
    if (std::abs(fa) < tol) return ya;

    // expand toward the sign change: positive residual means the root lies
    // to the right
    double lo, hi, flo, fhi;
    double step = std::max(std::abs(fa), 1e-3);
    double yb = ya, fb = fa;
    bool bracketed = false;
    for (int tries = 0; tries < 80; ++tries) {
        const double yc = std::clamp(fb > 0.0 ? yb + step : yb - step, 0.0, cap);
        const double fc = residual(yc);
        if (std::abs(fc) < tol) return yc;
        if ((fb > 0.0) != (fc > 0.0)) {
            lo = std::min(yb, yc);
            hi = std::max(yb, yc);
            flo = (yb < yc) ? fb : fc;
            fhi = (yb < yc) ? fc : fb;
            bracketed = true;
            break;
        }
        if (yc == 0.0 || yc == cap)
            throw ConvergenceError("solve_boundary: nodal residual has no sign change "
                                   "at xi=" + std::to_string(base.xi[i]),
                                   std::abs(fc));
        yb = yc;
        fb = fc;
        step *= 2.0;
    }
    if (!bracketed)
        throw ConvergenceError("solve_boundary: could not bracket the node root at xi=" +
                                   std::to_string(base.xi[i]),
                               std::abs(fb));

    double best = (std::abs(flo) < std::abs(fhi)) ? lo : hi;
    double fbest = std::min(std::abs(flo), std::abs(fhi));
    for (int it = 0; it < 80 && fbest >= tol; ++it) {
        double yc = (fhi != flo) ? hi - fhi * (hi - lo) / (fhi - flo)
                                 : 0.5 * (lo + hi);
        const double margin = 0.01 * (hi - lo);
        if (!(yc > lo + margin && yc < hi - margin)) yc = 0.5 * (lo + hi);
        const double fc = residual(yc);
        if ((fc > 0.0) == (flo > 0.0)) {
            lo = yc;
            flo = fc;
        } else {
            hi = yc;
            fhi = fc;
        }
        if (std::abs(fc) < fbest) {
            fbest = std::abs(fc);
            best = yc;
        }
        if (hi - lo < 1e-15 * (1.0 + hi)) break;
    }
    return best;
}

}  // namespace

IntegralSolveResult solve_boundary(const MarketParams& params,
                                   const IntegralSolveConfig& cfg) {
    params.validate_call();
    IntegralSolveResult res;
    res.h = BoundaryFunctionH::linear_ansatz(params, cfg.n);
    const double node_tol = 0.01 * cfg.tol;

    double change = 0.0;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        std::vector<double> work = res.h.h;
        change = 0.0;
        for (int i = 1; i < static_cast<int>(work.size()); ++i) {
            double y = solve_node(i, work[i], work, res.h, params, cfg.quad, node_tol);
            if (cfg.relaxation != 1.0) y = res.h.h[i] + cfg.relaxation * (y - res.h.h[i]);
            work[i] = y;
            change = std::max(change, std::abs(y - res.h.h[i]));
        }
        res.h.h = std::move(work);
        if (change < cfg.tol) {
            ++it;
            break;
        }
    }
    if (change >= cfg.tol)
        throw ConvergenceError("solve_boundary: no fixed point after " +
                                   std::to_string(cfg.max_iters) +
                                   " iterations, last change " + std::to_string(change),
                               change);
    res.iterations = it;
    res.final_change = change;

    const double rho0 = params.rho0_call();
    const double sc = params.sigma_hat * math::kSqrt2;
    res.curve.taus.resize(res.h.xi.size());
    res.curve.rhos.resize(res.h.xi.size());
    for (std::size_t i = 0; i < res.h.xi.size(); ++i) {
        res.curve.taus[i] = res.h.xi[i] * res.h.xi[i];
        res.curve.rhos[i] = rho0 * (1.0 + sc * res.h.h[i]);
    }
    return res;
}

namespace {

double erf_diff(double x, double y) { return std::erf(x + y) - std::erf(x); }

struct Kernels {
    double i1 = 0.0, i2 = 0.0;
};

// Closed-form kernels of the pricing formula; t is the elapsed kernel time
// (tau for the initial-datum term, tau - s inside the integral).
Kernels eval_kernels(double A, double L, double t, const MarketParams& p) {
    const double sc = p.sigma_hat * std::sqrt(2.0 * t);
    const double s2 = p.sigma_hat * p.sigma_hat;
    const double e_r = std::exp(-p.r * t);
    const double e_m = std::exp(-(p.r - 0.5 * s2) * t);
    const double m_minus = erf_diff((-A - s2 * t) / sc, L / sc);
    const double m_plus = erf_diff((A - s2 * t) / sc, L / sc);
    Kernels k;
    k.i1 = 0.5 * e_m * (std::exp(A) * m_minus - std::exp(-A) * m_plus);
    k.i2 = 0.5 * e_r * std::exp(L) * erf_diff((A - L) / sc, 2.0 * L / sc) -
           0.5 * e_m * (std::exp(A) * m_minus + std::exp(-A) * m_plus);
    return k;
}

}  // namespace

PriceResult price_call_semi_explicit(double S, double tau, const BoundaryCurve& curve,
                                     const MarketParams& params, double int_tol) {
    if (!(S > 0.0)) throw InvalidParams("price_call_semi_explicit: S must be > 0");
    if (tau < 0.0 || tau > curve.taus.back() * (1.0 + 1e-12))
        throw InvalidParams("price_call_semi_explicit: tau outside solved range");
    if (tau == 0.0) return {std::max(S - params.E, 0.0), S >= params.E};

    const double rho_tau = curve.rho_at(tau);
    if (S > rho_tau) return {S - params.E, true};

    const double drift = params.r - params.q - 0.5 * params.sigma_hat * params.sigma_hat;
    const double L = std::log(rho_tau / S);
    const double A0 = std::log(rho_tau / curve.front()) + drift * tau;

    const Kernels head = eval_kernels(A0 + std::log(params.r / params.q), L, tau, params);

    // s-integral with the square-root endpoint removed by s = tau - u^2.
    const auto integrand_u = [&](double u) -> double {
        if (u == 0.0) return 0.0;
        const double s = tau - u * u;
        const double t = u * u;
        const double rho_s = curve.rho_at(s);
        const double A = std::log(rho_tau / rho_s) + drift * t;
        const Kernels k = eval_kernels(A, L, t, params);
        return 2.0 * u *
               (params.r * params.E * k.i2 + (params.r * params.E - params.q * rho_s) * k.i1);
    };
    const double tail =
        math::adaptive_simpson(integrand_u, 0.0, std::sqrt(tau), int_tol * params.E);

    const double value = S - params.E + S / rho_tau * (params.E * head.i2 + tail);
    if (!std::isfinite(value))
        throw NumericError("price_call_semi_explicit: non-finite price at S=" +
                           std::to_string(S));
    return {value, false};
}

double put_boundary_asymptotic(double tau, const MarketParams& params) {
    params.validate();
    if (params.q != 0.0)
        throw InvalidParams("put_boundary_asymptotic: derived for q = 0 only");
    if (tau < 0.0) throw DomainError("put_boundary_asymptotic: tau must be >= 0");
    if (tau == 0.0) return params.E;

    const double arg = 2.0 * params.r / params.sigma_hat *
                       std::sqrt(2.0 * math::kPi * tau) * std::exp(params.r * tau);
    if (arg >= 1.0)
        throw DomainError(
            "put_boundary_asymptotic: valid only near expiry; log argument " +
            std::to_string(arg) + " >= 1 at tau=" + std::to_string(tau));
    const double eta = -std::sqrt(-std::log(arg));
    const double s2 = params.sigma_hat * params.sigma_hat;
    return params.E * std::exp(-(params.r - 0.5 * s2) * tau) *
           std::exp(params.sigma_hat * std::sqrt(2.0 * tau) * eta);
}

}  // namespace fbound
