#pragma once

#include <variant>

#include "fbound/market.hpp"

namespace fbound {

// Nonlinear volatility families. Throughout, the curvature argument is
// p = S^2 * d2V/dS2 (the x-gradient of the transformed portfolio), S is the
// asset price and tau the time to expiry.

struct ConstantVol {};

// sigma_hat^2 (1 + Le * sgn(p)); sgn(0) taken as 0.
struct LelandVol {
    double Le = 0.0;
};

// Uncertain-volatility band: sigma2 applies where the price is convex
// (p >= 0, including the inert p = 0 point), sigma1 elsewhere.
struct AvellanedaVol {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

// sigma_hat^2 (1 + mu (p/S)^(1/3)) with the signed cube root.
struct RapmVol {
    double mu = 0.0;

    // mu = 3 (C^2 R / 2 pi)^(1/3) from the transaction-cost and risk-premium
    // coefficients.
    static RapmVol from_costs(double C, double R);
};

// sigma_hat^2 (1 + Psi(a^2 e^(r tau) p)).
struct BarlesSonerVol {
    double a = 0.0;
};

// sigma_hat^2 (1 - rho_fb * lambda * p/S)^(-2) with a constant liquidity
// factor lambda >= 1 standing in for the model's unspecified convex lambda(S).
// Exposed as a volatility only; parabolicity may fail and is checked by
// callers via parabolicity_margin.
struct FreyStremmeVol {
    double rho_fb = 0.0;
    double lambda = 1.0;
};

using VolatilitySpec = std::variant<ConstantVol, LelandVol, AvellanedaVol, RapmVol,
                                    BarlesSonerVol, FreyStremmeVol>;

void validate(const VolatilitySpec& spec);

// Model variance sigma^2(p, S, tau). Throws SingularVolatilityError when the
// Frey-Stremme denominator is non-positive.
double sigma_squared(const VolatilitySpec& spec, const MarketParams& params, double p,
                     double S, double tau);

// Parabolicity indicator sigma^2 + p d(sigma^2)/dp; the transformed equation
// stays parabolic while this is positive. Closed-form derivatives where the
// branch is smooth, a centered difference (one-sided at the p=0 edge) for
// Barles-Soner, and the right limit at the Leland kink.
double parabolicity_margin(const VolatilitySpec& spec, const MarketParams& params,
                           double p, double S, double tau);

// Signed power |u|^(pexp-1) u; odd in u.
double signed_power(double u, double pexp);

// True when the solver should clamp negative curvature to zero before
// evaluating sigma^2 (the Barles-Soner Psi is defined for nonnegative
// arguments only; tiny negative p arises from rounding).
bool clamps_curvature(const VolatilitySpec& spec);

const char* model_name(const VolatilitySpec& spec);

}  // namespace fbound
