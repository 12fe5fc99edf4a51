#pragma once

#include <vector>

#include "fbound/boundary_curve.hpp"
#include "fbound/market.hpp"

namespace fbound {

// theta-integral settings for the boundary fixed point. The integrand has a
// removable singularity at theta = 0: below theta_eps the product
// cotg(theta) g_H is replaced by its limit
//   H'(xi) / (2 (1 + sigma sqrt(2) H(xi))) + (Lambda/sqrt(2)) xi.
struct QuadratureConfig {
    int panels = 64;
    double theta_eps = 1e-5;
};

// Auxiliary boundary function H on a uniform grid over [0, sqrt(T)]; the
// boundary is recovered as rho(tau) = (rE/q)(1 + sigma sqrt(2) H(sqrt(tau))).
struct BoundaryFunctionH {
    std::vector<double> xi;
    std::vector<double> h;
    double lambda = 0.0;  // (r - q)/sigma - sigma/2

    static BoundaryFunctionH linear_ansatz(const MarketParams& params, int n);
};

struct IntegralSolveConfig {
    int n = 100;            // spatial intervals on [0, sqrt(T)]
    double tol = 1e-8;      // max-node change stopping criterion
    int max_iters = 20;
    double relaxation = 1.0;  // 1 = plain fixed point
    QuadratureConfig quad;
};

struct IntegralSolveResult {
    BoundaryFunctionH h;
    BoundaryCurve curve;
    int iterations = 0;
    double final_change = 0.0;
};

// One application of the nonlinear integral operator: evaluates the
// theta-integral at every grid node of H and returns the next iterate.
BoundaryFunctionH iterate_boundary(const BoundaryFunctionH& h, const MarketParams& params,
                                   const QuadratureConfig& quad);

// Fixed-point solve starting from the first-order ansatz H(xi) = 0.451381 xi.
// Requires r > q > 0. Throws ConvergenceError when max_iters is exhausted.
IntegralSolveResult solve_boundary(const MarketParams& params,
                                   const IntegralSolveConfig& cfg = {});

// Semi-explicit American call price from a solved boundary curve: the
// closed-form kernels I1, I2 plus a time integral against the stored rho.
// For S > rho(tau) returns the intrinsic value flagged as exercise region.
PriceResult price_call_semi_explicit(double S, double tau, const BoundaryCurve& curve,
                                     const MarketParams& params, double int_tol = 1e-9);

// Near-expiry asymptotic of the American put boundary (no dividends):
//   rho(tau) = E exp(-(r - sigma^2/2) tau) exp(sigma sqrt(2 tau) eta(tau)),
//   eta(tau) = -sqrt(-ln((2r/sigma) sqrt(2 pi tau) e^{r tau})).
// Valid while the inner log argument stays below 1; throws DomainError
// otherwise.
double put_boundary_asymptotic(double tau, const MarketParams& params);

}  // namespace fbound
