#pragma once

#include <vector>

#include "fbound/boundary_curve.hpp"
#include "fbound/market.hpp"

namespace fbound {

enum class Payoff { Call, Put };
enum class Style { European, American };

// Closed-form European Black-Scholes price with continuous dividend yield.
// Degenerate volatility or expiry falls back to the discounted-forward limit.
double bs_european_price(double S, const MarketParams& params, double tau, Payoff payoff);

// Implied volatility by bisection against the closed form.
double bs_implied_vol(double price, double S, const MarketParams& params, double tau,
                      Payoff payoff);

struct LatticeConfig {
    int steps = 1000;
    Style style = Style::American;
    Payoff payoff = Payoff::Call;
};

struct LatticeResult {
    double price = 0.0;
    // Early-exercise boundary estimate per level, refined by interpolating the
    // zero crossing of (continuation - intrinsic) between adjacent nodes.
    BoundaryCurve boundary;
};

// Cox-Ross-Rubinstein binomial lattice with dividend yield.
LatticeResult binomial_price(double S, const MarketParams& params, const LatticeConfig& cfg);

struct PsorConfig {
    int n = 200;          // spatial intervals on the log-price grid
    int m = 200;          // backward Euler time levels
    double omega = 1.2;   // relaxation factor
    double tol = 1e-8;    // sweep tolerance (absolute, currency)
    int max_sweeps = 20000;
    double x_lo = 0.0, x_hi = 0.0;  // 0,0 = auto around ln(E)
    Payoff payoff = Payoff::Call;
};

struct PsorResult {
    std::vector<double> S;
    std::vector<double> V;
    BoundaryCurve boundary;
    double max_lcp_residual = 0.0;  // on the k-scaled system
    int max_sweeps_used = 0;

    double value_at(double spot) const;
};

// Projected SOR on the backward-Euler linear complementarity formulation;
// constant volatility only.
PsorResult psor_price(const MarketParams& params, const PsorConfig& cfg = {});

// Barone-Adesi / Whaley quadratic approximation. The q = 0 call degenerates
// to the European value (early exercise never optimal).
double baw_price(double S, const MarketParams& params, double tau, Payoff payoff);

}  // namespace fbound
