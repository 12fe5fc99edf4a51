#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fbound/boundary_curve.hpp"
#include "fbound/market.hpp"
#include "fbound/volatility.hpp"

namespace fbound {

// Mesh and iteration settings for the transformed free-boundary march.
// paper_profile reproduces the reference runs; ci_profile is the fast
// configuration used by the continuous test suite.
struct SolverConfig {
    int n = 200;             // spatial intervals on [0, L]
    long m = 20000;          // time levels
    double L = 3.0;          // truncated domain length, must exceed ln(r/q)
    double micro_tol = 1e-7; // per-level fixed-point tolerance
    int micro_max = 50;
    long snapshot_stride = 0;  // 0 = keep only the final level

    static SolverConfig paper_profile() { return {750, 225000, 3.0, 1e-7, 50, 0}; }
    static SolverConfig ci_profile() { return {200, 20000, 3.0, 1e-7, 50, 0}; }

    void validate(const MarketParams& params) const;
};

struct PdeDiagnostics {
    double min_pi = 0.0;       // most negative node over the whole march
    double max_pi = 0.0;       // most positive node over the whole march
    double min_rho_step = 0.0; // most negative per-level rho increment
    int max_micro = 0;
    double mean_micro = 0.0;
    long dominance_warnings = 0;  // tridiagonal rows failing |b| >= |a|+|c|
    int worst_dominance_row = -1;
};

// Transformed synthetic-portfolio field on the fixed rectangle, with the
// attached boundary curve. A full surface at paper resolution would not fit
// in memory, so levels are stored at snapshot_stride (final level always).
struct PortfolioSurface {
    std::vector<double> x;
    BoundaryCurve boundary;                  // rho at every time level
    std::vector<std::pair<double, std::vector<double>>> levels;  // (tau, Pi)
    PdeDiagnostics diag;
    MarketParams params;

    const std::vector<double>& level_at(double tau, double tol) const;
};

// Level-0 data: Pi = -E below ln(r/q), 0 elsewhere; rho(0) = rE/q.
std::vector<double> initial_portfolio(const MarketParams& params, const SolverConfig& cfg);

// Characteristics solution of the convective half-step: shifts the previous
// level by ln(rho_new/rho_prev) + (r-q)k, filling `fill` on the left of the
// domain and 0 on the right. Linear interpolation between nodes.
std::vector<double> transport_step(const std::vector<double>& prev, double rho_prev,
                                   double rho_new, const MarketParams& params, double k,
                                   double h, double fill);

// Implicit diffusive half-step: solves the tridiagonal system with volatility
// evaluated on the supplied lagged level. Returns the new level including the
// Dirichlet ends. Dominance violations are counted into diag.
std::vector<double> diffusion_step(const std::vector<double>& half,
                                   const std::vector<double>& lagged_pi, double rho,
                                   const MarketParams& params, const VolatilitySpec& spec,
                                   double k, double h, double tau, PdeDiagnostics* diag);

// Nonlocal algebraic constraint rho = rE/q + sigma^2 * dPi/dx(0) / (2q) with
// the one-sided slope; rho_lagged feeds volatility families that depend on
// S = rho e^{-x}.
double boundary_constraint(const std::vector<double>& pi, const MarketParams& params,
                           const VolatilitySpec& spec, double tau, double h,
                           double rho_lagged);

struct TimeLevelState {
    std::vector<double> pi;
    double rho = 0.0;
};

// One backward-Euler level resolved by micro-iterations
// {rho update -> transport -> tridiagonal solve}; returns the iterate count.
// rho_predicted > 0 seeds the first iterate's boundary value (the march uses
// linear extrapolation from the previous two levels, which leaves most levels
// converged after two sweeps); <= 0 starts from the previous level per the
// plain scheme.
int advance_time_level(const TimeLevelState& prev, TimeLevelState& next,
                       const MarketParams& params, const VolatilitySpec& spec,
                       const SolverConfig& cfg, double tau, double k,
                       PdeDiagnostics* diag, double rho_predicted = 0.0);

// Full march over j = 1..m.
PortfolioSurface solve_free_boundary(const MarketParams& params, const VolatilitySpec& spec,
                                     const SolverConfig& cfg);

// Option price recovered from a stored level:
//   V = (S/rho) (rho - E + int_0^{ln(rho/S)} e^x Pi dx).
PriceResult recover_price(const PortfolioSurface& surface, double S, double tau);

// Experimental orders of convergence from consecutive (h, err) pairs.
std::vector<double> eoc(const std::vector<std::pair<double, double>>& errors);

// Boundary distance in the max and L2(dtau) norms between a solved curve and
// a reference, sampled on the curve's own time levels.
struct CurveDistance {
    double linf = 0.0;
    double l2 = 0.0;
};
CurveDistance boundary_distance(const BoundaryCurve& curve, const BoundaryCurve& reference);

}  // namespace fbound
