#pragma once

#include <vector>

#include "fbound/boundary_curve.hpp"
#include "fbound/market.hpp"

namespace fbound {

// American floating-strike Asian call after the similarity reduction x = S/A.
// Everything is dimensionless: Pi lives in [-1, 0] and the boundary rho in
// units of the running average. The transformed equation carries the
// space-dependent drift (rho e^{-xi} - 1)/(T - tau) and the reaction
// r + 1/(T - tau), both singular at the horizon; the march therefore stops
// one step short of tau = T.
struct AsianConfig {
    int n = 100;
    long m = 10000;
    double L = 3.0;
    double micro_tol = 1e-7;
    int micro_max = 50;
    double blowup_guard = 0.5;  // max |rho step| per level

    void validate() const;
};

struct AsianDiagnostics {
    double min_pi = 0.0;
    double max_pi = 0.0;
    double min_rho = 0.0;
    int max_micro = 0;
    double mean_micro = 0.0;
    long negative_drift_levels = 0;  // levels where the transport shift < 0
};

struct AsianResult {
    std::vector<double> xi;
    BoundaryCurve boundary;        // rho at tau_j = j k, j = 0..m-1
    std::vector<double> final_pi;  // level at tau = T (1 - 1/m)
    double final_tau = 0.0;
    AsianDiagnostics diag;
    MarketParams params;
};

// rho(0) = (1 + rT)/(1 + qT); requires r > q >= 0.
double asian_initial_boundary(const MarketParams& params);

// Nonlocal constraint from the one-sided slope at xi = 0:
//   rho = (1 + r(T-tau) + (T-tau)(sigma^2/2) (Pi_1 - Pi_0)/h) / (1 + q(T-tau)).
// Throws DomainError at tau >= T where the constraint degenerates.
double asian_boundary_constraint(const std::vector<double>& pi, const MarketParams& params,
                                 double tau, double h);

struct AsianLevelState {
    std::vector<double> pi;
    double rho = 0.0;
};

// One operator-splitting level with micro-iterations; returns the iterate
// count. tau is the target level time, k the step. rho_predicted > 0 seeds
// the first iterate's boundary value (the march extrapolates from the two
// previous levels).
int asian_advance(const AsianLevelState& prev, AsianLevelState& next,
                  const MarketParams& params, const AsianConfig& cfg, double tau,
                  double k, AsianDiagnostics* diag, double rho_predicted = 0.0);

AsianResult asian_solve(const MarketParams& params, const AsianConfig& cfg = {});

}  // namespace fbound
