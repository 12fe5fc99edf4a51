#pragma once

#include <functional>
#include <vector>

#include "fbound/integral_eq.hpp"
#include "fbound/pde_solver.hpp"

namespace fbound {

// Convergence study of the PDE boundary against a reference curve. The time
// step is CFL-matched to each mesh, sigma_hat^2 k / h^2 ~ 1/2.
struct EocRow {
    double h = 0.0;
    int n = 0;
    long m = 0;
    double err_linf = 0.0;
    double err_l2 = 0.0;
    double eoc_linf = 0.0;  // NaN on the first row
    double eoc_l2 = 0.0;
};

std::vector<EocRow> eoc_study(const MarketParams& params, const std::vector<double>& meshes,
                              const BoundaryCurve& reference, double L = 3.0,
                              int threads = 1);

// Deviation of nonlinear-model boundaries from the constant-volatility
// reference, one row per model parameter value.
struct ScalingRow {
    double value = 0.0;
    double dist_linf = 0.0;
    double dist_l2 = 0.0;
};

std::vector<ScalingRow> boundary_deviation_sweep(
    const MarketParams& params, const std::function<VolatilitySpec(double)>& make_spec,
    const std::vector<double>& values, const SolverConfig& cfg, int threads = 1);

// Least-squares slope of ln(y) against ln(x).
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Worker pool sized by the explicit argument, else FBOUND_THREADS, else the
// hardware concurrency.
int resolve_threads(int requested);
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace fbound
