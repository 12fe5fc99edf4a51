#pragma once

#include <cstddef>
#include <vector>

#include "fbound/math/interp.hpp"

namespace fbound {

// Discretized early exercise boundary rho(tau) = S_f(T - tau) on a time grid.
struct BoundaryCurve {
    std::vector<double> taus;
    std::vector<double> rhos;

    double rho_at(double tau) const { return math::lerp_sorted(taus, rhos, tau); }

    double front() const { return rhos.front(); }
    double back() const { return rhos.back(); }
    std::size_t size() const { return taus.size(); }
};

// Price with an exercise-region flag: in the exercise region the value is the
// intrinsic payoff and is reported distinctly rather than as an error.
struct PriceResult {
    double value = 0.0;
    bool early_exercise = false;
};

}  // namespace fbound
