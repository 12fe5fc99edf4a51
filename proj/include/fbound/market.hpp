#pragma once

#include <cmath>
#include <string>

#include "fbound/errors.hpp"

namespace fbound {

// Contract and market constants shared by every solver.
//   r         risk-free rate (1/year)
//   q         continuous dividend yield (1/year)
//   E         strike (currency)
//   T         expiry (years)
//   sigma_hat base volatility (1/sqrt(year))
struct MarketParams {
    double r = 0.1;
    double q = 0.05;
    double E = 10.0;
    double T = 1.0;
    double sigma_hat = 0.2;

    void validate() const {
        if (!(r > 0.0)) throw InvalidParams("MarketParams: r must be > 0");
        if (!(q >= 0.0)) throw InvalidParams("MarketParams: q must be >= 0");
        if (!(E > 0.0)) throw InvalidParams("MarketParams: E must be > 0");
        if (!(T > 0.0)) throw InvalidParams("MarketParams: T must be > 0");
        if (!(sigma_hat > 0.0)) throw InvalidParams("MarketParams: sigma_hat must be > 0");
    }

    // Call solvers rest on the structural assumption 0 < q < r: the free
    // boundary then starts from the finite value rE/q.
    void validate_call() const {
        validate();
        if (!(q > 0.0 && q < r))
            throw InvalidParams(
                "MarketParams: call free-boundary solvers require 0 < q < r "
                "(got r=" + std::to_string(r) + ", q=" + std::to_string(q) + ")");
    }

    double rho0_call() const { return r * E / q; }
};

}  // namespace fbound
