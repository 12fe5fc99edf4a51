#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fbound/errors.hpp"

namespace fbound::math {

// Thomas algorithm for a x = d with a tridiagonal matrix given by its
// sub/main/super diagonals (lower[0] and upper[n-1] are ignored).
// Overwrites x. No pivoting; callers assemble diagonally dominant systems.
inline void solve_tridiagonal(std::span<const double> lower,
                              std::span<const double> diag,
                              std::span<const double> upper,
                              std::span<const double> rhs,
                              std::span<double> x,
                              std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    if (n == 0) return;

    double piv = diag[0];
    if (piv == 0.0 || !std::isfinite(piv))
        throw NumericError("tridiagonal solve: zero/non-finite pivot at row 0");
    scratch[0] = upper[0] / piv;
    x[0] = rhs[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = diag[i] - lower[i] * scratch[i - 1];
        if (piv == 0.0 || !std::isfinite(piv))
            throw NumericError("tridiagonal solve: zero/non-finite pivot at row " +
                               std::to_string(i));
        scratch[i] = upper[i] / piv;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i] * x[i + 1];
}

}  // namespace fbound::math
