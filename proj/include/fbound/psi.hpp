#pragma once

#include <vector>

#include "fbound/math/interp.hpp"

namespace fbound {

// Tabulated solution of the risk-aversion correction ODE
//
//   Psi'(x) = (Psi(x) + 1) / (2 sqrt(x Psi(x)) - x),   Psi(0) = 0,
//
// which behaves like (3/2)^(2/3) x^(1/3) as x -> 0 and grows linearly as
// x -> infinity. The ODE is singular at x = 0, so the table is built by
// starting from the two-term small-x series at x0 = 1e-12 and integrating
// in log(x) with a high-order stepper up to x = 1e8. Values are stored on
// a uniform log grid and interpolated with a monotone cubic in
// (log x, log Psi), which keeps the lookup positive and nondecreasing.
// Outside the table the series (left) and a linear extension with the ODE
// slope (right) are used.
class PsiTable {
public:
    static constexpr double kXMin = 1e-12;
    static constexpr double kXMax = 1e8;
    static constexpr int kNodes = 2048;

    PsiTable();

    // Psi(x) for x >= 0; throws DomainError for x < 0.
    double value(double x) const;

    // Psi'(x) from the ODE right-hand side evaluated with the tabulated Psi.
    double derivative(double x) const;

    // Shared immutable instance, built on first use.
    static const PsiTable& shared();

    const std::vector<double>& abscissae() const { return xs_; }
    const std::vector<double>& values() const { return vals_; }

    // Leading small-x series coefficients: Psi ~ c1 x^(1/3) + c2 x^(2/3).
    static double series_c1();
    static double series_c2();

private:
    std::vector<double> xs_;    // log-spaced abscissae
    std::vector<double> vals_;  // Psi at the abscissae
    math::MonotoneCubic loglog_;
    double u0_ = 0.0, du_ = 0.0;  // uniform grid in u = ln x
    double right_slope_ = 1.0;    // Psi'(xmax) for the linear patch
};

// Convenience lookup against the shared table.
double psi(double x);

}  // namespace fbound
