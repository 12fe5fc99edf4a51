#include "fbound/psi.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fbound/errors.hpp"

namespace fbound {

namespace {

// d(Psi)/du with u = ln x; smooth in u across the whole table range.
double ode_rhs_log(double u, double p) {
    const double x = std::exp(u);
    return x * (p + 1.0) / (2.0 * std::sqrt(x * p) - x);
}

}  // namespace

double PsiTable::series_c1() { return std::pow(1.5, 2.0 / 3.0); }

double PsiTable::series_c2() {
    const double c = series_c1();
    return 0.6 * (std::sqrt(c) + 0.5 / c);
}

PsiTable::PsiTable() {
    xs_.resize(kNodes);
    vals_.resize(kNodes);
    const double u_lo = std::log(kXMin);
    const double u_hi = std::log(kXMax);
    u0_ = u_lo;
    du_ = (u_hi - u_lo) / (kNodes - 1);

    const double c1 = series_c1(), c2 = series_c2();
    double p = c1 * std::cbrt(kXMin) + c2 * std::cbrt(kXMin * kXMin);
    xs_[0] = kXMin;
    vals_[0] = p;

    constexpr int kSubsteps = 32;
    for (int i = 1; i < kNodes; ++i) {
        const double ua = u_lo + (i - 1) * du_;
        const double h = du_ / kSubsteps;
        for (int s = 0; s < kSubsteps; ++s) {
            const double u = ua + s * h;
            const double k1 = ode_rhs_log(u, p);
            const double k2 = ode_rhs_log(u + 0.5 * h, p + 0.5 * h * k1);
            const double k3 = ode_rhs_log(u + 0.5 * h, p + 0.5 * h * k2);
            const double k4 = ode_rhs_log(u + h, p + h * k3);
            p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        xs_[i] = std::exp(u_lo + i * du_);
        vals_[i] = p;
    }

    std::vector<double> us(kNodes), lps(kNodes);
    for (int i = 0; i < kNodes; ++i) {
        us[i] = u_lo + i * du_;
        lps[i] = std::log(vals_[i]);
    }
    loglog_ = math::MonotoneCubic(std::move(us), std::move(lps));

    const double xm = xs_.back(), pm = vals_.back();
    right_slope_ = (pm + 1.0) / (2.0 * std::sqrt(xm * pm) - xm);
}

double PsiTable::value(double x) const {
    if (x < 0.0)
        throw DomainError("psi: argument must be nonnegative, got " + std::to_string(x));
    if (x == 0.0) return 0.0;
    if (x < kXMin) return series_c1() * std::cbrt(x) + series_c2() * std::cbrt(x * x);
    if (x > kXMax) return vals_.back() + right_slope_ * (x - kXMax);
    return std::exp(loglog_(std::log(x)));
}

double PsiTable::derivative(double x) const {
    if (x < 0.0) throw DomainError("psi: derivative argument must be nonnegative");
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    const double p = value(x);
    return (p + 1.0) / (2.0 * std::sqrt(x * p) - x);
}

const PsiTable& PsiTable::shared() {
    static const PsiTable table;
    return table;
}

double psi(double x) { return PsiTable::shared().value(x); }

}  // namespace fbound
