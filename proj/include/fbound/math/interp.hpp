#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace fbound::math {

// Linear interpolation of values sampled on a uniform grid x_i = x0 + i*h,
// clamped to the end values outside the grid.
inline double lerp_uniform(const std::vector<double>& values, double x0, double h,
                           double x) {
    const std::size_t n = values.size();
    if (n == 1) return values[0];
    const double t = (x - x0) / h;
    if (t <= 0.0) return values.front();
    if (t >= static_cast<double>(n - 1)) return values.back();
    const auto i = static_cast<std::size_t>(t);
    const double w = t - static_cast<double>(i);
    return values[i] + w * (values[i + 1] - values[i]);
}

// Linear interpolation on a strictly increasing abscissa vector, clamped.
inline double lerp_sorted(const std::vector<double>& xs, const std::vector<double>& ys,
                          double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + w * (ys[i + 1] - ys[i]);
}

// Monotone cubic (Fritsch-Carlson) interpolant on a fixed grid. Slopes are
// limited so the interpolant preserves monotonicity of the data.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)), d_(xs_.size(), 0.0) {
        const std::size_t n = xs_.size();
        if (n < 2) return;
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = xs_[i + 1] - xs_[i];
            delta[i] = (ys_[i + 1] - ys_[i]) / h[i];
        }
        d_[0] = delta[0];
        d_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                d_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // Fritsch-Carlson end slope limiting.
        for (std::size_t e : {std::size_t{0}, n - 1}) {
            const std::size_t seg = (e == 0) ? 0 : n - 2;
            if (delta[seg] == 0.0)
                d_[e] = 0.0;
            else if (d_[e] / delta[seg] > 3.0)
                d_[e] = 3.0 * delta[seg];
            else if (d_[e] / delta[seg] < 0.0)
                d_[e] = 0.0;
        }
    }

    double operator()(double x) const {
        if (x <= xs_.front()) return ys_.front();
        if (x >= xs_.back()) return ys_.back();
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        const double h = xs_[i + 1] - xs_[i];
        const double t = (x - xs_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * ys_[i] + h10 * h * d_[i] + h01 * ys_[i + 1] + h11 * h * d_[i + 1];
    }

    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }

private:
    std::vector<double> xs_, ys_, d_;
};

}  // namespace fbound::math
