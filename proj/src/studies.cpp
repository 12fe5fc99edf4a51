#include "fbound/studies.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace fbound {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FBOUND_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::min(resolve_threads(threads), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<EocRow> eoc_study(const MarketParams& params, const std::vector<double>& meshes,
                              const BoundaryCurve& reference, double L, int threads) {
    std::vector<EocRow> rows(meshes.size());
    parallel_for(static_cast<int>(meshes.size()), threads, [&](int i) {
        const double h = meshes[i];
        SolverConfig cfg;
        cfg.L = L;
        cfg.n = std::max(2, static_cast<int>(std::lround(L / h)));
        cfg.m = std::max<long>(
            2, std::lround(2.0 * params.sigma_hat * params.sigma_hat * params.T / (h * h)));
        const PortfolioSurface surf = solve_free_boundary(params, ConstantVol{}, cfg);
        const CurveDistance d = boundary_distance(surf.boundary, reference);
        rows[i] = {h, cfg.n, cfg.m, d.linf, d.l2,
                   std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
    });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double dh = std::log(rows[i].h / rows[i - 1].h);
        rows[i].eoc_linf = std::log(rows[i].err_linf / rows[i - 1].err_linf) / dh;
        rows[i].eoc_l2 = std::log(rows[i].err_l2 / rows[i - 1].err_l2) / dh;
    }
    return rows;
}

std::vector<ScalingRow> boundary_deviation_sweep(
    const MarketParams& params, const std::function<VolatilitySpec(double)>& make_spec,
    const std::vector<double>& values, const SolverConfig& cfg, int threads) {
    const PortfolioSurface ref = solve_free_boundary(params, ConstantVol{}, cfg);
    std::vector<ScalingRow> rows(values.size());
    parallel_for(static_cast<int>(values.size()), threads, [&](int i) {
        const PortfolioSurface surf = solve_free_boundary(params, make_spec(values[i]), cfg);
        const CurveDistance d = boundary_distance(surf.boundary, ref.boundary);
        rows[i] = {values[i], d.linf, d.l2};
    });
    return rows;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InvalidParams("loglog_slope: need matching vectors of length >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fbound
