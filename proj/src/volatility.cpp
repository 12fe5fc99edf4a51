#include "fbound/volatility.hpp"

#include <algorithm>
#include <cmath>

#include "fbound/math/normal.hpp"
#include "fbound/psi.hpp"

namespace fbound {

RapmVol RapmVol::from_costs(double C, double R) {
    if (C < 0.0 || R < 0.0)
        throw InvalidParams("RapmVol: C and R must be nonnegative");
    return RapmVol{3.0 * std::cbrt(C * C * R / (2.0 * math::kPi))};
}

double signed_power(double u, double pexp) {
    if (u == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(u), pexp), u);
}

void validate(const VolatilitySpec& spec) {
    std::visit(
        [](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, LelandVol>) {
                if (v.Le < 0.0) throw InvalidParams("LelandVol: Le must be >= 0");
            } else if constexpr (std::is_same_v<V, AvellanedaVol>) {
                if (!(0.0 < v.sigma1 && v.sigma1 <= v.sigma2))
                    throw InvalidParams("AvellanedaVol: need 0 < sigma1 <= sigma2");
            } else if constexpr (std::is_same_v<V, RapmVol>) {
                if (v.mu < 0.0) throw InvalidParams("RapmVol: mu must be >= 0");
            } else if constexpr (std::is_same_v<V, BarlesSonerVol>) {
                if (v.a < 0.0) throw InvalidParams("BarlesSonerVol: a must be >= 0");
            } else if constexpr (std::is_same_v<V, FreyStremmeVol>) {
                if (v.rho_fb < 0.0)
                    throw InvalidParams("FreyStremmeVol: rho_fb must be >= 0");
                if (v.lambda < 1.0)
                    throw InvalidParams("FreyStremmeVol: lambda must be >= 1");
            }
        },
        spec);
}

double sigma_squared(const VolatilitySpec& spec, const MarketParams& params, double p,
                     double S, double tau) {
    const double s2 = params.sigma_hat * params.sigma_hat;
    return std::visit(
        [&](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ConstantVol>) {
                return s2;
            } else if constexpr (std::is_same_v<V, LelandVol>) {
                const double sgn = (p > 0.0) ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
                return s2 * (1.0 + v.Le * sgn);
            } else if constexpr (std::is_same_v<V, AvellanedaVol>) {
                return (p < 0.0) ? v.sigma1 * v.sigma1 : v.sigma2 * v.sigma2;
            } else if constexpr (std::is_same_v<V, RapmVol>) {
                return s2 * (1.0 + v.mu * signed_power(p / S, 1.0 / 3.0));
            } else if constexpr (std::is_same_v<V, BarlesSonerVol>) {
                return s2 * (1.0 + psi(v.a * v.a * std::exp(params.r * tau) * p));
            } else {
                const double denom = 1.0 - v.rho_fb * v.lambda * (p / S);
                if (denom <= 0.0)
                    throw SingularVolatilityError(
                        "FreyStremmeVol: 1 - rho*lambda*p/S = " + std::to_string(denom) +
                        " is non-positive at p=" + std::to_string(p) +
                        ", S=" + std::to_string(S));
                return s2 / (denom * denom);
            }
        },
        spec);
}

double parabolicity_margin(const VolatilitySpec& spec, const MarketParams& params,
                           double p, double S, double tau) {
    const double s2 = params.sigma_hat * params.sigma_hat;
    return std::visit(
        [&](const auto& v) -> double {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ConstantVol>) {
                return s2;
            } else if constexpr (std::is_same_v<V, LelandVol>) {
                // Piecewise constant away from p=0; right limit at the kink.
                if (p == 0.0) return s2 * (1.0 + v.Le);
                return sigma_squared(spec, params, p, S, tau);
            } else if constexpr (std::is_same_v<V, AvellanedaVol>) {
                return sigma_squared(spec, params, p, S, tau);
            } else if constexpr (std::is_same_v<V, RapmVol>) {
                return s2 * (1.0 + (4.0 / 3.0) * v.mu * signed_power(p / S, 1.0 / 3.0));
            } else if constexpr (std::is_same_v<V, BarlesSonerVol>) {
                if (p <= 0.0) return s2;  // p Psi' -> 0 as p -> 0+
                const double step = std::max(1e-6, 1e-6 * std::abs(p));
                const double lo = std::max(p - step, 0.0);
                const double hi = p + step;
                const double dsdp = (sigma_squared(spec, params, hi, S, tau) -
                                     sigma_squared(spec, params, lo, S, tau)) /
                                    (hi - lo);
                return sigma_squared(spec, params, p, S, tau) + p * dsdp;
            } else {
                const double denom = 1.0 - v.rho_fb * v.lambda * (p / S);
                if (denom <= 0.0)
                    throw SingularVolatilityError(
                        "FreyStremmeVol: singular at p=" + std::to_string(p));
                return s2 * (2.0 - denom) / (denom * denom * denom);
            }
        },
        spec);
}

bool clamps_curvature(const VolatilitySpec& spec) {
    return std::holds_alternative<BarlesSonerVol>(spec);
}

const char* model_name(const VolatilitySpec& spec) {
    return std::visit(
        [](const auto& v) -> const char* {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ConstantVol>) return "constant";
            else if constexpr (std::is_same_v<V, LelandVol>) return "leland";
            else if constexpr (std::is_same_v<V, AvellanedaVol>) return "avellaneda";
            else if constexpr (std::is_same_v<V, RapmVol>) return "rapm";
            else if constexpr (std::is_same_v<V, BarlesSonerVol>) return "barles-soner";
            else return "frey-stremme";
        },
        spec);
}

}  // namespace fbound
