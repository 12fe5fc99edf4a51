#pragma once

#include <vector>

#include "fbound/market.hpp"
#include "fbound/volatility.hpp"

namespace fbound {

// Transaction-cost and risk-premium coefficients of the risk-adjusted model.
struct RapmParams {
    double C = 0.0;  // round-trip transaction cost per unit dollar
    double R = 0.0;  // risk premium coefficient

    double mu() const;
    void validate() const;
};

// Hedging-interval optimum: the time lag minimizing transaction cost plus
// volatile-portfolio risk, and the minimal total premium. C = 0 or R = 0
// degenerates the optimum (dt 0 or unbounded, zero premium).
struct HedgingOptimum {
    double dt_opt = 0.0;
    double r_r_min = 0.0;
    bool degenerate = false;
};

HedgingOptimum optimal_hedging_interval(const RapmParams& rapm, double sigma_hat, double S,
                                        double gamma);

// Premium components as functions of the hedging time lag.
double transaction_cost_rate(const RapmParams& rapm, double sigma_hat, double S,
                             double gamma, double dt);
double volatile_portfolio_rate(const RapmParams& rapm, double sigma_hat, double S,
                               double gamma, double dt);

// ---------------------------------------------------------------------------
// Gamma equation: H = S * d2V/dS2 solves the quasilinear conservation law
//   dH/dtau = dxx beta(H) + dx beta(H) + r dx H,
//   beta(H) = (sigma_hat^2/2) (1 + mu H^(1/3)) H,
// with H -> 0 at both ends and a mollified Dirac initial datum.

struct GammaConfig {
    int n = 400;
    long m = 4000;
    double tau_star = 0.005;  // Dirac mollification parameter
    double X = 0.0;           // half-width; 0 = auto 6 sigma_hat sqrt(T)
    long snapshot_stride = 0;
};

struct GammaField {
    std::vector<double> x;
    std::vector<double> values;  // final level
    double tau = 0.0;
    double tau_star = 0.0;
    double mass_initial = 0.0;
    double max_mass_drift = 0.0;  // max |mass(tau) - mass(0)| over the march
    double min_value = 0.0;
    std::vector<std::pair<double, std::vector<double>>> levels;
};

// Mollified Dirac datum N'(d)/(sigma sqrt(tau*)) on the given grid; the
// d-argument carries the Black-Scholes drift so the datum matches the linear
// Gamma profile one instant after expiry.
std::vector<double> initial_gamma(const MarketParams& params, double tau_star,
                                  const std::vector<double>& grid);

GammaField solve_gamma_equation(const MarketParams& params, const RapmParams& rapm,
                                const GammaConfig& cfg = {});

// ---------------------------------------------------------------------------
// European pricing under the risk-adjusted equation, bid/ask, calibration.

struct RapmPriceConfig {
    int n = 400;
    long m = 1000;
    double X = 0.0;          // log-moneyness half-width; 0 = auto
    double inner_tol = 1e-8; // sweep tolerance on the frozen-coefficient solve
    int inner_max = 25;
};

struct RapmPriceCurve {
    std::vector<double> S;
    std::vector<double> V;
    double tau = 0.0;

    double value_at(double spot) const;
};

// Implicit march of the generalized pricing equation with the nonlinear term
// frozen from the previous sweep. tau is the time to expiry of the returned
// curve.
RapmPriceCurve price_european_rapm(const MarketParams& params, double mu, double tau,
                                   const RapmPriceConfig& cfg = {});

double rapm_price_at(const MarketParams& params, const RapmParams& rapm, double S,
                     double t, const RapmPriceConfig& cfg = {});

struct BidAsk {
    double bid = 0.0;
    double mid = 0.0;
    double ask = 0.0;
};

// Ask from the full model, mid from the vanishing-risk-premium model,
// bid mirrored around mid.
BidAsk bid_ask(const MarketParams& params, const RapmParams& rapm, double S, double t,
               const RapmPriceConfig& cfg = {});

struct CalibrationResult {
    double sigma = 0.0;
    double R = 0.0;
    double resid_mid = 0.0;
    double resid_ask = 0.0;
    int iterations = 0;
};

// Recovers (sigma_rapm, R) from observed mid and ask quotes at known C by a
// damped 2-D Newton iteration with finite-difference Jacobian. params.sigma_hat
// is ignored (it is the unknown). Throws ConvergenceError on failure or when
// the quote pair is infeasible (ask below mid).
CalibrationResult calibrate_rapm(double v_mid_obs, double v_ask_obs, double C,
                                 const MarketParams& params, double S, double t,
                                 const RapmPriceConfig& cfg = {});

}  // namespace fbound
