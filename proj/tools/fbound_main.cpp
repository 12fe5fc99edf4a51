// fbound - free boundary and option pricing CLI.
//
// Subcommands run the solvers, convergence studies and oracle comparisons;
// every subcommand accepts --config <file> with flat key=value lines
// (command-line flags win) and writes a JSON run manifest next to its CSV
// outputs when asked. Exit codes: 0 success, 1 solver failure, 2 usage error.

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbound/asian.hpp"
#include "fbound/csv.hpp"
#include "fbound/gamma_eq.hpp"
#include "fbound/integral_eq.hpp"
#include "fbound/oracles.hpp"
#include "fbound/pde_solver.hpp"
#include "fbound/psi.hpp"
#include "fbound/studies.hpp"

using nlohmann::json;
using namespace fbound;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

json params_json(const MarketParams& p) {
    return {{"r", p.r}, {"q", p.q}, {"E", p.E}, {"T", p.T}, {"sigma_hat", p.sigma_hat}};
}

void write_manifest(const std::string& path, json manifest, double wall_time,
                    const std::vector<std::string>& outputs) {
    if (path.empty()) return;
    manifest["wall_time_s"] = wall_time;
    manifest["outputs"] = outputs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open manifest file: " + path);
    out << manifest.dump(2) << "\n";
}

void add_config_help(CLI::App* cmd) {
    // handled by apply_config_file before parsing; listed here for --help
    static std::string ignored;
    cmd->add_option("--config", ignored,
                    "flat key=value config file (explicit flags win)");
}

void add_market_options(CLI::App* cmd, MarketParams& p, bool with_strike = true) {
    add_config_help(cmd);
    cmd->add_option("--r", p.r, "risk-free rate (1/year)");
    cmd->add_option("--q", p.q, "dividend yield (1/year)");
    if (with_strike) cmd->add_option("--E", p.E, "strike");
    cmd->add_option("--T", p.T, "expiry (years)");
    cmd->add_option("--sigma", p.sigma_hat, "base volatility");
}

// Flat key=value config support: --config <file> is handled before CLI11
// sees the command line. Each key becomes --key <value> injected right after
// the subcommand unless the flag was given explicitly, so flags win.
std::vector<std::string> apply_config_file(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;
    if (args.size() < 2)
        throw InvalidParams("--config requires a subcommand");

    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open config file: " + path);

    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));

    std::vector<std::string> injected;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s2) {
            const auto b = s2.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s2.find_last_not_of(" \t\r");
            return s2.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParams("config line " + std::to_string(lineno) +
                                ": expected key=value");
        const std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty()) throw InvalidParams("config line " + std::to_string(lineno) +
                                             ": empty key");
        if (given.count("--" + key)) continue;
        injected.push_back("--" + key);
        injected.push_back(value);
    }
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    return args;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw InvalidParams("empty numeric list: '" + csv + "'");
    return out;
}

struct ModelFlags {
    std::string model = "constant";
    double C = 0.0, R = 0.0;
    double mu = -1.0;  // <0: derive from C, R
    double le = 0.0;
    double a = 0.0;
    double rho_fb = 0.0, lambda = 1.0;
    double sigma1 = 0.0, sigma2 = 0.0;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--model", model,
                        "constant|leland|rapm|barles-soner|avellaneda|frey-stremme");
        cmd->add_option("--C", C, "RAPM transaction cost coefficient");
        cmd->add_option("--R", R, "RAPM risk premium coefficient");
        cmd->add_option("--mu", mu, "RAPM mu (overrides --C/--R)");
        cmd->add_option("--le", le, "Leland number");
        cmd->add_option("--a", a, "Barles-Soner risk aversion");
        cmd->add_option("--rho-fb", rho_fb, "Frey-Stremme feedback level");
        cmd->add_option("--lambda", lambda, "Frey-Stremme liquidity factor (>= 1)");
        cmd->add_option("--sigma1", sigma1, "Avellaneda lower volatility");
        cmd->add_option("--sigma2", sigma2, "Avellaneda upper volatility");
    }

    VolatilitySpec make() const {
        if (model == "constant") return ConstantVol{};
        if (model == "leland") return LelandVol{le};
        if (model == "rapm")
            return (mu >= 0.0) ? VolatilitySpec(RapmVol{mu})
                               : VolatilitySpec(RapmVol::from_costs(C, R));
        if (model == "barles-soner") return BarlesSonerVol{a};
        if (model == "avellaneda") return AvellanedaVol{sigma1, sigma2};
        if (model == "frey-stremme") return FreyStremmeVol{rho_fb, lambda};
        throw InvalidParams("unknown model: " + model);
    }

    json to_json() const {
        json j = {{"model", model}};
        if (model == "rapm") {
            j["C"] = C;
            j["R"] = R;
            j["mu"] = (mu >= 0.0) ? mu : RapmVol::from_costs(C, R).mu;
        } else if (model == "leland") {
            j["le"] = le;
        } else if (model == "barles-soner") {
            j["a"] = a;
        } else if (model == "avellaneda") {
            j["sigma1"] = sigma1;
            j["sigma2"] = sigma2;
        } else if (model == "frey-stremme") {
            j["rho_fb"] = rho_fb;
            j["lambda"] = lambda;
        }
        return j;
    }
};

void write_boundary_csv(const std::string& path, const BoundaryCurve& curve) {
    CsvWriter csv(path);
    csv.header({"tau", "rho"});
    for (std::size_t i = 0; i < curve.size(); ++i)
        csv.row({curve.taus[i], curve.rhos[i]});
}

// ---------------------------------------------------------------------------

int cmd_solve_linear(const MarketParams& params, const IntegralSolveConfig& cfg,
                     const std::string& out, const std::string& manifest) {
    Timer timer;
    auto res = solve_boundary(params, cfg);
    write_boundary_csv(out, res.curve);
    write_manifest(manifest,
                   {{"command", "solve-linear"},
                    {"params", params_json(params)},
                    {"cfg", {{"n", cfg.n}, {"tol", cfg.tol}, {"max_iters", cfg.max_iters}}},
                    {"diagnostics",
                     {{"iterations", res.iterations},
                      {"final_change", res.final_change},
                      {"rho_T", res.curve.back()}}}},
                   timer.seconds(), {out});
    std::printf("solve-linear: rho(T) = %s in %d iterations\n",
                format_number(res.curve.back()).c_str(), res.iterations);
    return 0;
}

int cmd_price(const MarketParams& params, const std::string& method,
              std::vector<double> spots, double tau, int n_ie, const SolverConfig& pde_cfg,
              const std::string& out, const std::string& manifest) {
    Timer timer;
    if (tau <= 0.0) tau = params.T;
    CsvWriter csv(out);
    csv.header({"S", "tau", "price"});
    if (method == "semi") {
        IntegralSolveConfig icfg;
        icfg.n = n_ie;
        auto res = solve_boundary(params, icfg);
        for (double s : spots)
            csv.row({s, tau, price_call_semi_explicit(s, tau, res.curve, params).value});
    } else if (method == "pde") {
        SolverConfig cfg = pde_cfg;
        if (tau < params.T && cfg.snapshot_stride == 0)
            cfg.snapshot_stride = std::max<long>(1, cfg.m / 400);
        auto surf = solve_free_boundary(params, ConstantVol{}, cfg);
        for (double s : spots) csv.row({s, tau, recover_price(surf, s, tau).value});
    } else {
        throw InvalidParams("price: method must be semi or pde");
    }
    write_manifest(manifest,
                   {{"command", "price"},
                    {"params", params_json(params)},
                    {"cfg", {{"method", method}, {"tau", tau}}}},
                   timer.seconds(), {out});
    return 0;
}

int cmd_solve_pde(const MarketParams& params, const ModelFlags& model,
                  const SolverConfig& cfg, const std::string& out,
                  const std::string& surface_out, const std::string& manifest) {
    Timer timer;
    SolverConfig run_cfg = cfg;
    if (!surface_out.empty() && run_cfg.snapshot_stride == 0)
        run_cfg.snapshot_stride = std::max<long>(1, run_cfg.m / 50);
    auto surf = solve_free_boundary(params, model.make(), run_cfg);
    write_boundary_csv(out, surf.boundary);
    std::vector<std::string> outputs = {out};
    if (!surface_out.empty()) {
        CsvWriter csv(surface_out);
        csv.header({"x", "tau", "pi"});
        for (const auto& [tau, values] : surf.levels)
            for (std::size_t i = 0; i < surf.x.size(); ++i)
                csv.row({surf.x[i], tau, values[i]});
        outputs.push_back(surface_out);
    }
    write_manifest(
        manifest,
        {{"command", "solve-pde"},
         {"params", params_json(params)},
         {"spec", model.to_json()},
         {"cfg",
          {{"n", run_cfg.n},
           {"m", run_cfg.m},
           {"L", run_cfg.L},
           {"micro_tol", run_cfg.micro_tol},
           {"micro_max", run_cfg.micro_max}}},
         {"diagnostics",
          {{"rho_T", surf.boundary.back()},
           {"micro_iter_stats",
            {{"max", surf.diag.max_micro}, {"mean", surf.diag.mean_micro}}},
           {"min_pi", surf.diag.min_pi},
           {"max_pi", surf.diag.max_pi},
           {"dominance_warnings", surf.diag.dominance_warnings}}}},
        timer.seconds(), outputs);
    std::printf("solve-pde: rho(T) = %s (micro mean %.2f, max %d)\n",
                format_number(surf.boundary.back()).c_str(), surf.diag.mean_micro,
                surf.diag.max_micro);
    return 0;
}

int cmd_solve_asian(const MarketParams& params, const AsianConfig& cfg,
                    const std::string& out, const std::string& recip_out,
                    const std::string& manifest) {
    Timer timer;
    auto res = asian_solve(params, cfg);
    write_boundary_csv(out, res.boundary);
    std::vector<std::string> outputs = {out};
    if (!recip_out.empty()) {
        // reciprocal boundary against calendar time, the A/S convention
        CsvWriter csv(recip_out);
        csv.header({"t", "inv_xf"});
        for (std::size_t i = res.boundary.size(); i-- > 0;)
            csv.row({params.T - res.boundary.taus[i], 1.0 / res.boundary.rhos[i]});
        outputs.push_back(recip_out);
    }
    write_manifest(manifest,
                   {{"command", "solve-asian"},
                    {"params", params_json(params)},
                    {"cfg", {{"n", cfg.n}, {"m", cfg.m}, {"L", cfg.L}}},
                    {"diagnostics",
                     {{"rho_0", res.boundary.front()},
                      {"rho_final", res.boundary.back()},
                      {"final_tau", res.final_tau},
                      {"min_rho", res.diag.min_rho},
                      {"micro_iter_stats",
                       {{"max", res.diag.max_micro}, {"mean", res.diag.mean_micro}}}}}},
                   timer.seconds(), outputs);
    std::printf("solve-asian: rho(0) = %s, rho(%s) = %s\n",
                format_number(res.boundary.front()).c_str(),
                format_number(res.final_tau).c_str(),
                format_number(res.boundary.back()).c_str());
    return 0;
}

int cmd_gamma_solve(const MarketParams& params, const RapmParams& rapm,
                    const GammaConfig& cfg, const std::string& out,
                    const std::string& manifest) {
    Timer timer;
    auto field = solve_gamma_equation(params, rapm, cfg);
    CsvWriter csv(out);
    csv.header({"x", "h"});
    for (std::size_t i = 0; i < field.x.size(); ++i) csv.row({field.x[i], field.values[i]});
    write_manifest(manifest,
                   {{"command", "gamma-solve"},
                    {"params", params_json(params)},
                    {"spec", {{"C", rapm.C}, {"R", rapm.R}, {"mu", rapm.mu()}}},
                    {"cfg", {{"n", cfg.n}, {"m", cfg.m}, {"tau_star", cfg.tau_star}}},
                    {"diagnostics",
                     {{"mass_initial", field.mass_initial},
                      {"max_mass_drift", field.max_mass_drift},
                      {"min_value", field.min_value}}}},
                   timer.seconds(), {out});
    std::printf("gamma-solve: mass drift %s\n",
                format_number(field.max_mass_drift).c_str());
    return 0;
}

int cmd_rapm_price(const MarketParams& params, const RapmParams& rapm, double t,
                   double smin, double smax, int count, const RapmPriceConfig& cfg,
                   const std::string& out, const std::string& manifest) {
    Timer timer;
    const double tau = params.T - t;
    auto ask_curve = price_european_rapm(params, rapm.mu(), tau, cfg);
    auto mid_curve = price_european_rapm(params, 0.0, tau, cfg);
    CsvWriter csv(out);
    csv.header({"S", "v_bid", "v_mid", "v_ask"});
    for (int i = 0; i < count; ++i) {
        const double s = smin + (smax - smin) * i / std::max(1, count - 1);
        const double ask = ask_curve.value_at(s);
        const double mid = mid_curve.value_at(s);
        csv.row({s, 2.0 * mid - ask, mid, ask});
    }
    write_manifest(manifest,
                   {{"command", "rapm-price"},
                    {"params", params_json(params)},
                    {"spec", {{"C", rapm.C}, {"R", rapm.R}, {"mu", rapm.mu()}}},
                    {"cfg", {{"t", t}, {"n", cfg.n}, {"m", cfg.m}}}},
                   timer.seconds(), {out});
    return 0;
}

int cmd_rapm_calibrate(const std::string& in, double C, double r, double q, double t,
                       const RapmPriceConfig& cfg, const std::string& out,
                       const std::string& manifest) {
    Timer timer;
    std::ifstream quotes(in);
    if (!quotes) throw InvalidParams("cannot open quotes file: " + in);
    CsvWriter csv(out);
    csv.header({"timestamp", "sigma_rapm", "R", "resid"});
    std::string line;
    std::getline(quotes, line);  // header: timestamp,S,E,T,V_bid,V_ask
    int row = 0, failures = 0;
    while (std::getline(quotes, line)) {
        if (line.empty()) continue;
        ++row;
        std::stringstream ss(line);
        std::string ts, tok;
        std::getline(ss, ts, ',');
        double vals[5];
        for (double& v : vals) {
            if (!std::getline(ss, tok, ','))
                throw InvalidParams("quotes row " + std::to_string(row) +
                                    ": expected timestamp,S,E,T,V_bid,V_ask");
            v = std::stod(tok);
        }
        MarketParams p;
        p.r = r;
        p.q = q;
        p.E = vals[1];
        p.T = vals[2];
        p.sigma_hat = 0.3;  // placeholder, calibrated away
        const double v_mid = 0.5 * (vals[3] + vals[4]);
        try {
            auto res = calibrate_rapm(v_mid, vals[4], C, p, vals[0], t, cfg);
            csv.raw_row(ts + "," + format_number(res.sigma) + "," + format_number(res.R) +
                        "," +
                        format_number(
                            std::max(std::abs(res.resid_mid), std::abs(res.resid_ask))));
        } catch (const ConvergenceError& e) {
            ++failures;
            csv.raw_row(ts + ",nan,nan," + format_number(e.residual()));
        }
    }
    write_manifest(manifest,
                   {{"command", "rapm-calibrate"},
                    {"cfg", {{"C", C}, {"r", r}, {"q", q}, {"t", t}}},
                    {"diagnostics", {{"rows", row}, {"failures", failures}}}},
                   timer.seconds(), {out});
    return failures == 0 ? 0 : 1;
}

int cmd_oracle(const MarketParams& params, const std::string& which, Payoff payoff,
               Style style, double S, double tau, int steps, const PsorConfig& psor_cfg,
               const std::string& out, const std::string& boundary_out) {
    if (tau <= 0.0) tau = params.T;
    double price = 0.0;
    BoundaryCurve boundary;
    if (which == "bs") {
        price = bs_european_price(S, params, tau, payoff);
    } else if (which == "binomial") {
        LatticeConfig lc{steps, style, payoff};
        auto res = binomial_price(S, params, lc);
        price = res.price;
        boundary = res.boundary;
    } else if (which == "psor") {
        if (style == Style::European)
            throw InvalidParams("oracle: psor solves the American obstacle problem");
        PsorConfig pc = psor_cfg;
        pc.payoff = payoff;
        auto res = psor_price(params, pc);
        price = res.value_at(S);
        boundary = res.boundary;
    } else if (which == "baw") {
        price = baw_price(S, params, tau, payoff);
    } else {
        throw InvalidParams("oracle: --which must be bs|binomial|psor|baw");
    }
    std::printf("%s price at S=%s: %s\n", which.c_str(), format_number(S).c_str(),
                format_number(price).c_str());
    if (!out.empty()) {
        CsvWriter csv(out);
        csv.header({"S", "tau", "price"});
        csv.row({S, tau, price});
    }
    if (!boundary_out.empty() && boundary.size() > 0)
        write_boundary_csv(boundary_out, boundary);
    return 0;
}

int cmd_eoc(const MarketParams& params, const std::string& meshes_csv, int ref_n,
            double L, int threads, const std::string& out, const std::string& manifest) {
    Timer timer;
    IntegralSolveConfig icfg;
    icfg.n = ref_n;
    auto ref = solve_boundary(params, icfg);
    auto rows = eoc_study(params, parse_list(meshes_csv), ref.curve, L, threads);
    CsvWriter csv(out);
    csv.header({"h", "err_linf", "eoc_linf", "err_l2", "eoc_l2"});
    for (const auto& r : rows)
        csv.row({r.h, r.err_linf, r.eoc_linf, r.err_l2, r.eoc_l2});
    write_manifest(manifest,
                   {{"command", "eoc"},
                    {"params", params_json(params)},
                    {"cfg", {{"ref_n", ref_n}, {"L", L}}},
                    {"diagnostics", {{"ref_rho_T", ref.curve.back()}}}},
                   timer.seconds(), {out});
    return 0;
}

int cmd_sweep(const MarketParams& params, const std::string& model,
              const std::string& values_csv, double C, const SolverConfig& cfg,
              int threads, const std::string& out_dir, const std::string& manifest) {
    Timer timer;
    const std::vector<double> values = parse_list(values_csv);
    std::function<VolatilitySpec(double)> make;
    std::string param_name;
    if (model == "rapm") {
        make = [C](double R) { return VolatilitySpec(RapmVol::from_costs(C, R)); };
        param_name = "R";
    } else if (model == "barles-soner") {
        make = [](double a) { return VolatilitySpec(BarlesSonerVol{a}); };
        param_name = "a";
    } else {
        throw InvalidParams("sweep: --model must be rapm or barles-soner");
    }

    const PortfolioSurface ref = solve_free_boundary(params, ConstantVol{}, cfg);
    std::vector<ScalingRow> rows(values.size());
    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < values.size(); ++i)
        outputs.push_back(out_dir + "/rho_" + param_name + "_" +
                          format_number(values[i]) + ".csv");
    parallel_for(static_cast<int>(values.size()), threads, [&](int i) {
        auto surf = solve_free_boundary(params, make(values[i]), cfg);
        auto d = boundary_distance(surf.boundary, ref.boundary);
        rows[i] = {values[i], d.linf, d.l2};
        write_boundary_csv(outputs[i], surf.boundary);
    });

    const std::string dist_path = out_dir + "/distances.csv";
    CsvWriter csv(dist_path);
    csv.header({param_name, "dist_linf", "dist_l2"});
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        csv.row({r.value, r.dist_linf, r.dist_l2});
        xs.push_back(r.value);
        ys.push_back(r.dist_linf);
    }
    outputs.push_back(dist_path);
    json diagnostics = {{"ref_rho_T", ref.boundary.back()}};
    if (values.size() >= 2) {
        const double slope = loglog_slope(xs, ys);
        diagnostics["fitted_exponent"] = slope;
        std::printf("sweep: fitted exponent %s over %zu values\n",
                    format_number(slope).c_str(), values.size());
    }
    write_manifest(manifest,
                   {{"command", "sweep"},
                    {"params", params_json(params)},
                    {"spec", {{"model", model}, {"C", C}}},
                    {"cfg", {{"n", cfg.n}, {"m", cfg.m}, {"threads", threads}}},
                    {"diagnostics", diagnostics}},
                   timer.seconds(), outputs);
    return 0;
}

int cmd_put_asymptotic(const MarketParams& params, const std::string& taus_csv,
                       const std::string& out) {
    const std::vector<double> taus = parse_list(taus_csv);
    if (!out.empty()) {
        CsvWriter csv(out);
        csv.header({"tau", "rho"});
        for (double tau : taus) csv.row({tau, put_boundary_asymptotic(tau, params)});
    } else {
        for (double tau : taus)
            std::printf("rho(%s) = %s\n", format_number(tau).c_str(),
                        format_number(put_boundary_asymptotic(tau, params)).c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free boundary solvers for American options under linear and "
                 "nonlinear Black-Scholes models"};
    app.require_subcommand(1);

    // solve-linear ----------------------------------------------------------
    MarketParams lin_params;
    IntegralSolveConfig lin_cfg;
    std::string lin_out = "boundary.csv", lin_manifest;
    auto* lin = app.add_subcommand("solve-linear",
                                   "early exercise boundary from the integral equation");
    add_market_options(lin, lin_params);
    lin->add_option("--n", lin_cfg.n, "grid intervals on [0, sqrt(T)]");
    lin->add_option("--tol", lin_cfg.tol, "fixed point tolerance");
    lin->add_option("--max-iters", lin_cfg.max_iters, "iteration cap");
    lin->add_option("--relax", lin_cfg.relaxation, "relaxation factor");
    lin->add_option("--panels", lin_cfg.quad.panels, "quadrature panels");
    lin->add_option("--out", lin_out, "boundary CSV (tau,rho)");
    lin->add_option("--manifest", lin_manifest, "JSON run manifest");

    // price -----------------------------------------------------------------
    MarketParams price_params;
    SolverConfig price_pde_cfg = SolverConfig::ci_profile();
    std::string price_method = "semi", price_spots = "20", price_out = "prices.csv",
                price_manifest;
    double price_tau = 0.0;
    int price_n_ie = 100;
    auto* price =
        app.add_subcommand("price", "American call prices (semi-explicit or PDE)");
    add_market_options(price, price_params);
    price->add_option("--method", price_method, "semi|pde");
    price->add_option("--S", price_spots, "comma-separated asset prices");
    price->add_option("--tau", price_tau, "time to expiry (default T)");
    price->add_option("--n", price_n_ie, "integral-equation grid intervals");
    price->add_option("--nx", price_pde_cfg.n, "PDE spatial intervals");
    price->add_option("--mt", price_pde_cfg.m, "PDE time levels");
    price->add_option("--out", price_out, "price CSV (S,tau,price)");
    price->add_option("--manifest", price_manifest, "JSON run manifest");

    // solve-pde --------------------------------------------------------------
    MarketParams pde_params;
    ModelFlags pde_model;
    SolverConfig pde_cfg = SolverConfig::ci_profile();
    std::string pde_profile, pde_out = "boundary.csv", pde_surface, pde_manifest;
    auto* pde = app.add_subcommand(
        "solve-pde", "free boundary march for (non)linear volatility models");
    add_market_options(pde, pde_params);
    pde_model.add_options(pde);
    pde->add_option("--profile", pde_profile, "mesh profile: paper|ci");
    pde->add_option("--nx", pde_cfg.n, "spatial intervals");
    pde->add_option("--mt", pde_cfg.m, "time levels");
    pde->add_option("--L", pde_cfg.L, "domain length");
    pde->add_option("--micro-tol", pde_cfg.micro_tol, "micro-iteration tolerance");
    pde->add_option("--micro-max", pde_cfg.micro_max, "micro-iteration cap");
    pde->add_option("--stride", pde_cfg.snapshot_stride, "surface snapshot stride");
    pde->add_option("--out", pde_out, "boundary CSV (tau,rho)");
    pde->add_option("--surface", pde_surface, "surface CSV (x,tau,pi)");
    pde->add_option("--manifest", pde_manifest, "JSON run manifest");

    // solve-asian -------------------------------------------------------------
    MarketParams asian_params;
    asian_params.E = 1.0;
    AsianConfig asian_cfg;
    std::string asian_out = "asian_boundary.csv", asian_recip, asian_manifest;
    auto* asian = app.add_subcommand(
        "solve-asian", "floating-strike Asian call free boundary (similarity variable)");
    add_market_options(asian, asian_params, /*with_strike=*/false);
    asian->add_option("--n", asian_cfg.n, "spatial intervals");
    asian->add_option("--m", asian_cfg.m, "time levels");
    asian->add_option("--L", asian_cfg.L, "domain length");
    asian->add_option("--micro-tol", asian_cfg.micro_tol, "micro-iteration tolerance");
    asian->add_option("--out", asian_out, "boundary CSV (tau,rho)");
    asian->add_option("--recip", asian_recip, "reciprocal boundary CSV (t,inv_xf)");
    asian->add_option("--manifest", asian_manifest, "JSON run manifest");

    // gamma-solve --------------------------------------------------------------
    MarketParams gamma_params;
    RapmParams gamma_rapm;
    GammaConfig gamma_cfg;
    std::string gamma_out = "gamma.csv", gamma_manifest;
    auto* gamma =
        app.add_subcommand("gamma-solve", "quasilinear Gamma equation for H = S Vss");
    add_market_options(gamma, gamma_params);
    gamma->add_option("--C", gamma_rapm.C, "transaction cost coefficient");
    gamma->add_option("--R", gamma_rapm.R, "risk premium coefficient");
    gamma->add_option("--n", gamma_cfg.n, "spatial intervals");
    gamma->add_option("--m", gamma_cfg.m, "time levels");
    gamma->add_option("--tau-star", gamma_cfg.tau_star, "Dirac mollification");
    gamma->add_option("--X", gamma_cfg.X, "domain half-width (0 = auto)");
    gamma->add_option("--out", gamma_out, "field CSV (x,h)");
    gamma->add_option("--manifest", gamma_manifest, "JSON run manifest");

    // rapm-price ---------------------------------------------------------------
    MarketParams rp_params;
    RapmParams rp_rapm;
    RapmPriceConfig rp_cfg;
    double rp_t = 0.0, rp_smin = 0.0, rp_smax = 0.0;
    int rp_count = 50;
    std::string rp_out = "rapm_prices.csv", rp_manifest;
    auto* rp = app.add_subcommand("rapm-price",
                                  "European bid/mid/ask prices under the RAPM model");
    add_market_options(rp, rp_params);
    rp->add_option("--C", rp_rapm.C, "transaction cost coefficient");
    rp->add_option("--R", rp_rapm.R, "risk premium coefficient");
    rp->add_option("--t", rp_t, "valuation time");
    rp->add_option("--smin", rp_smin, "lowest asset price")->required();
    rp->add_option("--smax", rp_smax, "highest asset price")->required();
    rp->add_option("--count", rp_count, "number of rows");
    rp->add_option("--n", rp_cfg.n, "spatial intervals");
    rp->add_option("--m", rp_cfg.m, "time levels");
    rp->add_option("--out", rp_out, "price CSV (S,v_bid,v_mid,v_ask)");
    rp->add_option("--manifest", rp_manifest, "JSON run manifest");

    // rapm-calibrate -------------------------------------------------------------
    double cal_C = 0.01, cal_r = 0.02, cal_q = 0.0, cal_t = 0.0;
    RapmPriceConfig cal_cfg;
    std::string cal_in, cal_out = "calibration.csv", cal_manifest;
    auto* cal = app.add_subcommand("rapm-calibrate",
                                   "recover (sigma_rapm, R) from mid/ask quotes");
    add_config_help(cal);
    cal->add_option("--in", cal_in, "quotes CSV (timestamp,S,E,T,V_bid,V_ask)")
        ->required();
    cal->add_option("--C", cal_C, "transaction cost coefficient");
    cal->add_option("--r", cal_r, "risk-free rate");
    cal->add_option("--q", cal_q, "dividend yield");
    cal->add_option("--t", cal_t, "valuation time");
    cal->add_option("--out", cal_out, "output CSV (timestamp,sigma_rapm,R,resid)");
    cal->add_option("--manifest", cal_manifest, "JSON run manifest");

    // oracle -----------------------------------------------------------------
    MarketParams or_params;
    PsorConfig or_psor;
    std::string or_which = "bs", or_payoff = "call", or_style = "american", or_out,
                or_boundary;
    double or_S = 0.0, or_tau = 0.0;
    int or_steps = 1000;
    auto* orc = app.add_subcommand("oracle", "reference pricers");
    add_market_options(orc, or_params);
    orc->add_option("--which", or_which, "bs|binomial|psor|baw");
    orc->add_option("--payoff", or_payoff, "call|put");
    orc->add_option("--style", or_style, "american|european");
    orc->add_option("--S", or_S, "asset price")->required();
    orc->add_option("--tau", or_tau, "time to expiry (default T)");
    orc->add_option("--steps", or_steps, "lattice depth");
    orc->add_option("--n", or_psor.n, "PSOR spatial intervals");
    orc->add_option("--m", or_psor.m, "PSOR time levels");
    orc->add_option("--out", or_out, "price CSV");
    orc->add_option("--boundary-out", or_boundary, "boundary CSV (tau,rho)");

    // eoc ---------------------------------------------------------------------
    MarketParams eoc_params;
    std::string eoc_ref = "integral", eoc_meshes = "0.03,0.012,0.006",
                eoc_out = "eoc.csv", eoc_manifest;
    int eoc_ref_n = 400, eoc_threads = 0;
    double eoc_L = 3.0;
    auto* eocc = app.add_subcommand(
        "eoc", "experimental order of convergence vs the integral-equation reference");
    add_market_options(eocc, eoc_params);
    eocc->add_option("--ref", eoc_ref, "reference solution (integral)");
    eocc->add_option("--meshes", eoc_meshes, "comma-separated mesh sizes h");
    eocc->add_option("--ref-n", eoc_ref_n, "reference grid intervals");
    eocc->add_option("--L", eoc_L, "domain length");
    eocc->add_option("--threads", eoc_threads, "worker pool size (0 = auto)");
    eocc->add_option("--out", eoc_out, "CSV (h,err_linf,eoc_linf,err_l2,eoc_l2)");
    eocc->add_option("--manifest", eoc_manifest, "JSON run manifest");

    // sweep --------------------------------------------------------------------
    MarketParams sweep_params;
    SolverConfig sweep_cfg = SolverConfig::ci_profile();
    std::string sweep_model = "rapm", sweep_values, sweep_dir = ".", sweep_manifest;
    double sweep_C = 0.01;
    int sweep_threads = 0;
    auto* sweep =
        app.add_subcommand("sweep", "boundary deviation sweep over a model parameter grid");
    add_market_options(sweep, sweep_params);
    sweep->add_option("--model", sweep_model, "rapm|barles-soner");
    sweep->add_option("--values", sweep_values, "comma-separated parameter values")
        ->required();
    sweep->add_option("--C", sweep_C, "RAPM transaction cost coefficient");
    sweep->add_option("--nx", sweep_cfg.n, "spatial intervals");
    sweep->add_option("--mt", sweep_cfg.m, "time levels");
    sweep->add_option("--threads", sweep_threads, "worker pool size (0 = auto)");
    sweep->add_option("--out-dir", sweep_dir, "output directory");
    sweep->add_option("--manifest", sweep_manifest, "JSON merged manifest");

    // put-asymptotic -------------------------------------------------------------
    MarketParams put_params;
    put_params.q = 0.0;
    std::string put_taus = "0.001", put_out;
    auto* put = app.add_subcommand("put-asymptotic",
                                   "near-expiry American put boundary (q = 0)");
    add_market_options(put, put_params);
    put->add_option("--tau", put_taus, "comma-separated times to expiry");
    put->add_option("--out", put_out, "boundary CSV (tau,rho)");

    std::vector<std::string> args;
    try {
        args = apply_config_file(argc, argv);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    try {
        // CLI11 parses a reversed vector form
        std::vector<std::string> rev(args.rbegin(), args.rend());
        rev.pop_back();  // program name
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*lin) return cmd_solve_linear(lin_params, lin_cfg, lin_out, lin_manifest);
        if (*price)
            return cmd_price(price_params, price_method, parse_list(price_spots),
                             price_tau, price_n_ie, price_pde_cfg, price_out,
                             price_manifest);
        if (*pde) {
            if (pde_profile == "paper")
                pde_cfg = SolverConfig::paper_profile();
            else if (pde_profile == "ci")
                pde_cfg = SolverConfig::ci_profile();
            else if (!pde_profile.empty())
                throw InvalidParams("solve-pde: --profile must be paper or ci");
            return cmd_solve_pde(pde_params, pde_model, pde_cfg, pde_out, pde_surface,
                                 pde_manifest);
        }
        if (*asian)
            return cmd_solve_asian(asian_params, asian_cfg, asian_out, asian_recip,
                                   asian_manifest);
        if (*gamma)
            return cmd_gamma_solve(gamma_params, gamma_rapm, gamma_cfg, gamma_out,
                                   gamma_manifest);
        if (*rp)
            return cmd_rapm_price(rp_params, rp_rapm, rp_t, rp_smin, rp_smax, rp_count,
                                  rp_cfg, rp_out, rp_manifest);
        if (*cal)
            return cmd_rapm_calibrate(cal_in, cal_C, cal_r, cal_q, cal_t, cal_cfg,
                                      cal_out, cal_manifest);
        if (*orc)
            return cmd_oracle(or_params, or_which,
                              or_payoff == "put" ? Payoff::Put : Payoff::Call,
                              or_style == "european" ? Style::European : Style::American,
                              or_S, or_tau, or_steps, or_psor, or_out, or_boundary);
        if (*eocc)
            return cmd_eoc(eoc_params, eoc_meshes, eoc_ref_n, eoc_L, eoc_threads,
                           eoc_out, eoc_manifest);
        if (*sweep)
            return cmd_sweep(sweep_params, sweep_model, sweep_values, sweep_C, sweep_cfg,
                             sweep_threads, sweep_dir, sweep_manifest);
        if (*put) return cmd_put_asymptotic(put_params, put_taus, put_out);
    } catch (const InvalidParams& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
