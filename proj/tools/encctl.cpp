// encctl: fit bootstrapping polynomials, certify encrypted control loops,
// simulate them, and check the lifting.
//
// Exit codes: 0 ran and produced a verdict, 1 tool or input failure,
// 2 fitted polynomial unusable (gamma >= 1; output is still written).

#include "encctl/analysis.hpp"
#include "encctl/bootpoly.hpp"
#include "encctl/io.hpp"
#include "encctl/simulator.hpp"
#include "encctl/statespace.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace encctl;
using io::Json;

namespace {

fs::path default_out_dir() {
    const char* env = std::getenv("ENCCTL_OUT_DIR");
    return env && *env ? fs::path(env) : fs::path("encctl_out");
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

// ---------------------------------------------------------------------------

struct FitArgs {
    int degree = 25;
    int K = 2;
    double epsilon = 0.5;
    double q = 1.0;
    int samples = 512;
    std::int64_t verify_samples = 200000;
    std::uint64_t seed = 0x5eed;
    std::size_t csv_rows = 4000;
    fs::path out = default_out_dir();
};

int cmd_fit_poly(const FitArgs& a) {
    BootstrapSpec spec{a.q, a.epsilon, a.K, a.degree};
    FitOptions opt;
    opt.samples_per_interval = a.samples;
    opt.verification_samples_per_interval = a.verify_samples;
    opt.verification_seed = a.seed;
    BootstrapPolynomial poly;
    try {
        poly = fit(spec, opt);
    } catch (const FitError& e) {
        std::cerr << "fit-poly: " << e.what() << " (best gamma " << e.best_gamma() << ")\n";
        return 1;
    }
    Json j = io::poly_to_json(poly);
    j["manifest"] = {{"command", "fit-poly"},
                     {"degree", a.degree},
                     {"K", a.K},
                     {"epsilon", a.epsilon},
                     {"q", a.q},
                     {"samples", a.samples},
                     {"verify_samples", a.verify_samples},
                     {"seed", a.seed}};
    io::write_json(a.out / "poly.json", j);
    io::write_poly_csv(a.out / "poly_error.csv", poly, a.csv_rows);
    std::cout << "gamma_certified " << poly.gamma_certified << " (LP objective " << poly.lp_gamma << ", "
              << poly.verification_samples << " verification samples)\n";
    std::cout << "wrote " << (a.out / "poly.json").string() << "\n";
    if (!poly.usable()) {
        std::cerr << "fit-poly: gamma >= 1, polynomial is unusable for bootstrapping\n";
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    fs::path system;
    std::optional<double> gamma;
    std::optional<fs::path> poly;
    int theorem = 1;
    int tbs = 10;
    std::string mode = "bootstrap";
    double tol = 1e-3;
    double hi = 100.0;
    double delta = 1e-7;
    bool report = false;
    fs::path out = default_out_dir();
};

AnalysisMode parse_mode(const std::string& m) {
    if (m == "bootstrap") return AnalysisMode::Bootstrap;
    if (m == "reset") return AnalysisMode::Reset;
    return AnalysisMode::Fir;
}

int cmd_analyze(const AnalyzeArgs& a) {
    const auto [plant, controller] = io::system_from_json(io::read_json(a.system));
    AnalysisRequest req;
    req.plant = plant;
    req.controller = controller;
    req.mode = parse_mode(a.mode);
    req.method = a.theorem == 1 ? Method::Theorem1 : Method::Theorem2;
    req.tbs = a.tbs;
    req.bisection.tol = a.tol;
    req.bisection.hi = a.hi;
    req.bisection.sdp.delta = a.delta;
    if (req.mode == AnalysisMode::Bootstrap) {
        if (a.gamma) req.gamma_sector = *a.gamma;
        else if (a.poly) req.gamma_sector = io::poly_from_json(io::read_json(*a.poly)).gamma_certified;
        else throw CLI::ValidationError("analyze", "bootstrap mode needs --gamma or --poly");
    }

    const AnalysisReport rep = analyze(req);
    Json j = io::report_to_json(rep);
    j["manifest"] = {{"command", "analyze"},
                     {"system", a.system.string()},
                     {"poly", a.poly ? Json(a.poly->string()) : Json(nullptr)},
                     {"gamma", req.gamma_sector},
                     {"theorem", a.theorem},
                     {"tbs", a.tbs},
                     {"mode", a.mode},
                     {"tol", a.tol},
                     {"delta", a.delta}};
    io::write_json(a.out / "analysis.json", j);
    std::cout << to_string(rep.verdict);
    if (rep.gain) std::cout << " gain " << *rep.gain;
    std::cout << " (" << to_string(rep.method) << ", mode " << to_string(rep.mode) << ", T_BS " << rep.tbs
              << ", sector " << rep.gamma_sector << ")\n";

    if (a.report) {
        std::ostringstream md;
        md << "| Test | Mode | T_BS | Sector | Verdict | Certified l2 gain |\n|---|---|---|---|---|---|\n";
        auto line = [&](const AnalysisReport& r) {
            md << "| " << to_string(r.method) << " | " << to_string(r.mode) << " | " << r.tbs << " | "
               << fmt(r.gamma_sector) << " | " << to_string(r.verdict) << " | "
               << (r.gain ? fmt(*r.gain, 3) : std::string("-")) << " |\n";
        };
        line(rep);
        if (req.mode == AnalysisMode::Bootstrap) {
            AnalysisRequest other = req;
            other.method = req.method == Method::Theorem1 ? Method::Theorem2 : Method::Theorem1;
            line(analyze(other));
        }
        write_text(a.out / "analysis_report.md", md.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    fs::path system;
    std::optional<fs::path> scheme;
    std::optional<fs::path> poly;
    int tbs = 10;
    int steps = 10000;
    std::string mode = "encrypted";
    std::uint64_t seed = 1;
    std::string disturbance = "random";
    int trials = 1;
    double norm_budget = 0.0;
    bool include_w2 = false;
    bool report = false;
    fs::path out = default_out_dir();
};

int cmd_simulate(const SimulateArgs& a) {
    if (a.steps < 1) throw std::invalid_argument("--steps must be >= 1");
    const auto [plant, controller] = io::system_from_json(io::read_json(a.system));
    SimulationConfig cfg;
    cfg.plant = plant;
    cfg.controller = controller;
    cfg.tbs = a.tbs;
    cfg.horizon = a.steps;
    cfg.seed = a.seed;
    cfg.disturbance.norm_budget = a.norm_budget;
    cfg.disturbance.include_w2 = a.include_w2;
    const std::map<std::string, DisturbanceKind> kinds{{"zero", DisturbanceKind::Zero},
                                                       {"impulse", DisturbanceKind::Impulse},
                                                       {"random", DisturbanceKind::Random},
                                                       {"aligned", DisturbanceKind::Aligned}};
    cfg.disturbance.kind = kinds.at(a.disturbance);
    const std::map<std::string, SimMode> modes{{"encrypted", SimMode::Encrypted},
                                               {"reset", SimMode::Reset},
                                               {"fir", SimMode::Fir},
                                               {"plaintext", SimMode::PlaintextReference}};
    cfg.mode = modes.at(a.mode);
    if (cfg.mode == SimMode::Encrypted) {
        if (!a.scheme || !a.poly) throw CLI::ValidationError("simulate", "encrypted mode needs --scheme and --poly");
        cfg.scheme = io::scheme_from_json(io::read_json(*a.scheme));
        cfg.poly = io::poly_from_json(io::read_json(*a.poly));
    }

    SimulationResult res;
    try {
        res = run(cfg);
    } catch (const SimulationError& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return 1;
    }
    Json j = {{"manifest",
               {{"command", "simulate"},
                {"system", a.system.string()},
                {"scheme", a.scheme ? Json(a.scheme->string()) : Json(nullptr)},
                {"poly", a.poly ? Json(a.poly->string()) : Json(nullptr)},
                {"tbs", a.tbs},
                {"steps", a.steps},
                {"mode", a.mode},
                {"disturbance", a.disturbance},
                {"trials", a.trials},
                {"norm_budget", a.norm_budget},
                {"include_w2", a.include_w2},
                {"seed", a.seed}}},
              {"result", io::simulation_summary(res)}};

    std::optional<GainEstimate> est;
    if (a.trials > 1) {
        try {
            est = estimate_empirical_gain(cfg, a.trials);
        } catch (const SimulationError& e) {
            std::cerr << "simulate: " << e.what() << "\n";
            return 1;
        }
        j["estimate"] = {{"gain", est->gain},
                         {"best_trial", est->best_trial},
                         {"trial_gains", est->trial_gains},
                         {"assumption_violations", est->assumption_violations}};
    }
    io::write_json(a.out / "simulation.json", j);
    io::write_trajectory_csv(a.out / "trajectory.csv", res);
    if (cfg.mode == SimMode::Encrypted) io::write_telemetry_csv(a.out / "telemetry.csv", res);

    if (res.empirical_gain) std::cout << "empirical gain " << *res.empirical_gain;
    else std::cout << "empirical gain undefined (zero disturbance energy)";
    std::cout << ", assumption violations " << res.assumption_violations << "\n";
    if (est) std::cout << "max over " << a.trials << " trials " << est->gain << " (trial " << est->best_trial << ")\n";

    if (a.report) {
        std::ostringstream md;
        md << "| Quantity | Value |\n|---|---|\n";
        md << "| Mode | " << a.mode << " |\n| T_BS | " << a.tbs << " |\n| Steps | " << a.steps << " |\n";
        md << "| Empirical l2 ratio | " << (res.empirical_gain ? fmt(*res.empirical_gain, 3) : std::string("-"))
           << " |\n";
        if (est) md << "| Max over " << a.trials << " trials | " << fmt(est->gain, 3) << " |\n";
        md << "| Assumption violations | " << res.assumption_violations << " |\n";
        write_text(a.out / "simulation_report.md", md.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct LiftArgs {
    fs::path system;
    int tbs = 10;
    int trials = 100;
    int blocks = 3;
    std::uint64_t seed = 1;
    bool perturb = false;
};

int cmd_lift_check(const LiftArgs& a) {
    const auto [plant, controller] = io::system_from_json(io::read_json(a.system));
    const ClosedLoop cl = interconnect(plant, controller);
    LiftedSystem lifted = lift(cl, a.tbs);
    if (a.perturb) lifted.blocks.A(0, 0) += 1e-6;
    const double dev = lift_deviation(cl, lifted, a.blocks, a.trials, a.seed);
    const bool pass = dev <= 1e-9;
    std::cout << "max deviation " << dev << " over " << a.trials << " trials, T_BS " << a.tbs << ": "
              << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bootstrapping polynomials, LMI certificates and simulation for encrypted controllers"};
    app.require_subcommand(1);

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit-poly", "Fit and verify a relative-error bootstrapping polynomial");
    fit_cmd->add_option("--degree", fa.degree, "Polynomial degree d")->check(CLI::Range(1, 201));
    fit_cmd->add_option("--K", fa.K, "Maximal overflow count")->check(CLI::Range(0, 64));
    fit_cmd->add_option("--epsilon", fa.epsilon, "Relative message range in (0,1)");
    fit_cmd->add_option("--q", fa.q, "Base modulus used for fitting");
    fit_cmd->add_option("--samples", fa.samples, "LP samples per interval");
    fit_cmd->add_option("--verify-samples", fa.verify_samples, "Verification samples per interval");
    fit_cmd->add_option("--seed", fa.seed, "Verification sampling seed");
    fit_cmd->add_option("--csv-rows", fa.csv_rows, "Rows in the error CSV");
    fit_cmd->add_option("--out", fa.out, "Output directory (default $ENCCTL_OUT_DIR)");

    AnalyzeArgs aa;
    auto* an_cmd = app.add_subcommand("analyze", "Certify an l2-gain bound for the encrypted loop");
    an_cmd->add_option("--system", aa.system, "System JSON")->required()->check(CLI::ExistingFile);
    auto* gopt = an_cmd->add_option("--gamma", aa.gamma, "Sector slope of the bootstrapping error");
    an_cmd->add_option("--poly", aa.poly, "Polynomial JSON (uses gamma_certified)")
        ->check(CLI::ExistingFile)
        ->excludes(gopt);
    an_cmd->add_option("--theorem", aa.theorem, "1 = base loop, 2 = lifted loop")->check(CLI::IsMember({1, 2}));
    an_cmd->add_option("--tbs", aa.tbs, "Bootstrapping period / reset period / FIR length")->check(CLI::Range(1, 1000));
    an_cmd->add_option("--mode", aa.mode, "bootstrap, reset or fir")->check(CLI::IsMember({"bootstrap", "reset", "fir"}));
    an_cmd->add_option("--tol", aa.tol, "Bisection tolerance on the gain");
    an_cmd->add_option("--hi", aa.hi, "Initial upper end of the bisection bracket");
    an_cmd->add_option("--delta", aa.delta, "Strictness margin of the LMIs");
    an_cmd->add_flag("--report", aa.report, "Also write a Markdown summary table");
    an_cmd->add_option("--out", aa.out, "Output directory (default $ENCCTL_OUT_DIR)");

    SimulateArgs sa;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate the closed loop and measure the empirical l2 ratio");
    sim_cmd->add_option("--system", sa.system, "System JSON")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--scheme", sa.scheme, "Scheme parameter JSON")->check(CLI::ExistingFile);
    sim_cmd->add_option("--poly", sa.poly, "Polynomial JSON")->check(CLI::ExistingFile);
    sim_cmd->add_option("--tbs", sa.tbs, "Steps between bootstraps / resets, or FIR length");
    sim_cmd->add_option("--steps", sa.steps, "Simulation horizon");
    sim_cmd->add_option("--mode", sa.mode, "encrypted, reset, fir or plaintext")
        ->check(CLI::IsMember({"encrypted", "reset", "fir", "plaintext"}));
    sim_cmd->add_option("--seed", sa.seed, "Seed for disturbances and encryption randomness");
    sim_cmd->add_option("--disturbance", sa.disturbance, "zero, impulse, random or aligned")
        ->check(CLI::IsMember({"zero", "impulse", "random", "aligned"}));
    sim_cmd->add_option("--trials", sa.trials, "Trials for the max-over-trials estimate")->check(CLI::Range(1, 100000));
    sim_cmd->add_option("--norm-budget", sa.norm_budget, "Rescale the disturbance to this l2 norm");
    sim_cmd->add_flag("--include-w2", sa.include_w2, "Also disturb the controller-side channel");
    sim_cmd->add_flag("--report", sa.report, "Also write a Markdown summary table");
    sim_cmd->add_option("--out", sa.out, "Output directory (default $ENCCTL_OUT_DIR)");

    LiftArgs la;
    auto* lift_cmd = app.add_subcommand("lift-check", "Compare lifted and base trajectories");
    lift_cmd->add_option("--system", la.system, "System JSON")->required()->check(CLI::ExistingFile);
    lift_cmd->add_option("--tbs", la.tbs, "Lifting horizon")->check(CLI::Range(1, 1000));
    lift_cmd->add_option("--trials", la.trials, "Random trials")->check(CLI::Range(1, 1000000));
    lift_cmd->add_option("--blocks", la.blocks, "Lifted steps per trial")->check(CLI::Range(1, 1000));
    lift_cmd->add_option("--seed", la.seed, "Seed");
    lift_cmd->add_flag("--perturb-lifted", la.perturb, "Corrupt the lifted A matrix (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*fit_cmd) return cmd_fit_poly(fa);
        if (*an_cmd) return cmd_analyze(aa);
        if (*sim_cmd) return cmd_simulate(sa);
        if (*lift_cmd) return cmd_lift_check(la);
    } catch (const CLI::Error& e) {
        std::cerr << "encctl: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "encctl: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
