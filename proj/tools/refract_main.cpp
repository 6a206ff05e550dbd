#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "refract/model_io.hpp"

namespace {

using nlohmann::json;
using namespace refract;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

void emit(const json& report, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << report.dump(2) << "\n";
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw ValidationError("cannot open output file: " + out_path);
    os << report.dump(2) << "\n";
}

void emit_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw ValidationError("cannot open output file: " + out_path);
    os << text;
}

struct CommonOpts {
    std::string model_path;
    std::string out_path;
    std::string format;  // empty = command default (csv for grid dumps, json otherwise)
    double q = 0.0;
    double delta = 0.0;

    void require_format(const char* cmd, const char* expected) const {
        if (!format.empty() && format != expected)
            throw ValidationError(std::string(cmd) + ": --format must be " + expected);
    }
};

json resolved_config(const LevyModel& model, const CommonOpts& opts) {
    json c;
    c["model"] = model_to_json(model);
    if (opts.q > 0.0) c["q"] = opts.q;
    if (opts.delta > 0.0) c["delta"] = opts.delta;
    return c;
}

LevyModel remark_counterexample_model() {
    // Cramer-Lundberg surplus: premium 20.67, Gamma(2,1) claims at rate 10.
    return LevyModel(0.0, 20.67,
                     JumpMeasure::erlang_mixture(10.0, {JumpComponent{1.0, 1.0, 2}}));
}

int cmd_info(const CommonOpts& opts) {
    opts.require_format("info", "json");
    LevyModel model = load_model(opts.model_path);
    json report = classify_to_json(model);
    report["config"] = resolved_config(model, opts);
    emit(report, opts.out_path);
    return kExitOk;
}

int cmd_scale(const CommonOpts& opts, const std::string& grid_text) {
    opts.require_format("scale", "csv");
    LevyModel model = load_model(opts.model_path);
    if (!(opts.q > 0.0)) throw ValidationError("scale: --q > 0 is required");
    auto grid = GridSpec::parse(grid_text).points();
    auto scale = build_scale(model, opts.q, opts.delta);
    std::ostringstream os;
    write_scale_csv(os, scale, grid);
    emit_text(os.str(), opts.out_path);
    return kExitOk;
}

int cmd_solve(const CommonOpts& opts) {
    opts.require_format("solve", "json");
    LevyModel model = load_model(opts.model_path);
    RefractionProblem problem(model, {opts.delta, opts.q});
    auto sol = b_star(problem);
    ValueFunction vf(problem, sol.b_star);
    auto hjb = hjb_verify(vf, hjb_default_xmax(problem, sol.b_star), 2000);
    json report = solution_to_json(sol, problem, hjb);
    report["config"] = resolved_config(model, opts);
    emit(report, opts.out_path);
    return kExitOk;
}

int cmd_value(const CommonOpts& opts, double b, const std::string& grid_text) {
    opts.require_format("value", "csv");
    LevyModel model = load_model(opts.model_path);
    RefractionProblem problem(model, {opts.delta, opts.q});
    ValueFunction vf(problem, b);
    auto grid = GridSpec::parse(grid_text).points();
    std::ostringstream os;
    write_value_csv(os, vf, grid);
    emit_text(os.str(), opts.out_path);
    return kExitOk;
}

int cmd_verify(const CommonOpts& opts, std::optional<double> b, std::optional<double> x_max,
               int grid_n) {
    opts.require_format("verify", "json");
    LevyModel model = load_model(opts.model_path);
    RefractionProblem problem(model, {opts.delta, opts.q});
    double threshold = b ? *b : b_star(problem).b_star;
    ValueFunction vf(problem, threshold);
    auto hjb = hjb_verify(vf, x_max ? *x_max : hjb_default_xmax(problem, threshold), grid_n);
    json report = hjb_to_json(hjb);
    report["b"] = threshold;
    report["config"] = resolved_config(model, opts);
    emit(report, opts.out_path);
    return kExitOk;
}

int cmd_simulate(const CommonOpts& opts, double b, double x0, const SimConfig& config,
                 const std::string& paths_csv) {
    opts.require_format("simulate", "json");
    LevyModel model = load_model(opts.model_path);
    RefractionProblem problem(model, {opts.delta, opts.q});
    std::vector<PathRecord> records;
    auto est = simulate_value(problem, b, x0, config, paths_csv.empty() ? nullptr : &records);
    json report = estimate_to_json(est);
    report["config"] = resolved_config(model, opts);
    report["config"]["b"] = b;
    report["config"]["x0"] = x0;
    emit(report, opts.out_path);
    if (!paths_csv.empty()) {
        std::ofstream os(paths_csv);
        if (!os) throw ValidationError("cannot open per-path dump: " + paths_csv);
        write_paths_csv(os, records);
    }
    return kExitOk;
}

int cmd_reproduce_remark(const CommonOpts& opts, double q, double delta) {
    if (!(q > 0.0)) throw ValidationError("reproduce-remark: q must be > 0");
    const bool stock = q == 0.1 && delta == 20.59;
    LevyModel model = remark_counterexample_model();
    auto w = build_scale(model, q, 0.0);

    bool convex = true;
    for (int k = 1; k <= 1000; ++k) {
        double x = 0.01 + (20.0 - 0.01) * k / 1000.0;
        if (!(w.eval(x, 2) > 0.0)) convex = false;
    }

    RefractionProblem problem(model, {delta, q});
    bool h_increasing = true;
    for (int k = 0; k <= 1000; ++k)
        if (!(problem.h_prime(20.0 * k / 1000.0) > 0.0)) h_increasing = false;

    auto sol = b_star(problem);
    ValueFunction v0(problem, sol.b_star);
    auto hjb = hjb_verify(v0, hjb_default_xmax(problem, sol.b_star), 2000);

    std::ostringstream table;
    table << "quantity,value,expected,pass\n";
    table << "W2_positive_on_(0.01,20]," << (convex ? "true" : "false") << ",true,"
          << (convex ? "1" : "0") << "\n";
    table << "h_increasing_on_[0,20]," << (h_increasing ? "true" : "false") << ","
          << (stock ? "true" : "-") << "," << (!stock || h_increasing ? "1" : "0") << "\n";
    table << "b_star," << format_sig17(sol.b_star) << "," << (stock ? "0" : "-") << ","
          << (!stock || sol.b_star == 0.0 ? "1" : "0") << "\n";

    bool band_ok = true;
    if (sol.b_star == 0.0) {
        const double slope = v0.derivative(3.15);
        band_ok = !stock || (slope >= 1.0000 && slope <= 1.0010);
        table << "v0_prime_at_3.15," << format_sig17(slope) << ","
              << (stock ? "[1.0000,1.0010]" : "-") << "," << (band_ok ? "1" : "0") << "\n";
    }
    table << "hjb_holds," << (hjb.holds ? "true" : "false") << "," << (stock ? "false" : "-")
          << "," << (!stock || !hjb.holds ? "1" : "0") << "\n";
    table << "hjb_worst_violation_at," << format_sig17(hjb.location) << ","
          << (stock ? "~3.15" : "-") << ",-\n";
    emit_text(table.str(), opts.out_path);

    if (stock && (!convex || !h_increasing || sol.b_star != 0.0 || !band_ok || hjb.holds))
        throw ConsistencyError("reproduce-remark: a reference quantity left its band");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"refract: refraction dividend strategies for spectrally negative Levy models"};
    app.require_subcommand(1);

    CommonOpts opts;
    double b = 0.0, x0 = 0.0, x_max_in = 0.0;
    bool has_b = false, has_xmax = false;
    std::string grid_text, paths_csv;
    int grid_n = 2000;
    SimConfig sim;
    double remark_q = 0.1, remark_delta = 20.59;

    auto add_common = [&](CLI::App* cmd, bool needs_model) {
        auto* m = cmd->add_option("--model", opts.model_path, "model config JSON path");
        if (needs_model) m->required();
        cmd->add_option("--out", opts.out_path, "output path (stdout when omitted)");
        cmd->add_option("--format", opts.format, "output format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    auto* info = app.add_subcommand("info", "describe a model config");
    add_common(info, true);

    auto* scale = app.add_subcommand("scale", "dump a scale function on a grid (CSV)");
    add_common(scale, true);
    scale->add_option("--q", opts.q, "discount rate")->required();
    scale->add_option("--delta", opts.delta, "shift: 0 for W, delta for the refracted scale");
    scale->add_option("--grid", grid_text, "grid start:stop:n")->required();

    auto* solve = app.add_subcommand("solve", "compute b*, the trichotomy case and HJB report");
    add_common(solve, true);
    solve->add_option("--q", opts.q, "discount rate")->required();
    solve->add_option("--delta", opts.delta, "ceiling dividend rate")->required();

    auto* value = app.add_subcommand("value", "dump v_b and v_b' on a grid (CSV)");
    add_common(value, true);
    value->add_option("--q", opts.q, "discount rate")->required();
    value->add_option("--delta", opts.delta, "ceiling dividend rate")->required();
    value->add_option("--b", b, "refraction threshold")->required();
    value->add_option("--grid", grid_text, "grid start:stop:n")->required();

    auto* verify = app.add_subcommand("verify", "HJB slope verification report");
    add_common(verify, true);
    verify->add_option("--q", opts.q, "discount rate")->required();
    verify->add_option("--delta", opts.delta, "ceiling dividend rate")->required();
    verify->add_option("--b", b, "threshold (defaults to b*)")->each([&](const std::string&) {
        has_b = true;
    });
    verify->add_option("--xmax", x_max_in, "verification window")->each([&](const std::string&) {
        has_xmax = true;
    });
    verify->add_option("--grid-n", grid_n, "grid points (>= 100)");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo dividend estimate");
    add_common(simulate, true);
    simulate->add_option("--q", opts.q, "discount rate")->required();
    simulate->add_option("--delta", opts.delta, "ceiling dividend rate")->required();
    simulate->add_option("--b", b, "refraction threshold")->required();
    simulate->add_option("--x0", x0, "initial capital")->required();
    simulate->add_option("--paths", sim.n_paths, "number of paths");
    simulate->add_option("--seed", sim.seed, "RNG seed");
    simulate->add_option("--horizon", sim.horizon, "truncation horizon T");
    simulate->add_option("--bias-tol", sim.bias_tol, "derive T from this bias bound");
    simulate->add_option("--dt", sim.euler_dt, "Euler step (sigma > 0 models)");
    simulate->add_option("--dump-paths", paths_csv, "per-path CSV output path");

    auto* remark = app.add_subcommand(
        "reproduce-remark", "reproduce the zero-threshold counterexample comparison table");
    add_common(remark, false);
    remark->add_option("--q", remark_q, "discount rate (default 0.1)");
    remark->add_option("--delta", remark_delta, "ceiling rate (default 20.59)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*info) return cmd_info(opts);
        if (*scale) return cmd_scale(opts, grid_text);
        if (*solve) return cmd_solve(opts);
        if (*value) return cmd_value(opts, b, grid_text);
        if (*verify)
            return cmd_verify(opts, has_b ? std::optional(b) : std::nullopt,
                              has_xmax ? std::optional(x_max_in) : std::nullopt, grid_n);
        if (*simulate) return cmd_simulate(opts, b, x0, sim, paths_csv);
        if (*remark) return cmd_reproduce_remark(opts, remark_q, remark_delta);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
