#include "refract/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace refract {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number()) {
        throw ValidationError("model config: missing or non-numeric field \"" + field + "\"");
    }
    return j[field].get<double>();
}

}  // namespace

LevyModel model_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("model config: top-level JSON object expected");
    const double sigma = require_number(j, "sigma");
    const double premium = require_number(j, "premium");

    std::optional<JumpMeasure> jumps;
    if (j.contains("jumps") && !j["jumps"].is_null()) {
        const json& jj = j["jumps"];
        if (!jj.is_object()) throw ValidationError("model config: \"jumps\" must be an object");
        if (!jj.contains("type") || !jj["type"].is_string())
            throw ValidationError("model config: missing or non-string field \"jumps.type\"");
        const std::string type = jj["type"].get<std::string>();
        JumpFamily family;
        if (type == "hyperexp")
            family = JumpFamily::HyperExponential;
        else if (type == "erlang_mixture")
            family = JumpFamily::ErlangMixture;
        else
            throw ValidationError("model config: \"jumps.type\" must be \"hyperexp\" or "
                                  "\"erlang_mixture\", got \"" + type + "\"");
        const double rate = require_number(jj, "rate");
        if (!jj.contains("components") || !jj["components"].is_array() ||
            jj["components"].empty())
            throw ValidationError(
                "model config: \"jumps.components\" must be a non-empty array");
        std::vector<JumpComponent> comps;
        for (const auto& cj : jj["components"]) {
            JumpComponent c;
            c.weight = require_number(cj, "weight");
            c.alpha = require_number(cj, "alpha");
            if (cj.contains("shape") && !cj["shape"].is_null()) {
                if (!cj["shape"].is_number_integer())
                    throw ValidationError("model config: \"shape\" must be an integer");
                c.shape = cj["shape"].get<int>();
            }
            comps.push_back(c);
        }
        jumps.emplace(family, rate, std::move(comps));
    }
    return LevyModel(sigma, premium, std::move(jumps));
}

json model_to_json(const LevyModel& model) {
    json j;
    j["sigma"] = model.sigma();
    j["premium"] = model.premium();
    if (model.jumps()) {
        const auto& jm = *model.jumps();
        json jj;
        jj["type"] =
            jm.family() == JumpFamily::HyperExponential ? "hyperexp" : "erlang_mixture";
        jj["rate"] = jm.rate();
        json comps = json::array();
        for (const auto& c : jm.components()) {
            json cj;
            cj["weight"] = c.weight;
            cj["alpha"] = c.alpha;
            if (jm.family() == JumpFamily::ErlangMixture) cj["shape"] = c.shape;
            comps.push_back(cj);
        }
        jj["components"] = comps;
        j["jumps"] = jj;
    } else {
        j["jumps"] = nullptr;
    }
    return j;
}

LevyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("model config is not valid JSON: " + std::string(e.what()));
    }
    return model_from_json(j);
}

GridSpec GridSpec::parse(const std::string& text) {
    GridSpec g;
    char extra;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &g.start, &g.stop, &g.n, &extra) != 3)
        throw ValidationError("grid: expected \"start:stop:n\", got \"" + text + "\"");
    if (g.n < 2) throw ValidationError("grid: n must be >= 2");
    if (!(g.stop > g.start)) throw ValidationError("grid: stop must exceed start");
    return g;
}

std::vector<double> GridSpec::points() const {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = start + (stop - start) * i / (n - 1);
    return xs;
}

std::string format_sig17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

void write_scale_csv(std::ostream& os, const ScaleFunction& scale,
                     const std::vector<double>& grid) {
    os << "x,W,W1,W2\n";
    const bool second = scale.supports_order(2);
    for (double x : grid) {
        os << format_sig17(x) << ',' << format_sig17(scale.eval(x, 0)) << ','
           << format_sig17(scale.eval(x, 1)) << ',';
        if (second) os << format_sig17(scale.eval(x, 2));
        os << '\n';
    }
}

void write_value_csv(std::ostream& os, const ValueFunction& vf, const std::vector<double>& grid) {
    os << "x,v,v1\n";
    for (double x : grid)
        os << format_sig17(x) << ',' << format_sig17(vf.value(x)) << ','
           << format_sig17(vf.derivative(x)) << '\n';
}

void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& paths) {
    os << "path_id,ruin_time_or_T,discounted_dividends\n";
    for (const auto& p : paths)
        os << p.path_id << ',' << format_sig17(p.ruin_time) << ','
           << format_sig17(p.discounted_dividends) << '\n';
}

json classify_to_json(const LevyModel& model) {
    const auto info = classify(model);
    json j;
    j["variation"] = info.variation == PathVariation::BoundedVariation ? "bounded" : "unbounded";
    j["premium"] = info.premium;
    j["jump_mass"] = info.jump_mass;
    j["sigma"] = model.sigma();
    j["gamma"] = model.gamma();
    j["mean_x1"] = model.mean();
    j["completely_monotone_jumps"] = model.completely_monotone_jumps();
    return j;
}

json hjb_to_json(const HjbReport& report) {
    json j;
    j["holds"] = report.holds;
    j["worst_violation"] = report.worst_violation;
    j["location"] = report.location;
    if (report.zero_threshold_criterion)
        j["zero_threshold_criterion"] = *report.zero_threshold_criterion;
    if (report.v0_prime_decreasing) j["v0_prime_decreasing"] = *report.v0_prime_decreasing;
    return j;
}

json solution_to_json(const ThresholdSolution& sol, const RefractionProblem& problem,
                      const HjbReport& hjb) {
    json j;
    j["b_star"] = sol.b_star;
    j["case"] = to_string(sol.threshold_case);
    j["a_star"] = sol.a_star;
    j["phi_q"] = problem.phi_q();
    j["Phi_q"] = problem.Phi_q();
    j["h_at_bstar"] = sol.h_at_bstar;
    j["unique_minimizer"] = sol.unique_minimizer;
    j["hjb"] = hjb_to_json(hjb);
    return j;
}

json estimate_to_json(const SimEstimate& est) {
    json j;
    j["mean"] = est.mean;
    j["stderr"] = est.std_error;
    j["n_paths"] = est.n_paths;
    j["n_ruined"] = est.n_ruined;
    j["T"] = est.horizon;
    j["bias_bound"] = est.bias_bound;
    j["seed"] = est.seed;
    return j;
}

}  // namespace refract
