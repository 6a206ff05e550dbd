#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "refract/levy_model.hpp"
#include "refract/refraction.hpp"
#include "refract/scale_function.hpp"
#include "refract/simulate.hpp"

namespace refract {

/// Model config schema:
/// {"sigma": num, "premium": num,
///  "jumps": {"type": "hyperexp"|"erlang_mixture", "rate": num,
///            "components": [{"weight": num, "alpha": num, "shape": int?}]}}
/// "jumps" may be null or absent for a pure Gaussian model. Field names are
/// part of the CLI contract; missing or mistyped fields raise ValidationError
/// naming the offending field.
LevyModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const LevyModel& model);
LevyModel load_model(const std::string& path);

/// "start:stop:n" -> n evenly spaced points including both endpoints.
struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    int n = 0;
    static GridSpec parse(const std::string& text);
    std::vector<double> points() const;
};

/// 17 significant digits, the CSV number format.
std::string format_sig17(double v);

/// CSV columns x, W, W1, W2 (W2 blank when unsupported); header mandatory.
void write_scale_csv(std::ostream& os, const ScaleFunction& scale,
                     const std::vector<double>& grid);

/// CSV columns x, v, v1.
void write_value_csv(std::ostream& os, const ValueFunction& vf, const std::vector<double>& grid);

/// CSV columns path_id, ruin_time_or_T, discounted_dividends.
void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& paths);

nlohmann::json classify_to_json(const LevyModel& model);
nlohmann::json hjb_to_json(const HjbReport& report);
nlohmann::json solution_to_json(const ThresholdSolution& sol, const RefractionProblem& problem,
                                const HjbReport& hjb);
nlohmann::json estimate_to_json(const SimEstimate& est);

}  // namespace refract
