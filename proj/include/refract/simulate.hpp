#pragma once

#include <cstdint>
#include <vector>

#include "refract/refraction.hpp"

namespace refract {

/// Monte Carlo configuration. The horizon T truncates non-ruined paths; total
/// future dividends past T are worth at most (delta/q) e^{-qT} discounted,
/// which is the reported bias bound. Either set horizon directly or leave it
/// at 0 and set bias_tol to have T derived.
struct SimConfig {
    std::int64_t n_paths = 100000;
    double horizon = 0.0;
    double bias_tol = 0.0;
    double euler_dt = 1e-3;  // used only when sigma > 0
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = hardware concurrency; capped by REFRACT_THREADS
};

struct SimEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double bias_bound = 0.0;
    std::int64_t n_paths = 0;
    std::int64_t n_ruined = 0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
};

struct PathRecord {
    std::int64_t path_id = 0;
    double ruin_time = 0.0;  // horizon T when the path never ruined
    double discounted_dividends = 0.0;
};

/// Expected discounted dividends of the refraction strategy at threshold b
/// started from x0, estimated on independent per-path Philox streams.
/// Bounded-variation models are simulated exactly event by event (the drift
/// is piecewise constant and positive under (H), so level crossings and the
/// discounted-dividend integral between jumps are closed form and ruin can
/// only happen at jump epochs). Models with sigma > 0 use Euler stepping with
/// the payout indicator frozen per step.
///
/// b may be +infinity, in which case no dividends are ever paid.
SimEstimate simulate_value(const RefractionProblem& problem, double b, double x0,
                           const SimConfig& config, std::vector<PathRecord>* dump = nullptr);

struct SurvivalEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    /// psi'(0+) > delta: survival should stay bounded away from zero as the
    /// horizon grows.
    bool positive_drift = false;
};

SurvivalEstimate survival_probability(const RefractionProblem& problem, double b, double x0,
                                      const SimConfig& config);

/// Discounted dividends collected over one deterministic drift segment of an
/// exactly simulated path: start level u at absolute time t0, duration dt,
/// drift c below the threshold and c - delta at or above it (the boundary
/// pays). Returns the discounted dividend increment and the end level.
/// Exposed so tests can pin the closed form against a Riemann sum.
struct SegmentResult {
    double dividends = 0.0;
    double end_level = 0.0;
};
SegmentResult advance_segment(double u, double b, double c, double delta, double q, double t0,
                              double dt);

/// Deterministic pairwise sum used by the estimate reduction.
double pairwise_sum(const std::vector<double>& values);

}  // namespace refract
