#include "refract/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <span>
#include <thread>

#include "refract/philox.hpp"

namespace refract {

namespace {

double sample_claim(const JumpMeasure& jumps, PathRng& rng) {
    double u = rng.uniform();
    const auto& comps = jumps.components();
    size_t pick = comps.size() - 1;
    double acc = 0.0;
    for (size_t k = 0; k < comps.size(); ++k) {
        acc += comps[k].weight;
        if (u < acc) {
            pick = k;
            break;
        }
    }
    double z = 0.0;
    for (int j = 0; j < comps[pick].shape; ++j) z += rng.exponential(comps[pick].alpha);
    return z;
}

struct PathOutcome {
    double dividends = 0.0;
    double ruin_time = 0.0;
    bool ruined = false;
};

// Exact event-driven path for bounded-variation models.
PathOutcome run_exact_path(const LevyModel& model, double delta, double q, double b, double x0,
                           double horizon, PathRng& rng) {
    const double c = model.premium();
    const double eta = model.jump_rate();
    const JumpMeasure& jumps = *model.jumps();

    PathOutcome out;
    double t = 0.0, u = x0;
    while (true) {
        const double wait = rng.exponential(eta);
        const double seg = std::min(wait, horizon - t);
        const auto step = advance_segment(u, b, c, delta, q, t, seg);
        out.dividends += step.dividends;
        u = step.end_level;
        if (t + wait >= horizon) {
            out.ruin_time = horizon;
            return out;
        }
        t += wait;
        u -= sample_claim(jumps, rng);
        if (u < 0.0) {
            out.ruined = true;
            out.ruin_time = t;
            return out;
        }
    }
}

// Euler path for sigma > 0; the payout indicator is frozen over each step.
PathOutcome run_euler_path(const LevyModel& model, double delta, double q, double b, double x0,
                           double horizon, double dt, PathRng& rng) {
    const double c = model.premium();
    const double sigma = model.sigma();
    const double eta = model.jump_rate();

    PathOutcome out;
    double t = 0.0, u = x0;
    while (t < horizon) {
        const double step = std::min(dt, horizon - t);
        const bool paying = u >= b;
        if (paying) out.dividends += delta * std::exp(-q * t) * (-std::expm1(-q * step)) / q;
        double jump_sum = 0.0;
        if (eta > 0.0) {
            double arrival = rng.exponential(eta);
            while (arrival < step) {
                jump_sum += sample_claim(*model.jumps(), rng);
                arrival += rng.exponential(eta);
            }
        }
        u += (c - (paying ? delta : 0.0)) * step + sigma * std::sqrt(step) * rng.normal() -
             jump_sum;
        t += step;
        if (u < 0.0) {
            out.ruined = true;
            out.ruin_time = t;
            return out;
        }
    }
    out.ruin_time = horizon;
    return out;
}

double resolve_horizon(const SimConfig& config, double delta, double q) {
    if (config.horizon > 0.0) return config.horizon;
    if (config.bias_tol > 0.0) {
        if (!(config.bias_tol < delta / q))
            throw ValidationError("sim config: bias_tol must be below delta/q");
        return std::log(delta / (q * config.bias_tol)) / q;
    }
    throw ValidationError("sim config: set horizon > 0 or bias_tol > 0");
}

int resolve_workers(const SimConfig& config, std::int64_t n_paths) {
    int workers = config.workers > 0 ? config.workers
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (const char* cap = std::getenv("REFRACT_THREADS")) {
        int limit = std::atoi(cap);
        if (limit >= 1) workers = std::min(workers, limit);
    }
    return static_cast<int>(std::min<std::int64_t>(workers, n_paths));
}

void validate_config(const LevyModel& model, const SimConfig& config) {
    if (config.n_paths < 1) throw ValidationError("sim config: n_paths must be >= 1");
    if (model.sigma() > 0.0 && !(config.euler_dt > 0.0))
        throw ValidationError("sim config: euler_dt must be > 0 when sigma > 0");
}

struct RunResult {
    std::vector<double> dividends;
    std::vector<double> ruin_times;
    std::int64_t n_ruined = 0;
};

RunResult run_paths(const RefractionProblem& problem, double b, double x0,
                    const SimConfig& config, double horizon) {
    const LevyModel& model = problem.model();
    const double delta = problem.params().delta;
    const double q = problem.params().q;
    const std::int64_t n = config.n_paths;

    RunResult result;
    result.dividends.resize(n);
    result.ruin_times.resize(n);

    const int workers = resolve_workers(config, n);
    std::vector<std::int64_t> ruined_per_worker(workers, 0);
    auto run_range = [&](int worker, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            PathRng rng(config.seed, static_cast<std::uint64_t>(i));
            PathOutcome out =
                model.bounded_variation()
                    ? run_exact_path(model, delta, q, b, x0, horizon, rng)
                    : run_euler_path(model, delta, q, b, x0, horizon, config.euler_dt, rng);
            result.dividends[i] = out.dividends;
            result.ruin_times[i] = out.ruin_time;
            if (out.ruined) ++ruined_per_worker[worker];
        }
    };

    if (workers == 1) {
        run_range(0, 0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::int64_t chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::int64_t lo = w * chunk;
            const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, w, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (auto r : ruined_per_worker) result.n_ruined += r;
    return result;
}

}  // namespace

SegmentResult advance_segment(double u, double b, double c, double delta, double q, double t0,
                              double dt) {
    if (dt <= 0.0) return {0.0, u};
    const double discount = std::exp(-q * t0);
    if (u >= b) {
        // At or above the threshold the process pays throughout; the drift
        // c - delta is positive under (H) so it cannot fall back below b.
        return {delta / q * discount * (-std::expm1(-q * dt)), u + (c - delta) * dt};
    }
    const double hit = (b - u) / c;
    if (hit >= dt) return {0.0, u + c * dt};
    const double pay = delta / q * discount * std::exp(-q * hit) * (-std::expm1(-q * (dt - hit)));
    return {pay, b + (c - delta) * (dt - hit)};
}

double pairwise_sum(const std::vector<double>& values) {
    struct Rec {
        static double sum(std::span<const double> v) {
            if (v.size() <= 8) {
                double acc = 0.0;
                for (double d : v) acc += d;
                return acc;
            }
            const size_t half = v.size() / 2;
            return sum(v.first(half)) + sum(v.subspan(half));
        }
    };
    return Rec::sum(values);
}

SimEstimate simulate_value(const RefractionProblem& problem, double b, double x0,
                           const SimConfig& config, std::vector<PathRecord>* dump) {
    if (!(x0 >= 0.0)) throw ValidationError("simulate_value: x0 must be >= 0");
    if (!(b >= 0.0)) throw ValidationError("simulate_value: b must be >= 0");
    validate_config(problem.model(), config);
    const double delta = problem.params().delta;
    const double q = problem.params().q;
    const double horizon = resolve_horizon(config, delta, q);

    auto run = run_paths(problem, b, x0, config, horizon);

    const auto n = config.n_paths;
    SimEstimate est;
    est.n_paths = n;
    est.n_ruined = run.n_ruined;
    est.horizon = horizon;
    est.seed = config.seed;
    est.bias_bound = delta / q * std::exp(-q * horizon);
    est.mean = pairwise_sum(run.dividends) / static_cast<double>(n);
    if (n > 1) {
        std::vector<double> sq(run.dividends.size());
        for (size_t i = 0; i < sq.size(); ++i) {
            const double d = run.dividends[i] - est.mean;
            sq[i] = d * d;
        }
        est.std_error = std::sqrt(pairwise_sum(sq) / (static_cast<double>(n) * (n - 1)));
    }
    if (dump) {
        dump->clear();
        dump->reserve(n);
        for (std::int64_t i = 0; i < n; ++i)
            dump->push_back({i, run.ruin_times[i], run.dividends[i]});
    }
    return est;
}

SurvivalEstimate survival_probability(const RefractionProblem& problem, double b, double x0,
                                      const SimConfig& config) {
    if (!(x0 >= 0.0)) throw ValidationError("survival_probability: x0 must be >= 0");
    validate_config(problem.model(), config);
    const double delta = problem.params().delta;
    const double q = problem.params().q;
    const double horizon = resolve_horizon(config, delta, q);

    auto run = run_paths(problem, b, x0, config, horizon);

    SurvivalEstimate est;
    est.n_paths = config.n_paths;
    const double p =
        1.0 - static_cast<double>(run.n_ruined) / static_cast<double>(config.n_paths);
    est.probability = p;
    est.std_error = std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(config.n_paths)));
    est.positive_drift = problem.model().mean() > delta;
    return est;
}

}  // namespace refract
