#include "refract/jump_measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace refract {

namespace {

constexpr double kWeightSumTol = 1e-12;

// Regularized lower incomplete gamma P(m, x) for integer m >= 1:
// P(m, x) = 1 - e^{-x} sum_{j<m} x^j/j!
double reg_gamma_p(int m, double x) {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < m; ++j) {
        term *= x / j;
        sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
}

}  // namespace

JumpMeasure::JumpMeasure(JumpFamily family, double rate, std::vector<JumpComponent> components)
    : family_(family), rate_(rate), components_(std::move(components)) {
    if (!(rate_ > 0.0)) throw ValidationError("jump measure: total rate must be > 0");
    if (components_.empty()) throw ValidationError("jump measure: needs at least one component");
    double wsum = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0)) throw ValidationError("jump measure: weights must be > 0");
        if (!(c.alpha > 0.0)) throw ValidationError("jump measure: rates alpha must be > 0");
        if (c.shape < 1) throw ValidationError("jump measure: Erlang shapes must be >= 1");
        if (family_ == JumpFamily::HyperExponential && c.shape != 1)
            throw ValidationError("jump measure: hyperexponential components must have shape 1");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > kWeightSumTol) {
        std::ostringstream os;
        os << "jump measure: weights sum to " << wsum << ", expected 1 within " << kWeightSumTol;
        throw ValidationError(os.str());
    }
}

JumpMeasure JumpMeasure::hyper_exponential(double rate,
                                           std::vector<std::pair<double, double>> weight_alpha) {
    std::vector<JumpComponent> comps;
    comps.reserve(weight_alpha.size());
    for (auto [w, a] : weight_alpha) comps.push_back({w, a, 1});
    return JumpMeasure(JumpFamily::HyperExponential, rate, std::move(comps));
}

JumpMeasure JumpMeasure::erlang_mixture(double rate, std::vector<JumpComponent> components) {
    return JumpMeasure(JumpFamily::ErlangMixture, rate, std::move(components));
}

bool JumpMeasure::completely_monotone() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const JumpComponent& c) { return c.shape == 1; });
}

double JumpMeasure::density(double z) const {
    if (z <= 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& c : components_) {
        double logp = c.shape * std::log(c.alpha) + (c.shape - 1) * std::log(z) - c.alpha * z;
        for (int j = 2; j < c.shape; ++j) logp -= std::log(static_cast<double>(j));
        acc += c.weight * std::exp(logp);
    }
    return acc;
}

double JumpMeasure::mean_claim() const {
    double acc = 0.0;
    for (const auto& c : components_) acc += c.weight * c.shape / c.alpha;
    return acc;
}

double JumpMeasure::truncated_mean_claim() const {
    // int_0^1 z * Erlang(m, alpha) density dz = (m/alpha) P(m+1, alpha)
    double acc = 0.0;
    for (const auto& c : components_)
        acc += c.weight * (c.shape / c.alpha) * reg_gamma_p(c.shape + 1, c.alpha);
    return acc;
}

double JumpMeasure::min_alpha() const {
    double m = components_.front().alpha;
    for (const auto& c : components_) m = std::min(m, c.alpha);
    return m;
}

int JumpMeasure::max_shape() const {
    int m = 1;
    for (const auto& c : components_) m = std::max(m, c.shape);
    return m;
}

}  // namespace refract
