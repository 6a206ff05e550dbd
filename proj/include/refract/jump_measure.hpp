#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "refract/errors.hpp"

namespace refract {

enum class JumpFamily {
    HyperExponential,  // density eta * sum a_k alpha_k e^{-alpha_k z}
    ErlangMixture,     // density eta * sum a_k alpha_k^{m_k} z^{m_k-1} e^{-alpha_k z}/(m_k-1)!
};

struct JumpComponent {
    double weight = 0.0;  // a_k, weights sum to 1
    double alpha = 0.0;   // rate alpha_k > 0
    int shape = 1;        // Erlang shape m_k >= 1 (1 for hyperexponential)
};

/// Finite-activity jump measure nu(dz) = rate * p(z) dz on (0, infinity),
/// where p is a probability density from one of the two parametric families.
/// Both families have rational Laplace transforms; the hyperexponential one
/// additionally has a completely monotone density.
class JumpMeasure {
public:
    JumpMeasure(JumpFamily family, double rate, std::vector<JumpComponent> components);

    static JumpMeasure hyper_exponential(double rate,
                                         std::vector<std::pair<double, double>> weight_alpha);
    static JumpMeasure erlang_mixture(double rate, std::vector<JumpComponent> components);

    JumpFamily family() const { return family_; }
    double rate() const { return rate_; }  // total mass nu(0, infinity)
    const std::vector<JumpComponent>& components() const { return components_; }

    /// True when the claim density is completely monotone (a mixture of
    /// exponentials), i.e. hyperexponential or an Erlang mixture with all
    /// shapes equal to one.
    bool completely_monotone() const;

    /// Claim density p(z), normalised to integrate to one.
    double density(double z) const;

    /// E[Z] = sum a_k m_k / alpha_k.
    double mean_claim() const;

    /// int_0^1 z p(z) dz (closed form via the Erlang CDF).
    double truncated_mean_claim() const;

    double min_alpha() const;
    int max_shape() const;

    /// Laplace transform of the claim density, p_hat(s) = E[e^{-sZ}],
    /// continued meromorphically (poles at s = -alpha_k).
    template <typename T>
    T transform(T s) const {
        T acc{};
        for (const auto& c : components_) {
            T ratio = c.alpha / (c.alpha + s);
            T p = ratio;
            for (int k = 1; k < c.shape; ++k) p *= ratio;
            acc += c.weight * p;
        }
        return acc;
    }

    /// d/ds p_hat(s) and d^2/ds^2 p_hat(s).
    template <typename T>
    T transform_deriv(T s, int order) const {
        T acc{};
        for (const auto& c : components_) {
            const double m = static_cast<double>(c.shape);
            T ratio = c.alpha / (c.alpha + s);
            T p = ratio;
            for (int k = 1; k < c.shape; ++k) p *= ratio;
            T inv = 1.0 / (c.alpha + s);
            if (order == 1) {
                acc += c.weight * (-m) * p * inv;
            } else if (order == 2) {
                acc += c.weight * m * (m + 1.0) * p * inv * inv;
            } else {
                throw DomainError("transform_deriv: order must be 1 or 2");
            }
        }
        return acc;
    }

private:
    JumpFamily family_;
    double rate_;
    std::vector<JumpComponent> components_;
};

}  // namespace refract
