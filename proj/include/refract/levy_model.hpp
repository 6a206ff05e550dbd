#pragma once

#include <complex>
#include <optional>

#include "refract/jump_measure.hpp"

namespace refract {

/// Spectrally negative Levy model X_t = c t + sigma B_t - S_t, where S is a
/// compound Poisson sum of positive claims. The model is parametrised by the
/// premium rate c (absorbing the compensator truncation term), the Gaussian
/// coefficient sigma and the jump measure; the triplet drift gamma is derived.
class LevyModel {
public:
    LevyModel(double sigma, double premium, std::optional<JumpMeasure> jumps);

    double sigma() const { return sigma_; }
    double premium() const { return premium_; }  // c = gamma + int_0^1 z nu(dz)
    double gamma() const;                        // triplet drift
    const std::optional<JumpMeasure>& jumps() const { return jumps_; }

    double jump_rate() const { return jumps_ ? jumps_->rate() : 0.0; }  // nu(0, infinity)
    bool bounded_variation() const { return sigma_ == 0.0; }
    bool completely_monotone_jumps() const {
        return !jumps_ || jumps_->completely_monotone();
    }

    /// E[X_1] = psi'(0+) = c - rate * E[Z].
    double mean() const;

    /// psi(lambda) = c lambda + sigma^2 lambda^2 / 2 - rate (1 - p_hat(lambda)),
    /// continued meromorphically; no domain checks (poles at -alpha_k).
    template <typename T>
    T psi(T lambda) const {
        T acc = premium_ * lambda + 0.5 * sigma_ * sigma_ * lambda * lambda;
        if (jumps_) acc -= jumps_->rate() * (1.0 - jumps_->transform(lambda));
        return acc;
    }

    template <typename T>
    T psi_deriv(T lambda, int order) const {
        if (order == 1) {
            T acc = premium_ + sigma_ * sigma_ * lambda;
            if (jumps_) acc += jumps_->rate() * jumps_->transform_deriv(lambda, 1);
            return acc;
        }
        if (order == 2) {
            T acc = T{} + sigma_ * sigma_;
            if (jumps_) acc += jumps_->rate() * jumps_->transform_deriv(lambda, 2);
            return acc;
        }
        throw DomainError("psi_deriv: order must be 1 or 2");
    }

    /// Laplace exponent on its natural domain lambda >= 0.
    double laplace_exponent(double lambda) const;

    /// First or second derivative of psi, valid for lambda above the first
    /// pole -min(alpha_k) of the rational continuation.
    double laplace_exponent_deriv(double lambda, int order) const;

    /// The unique lambda > 0 with psi(lambda) - delta_shift*lambda = q lying
    /// right of the shifted exponent's minimiser: Phi(q) for delta_shift = 0,
    /// phi(q) for delta_shift = delta. Bracketing-by-doubling followed by
    /// safeguarded Newton; residual below 1e-12 * max(1, q).
    double right_inverse(double q, double delta_shift = 0.0) const;

private:
    double sigma_;
    double premium_;
    std::optional<JumpMeasure> jumps_;
};

enum class PathVariation { BoundedVariation, UnboundedVariation };

struct VariationInfo {
    PathVariation variation;
    double premium;    // c
    double jump_mass;  // nu(0, infinity)
};

/// Bounded variation iff sigma = 0 (jumps are always compound Poisson here).
VariationInfo classify(const LevyModel& model);

/// Refraction control parameters: ceiling dividend rate and discount rate.
struct RefractionParams {
    double delta = 0.0;
    double q = 0.0;
};

/// Checks q > 0, delta > 0 and assumption (H): delta < c for bounded
/// variation models. Throws ValidationError on failure.
void validate_refraction(const LevyModel& model, const RefractionParams& params);

}  // namespace refract
