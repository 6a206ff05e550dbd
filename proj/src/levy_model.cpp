#include "refract/levy_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace refract {

LevyModel::LevyModel(double sigma, double premium, std::optional<JumpMeasure> jumps)
    : sigma_(sigma), premium_(premium), jumps_(std::move(jumps)) {
    if (!(sigma_ >= 0.0)) throw ValidationError("model: sigma must be >= 0");
    if (!std::isfinite(sigma_) || !std::isfinite(premium_))
        throw ValidationError("model: sigma and premium must be finite");
    if (sigma_ == 0.0) {
        if (!jumps_)
            throw ValidationError("model: sigma = 0 with no jumps gives monotone paths");
        if (!(premium_ > 0.0))
            throw ValidationError("model: bounded variation requires premium c > 0");
    }
}

double LevyModel::gamma() const {
    double trunc = jumps_ ? jumps_->rate() * jumps_->truncated_mean_claim() : 0.0;
    return premium_ - trunc;
}

double LevyModel::mean() const {
    return premium_ - (jumps_ ? jumps_->rate() * jumps_->mean_claim() : 0.0);
}

double LevyModel::laplace_exponent(double lambda) const {
    if (!(lambda >= 0.0)) throw DomainError("laplace_exponent: lambda must be >= 0");
    return psi(lambda);
}

double LevyModel::laplace_exponent_deriv(double lambda, int order) const {
    if (order != 1 && order != 2)
        throw DomainError("laplace_exponent_deriv: order must be 1 or 2");
    if (jumps_) {
        const double pole = -jumps_->min_alpha();
        const double margin = 1e-12 * std::max(1.0, std::abs(pole));
        if (std::abs(lambda - pole) <= margin)
            throw PoleError("laplace_exponent_deriv: evaluation at a pole of psi");
        if (lambda < pole)
            throw DomainError("laplace_exponent_deriv: lambda below the first pole");
    }
    return psi_deriv(lambda, order);
}

double LevyModel::right_inverse(double q, double delta_shift) const {
    if (!(q > 0.0)) throw DomainError("right_inverse: q must be > 0");
    if (!(delta_shift >= 0.0)) throw DomainError("right_inverse: delta_shift must be >= 0");
    if (delta_shift > 0.0 && bounded_variation() && !(delta_shift < premium_)) {
        std::ostringstream os;
        os << "right_inverse: assumption (H) fails, delta = " << delta_shift
           << " >= premium c = " << premium_;
        throw ValidationError(os.str());
    }

    auto f = [&](double lam) { return psi(lam) - delta_shift * lam - q; };
    auto fp = [&](double lam) { return psi_deriv(lam, 1) - delta_shift; };

    // The shifted exponent is convex, starts at -q < 0, and tends to +infinity,
    // so scanning up finds a bracket around the unique right root.
    double slope_inf = bounded_variation() ? premium_ - delta_shift : 1.0;
    double lo = 0.0;
    double hi = std::max(1.0, q / slope_inf);
    int guard = 0;
    while (f(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 300) throw ConsistencyError("right_inverse: bracketing failed");
    }

    double x = hi;
    double fx = f(x);
    for (int it = 0; it < 200; ++it) {
        double step = fx / fp(x);
        double x_new = x - step;
        if (!(x_new > lo && x_new < hi)) x_new = 0.5 * (lo + hi);  // bisection safeguard
        double fn = f(x_new);
        if (fn > 0.0)
            hi = x_new;
        else
            lo = x_new;
        bool converged = std::abs(fn) < 1e-15 * std::max(1.0, q) ||
                         std::abs(x_new - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x_new;
        x = x_new;
        fx = fn;
        if (converged) break;
    }
    if (std::abs(fx) > 1e-12 * std::max(1.0, q))
        throw ConsistencyError("right_inverse: residual above 1e-12 tolerance");
    return x;
}

VariationInfo classify(const LevyModel& model) {
    return {model.bounded_variation() ? PathVariation::BoundedVariation
                                      : PathVariation::UnboundedVariation,
            model.premium(), model.jump_rate()};
}

void validate_refraction(const LevyModel& model, const RefractionParams& params) {
    if (!(params.q > 0.0)) throw ValidationError("params: discount rate q must be > 0");
    if (!(params.delta > 0.0)) throw ValidationError("params: ceiling rate delta must be > 0");
    if (model.bounded_variation() && !(params.delta < model.premium())) {
        std::ostringstream os;
        os << "params: assumption (H) fails, delta = " << params.delta
           << " >= premium c = " << model.premium() << " for a bounded-variation model";
        throw ValidationError(os.str());
    }
}

}  // namespace refract
