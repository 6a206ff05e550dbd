#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "refract/levy_model.hpp"

namespace refract {

/// Evaluable representation of a q-scale function W^(q) (delta_shift = 0) or
/// of the shifted process Y = X - delta t (delta_shift = delta). W(x) = 0 for
/// x < 0; on [0, infinity) it is strictly increasing with W(x) ~ C e^{L x}
/// where L is the leading (positive real) transform root.
class ScaleFunction {
public:
    virtual ~ScaleFunction() = default;

    /// W(x), W'(x) or W''(x). Order 0 returns 0 for x < 0; orders >= 1 throw
    /// DomainError for x < 0 and return right limits at x = 0.
    virtual double eval(double x, int order = 0) const = 0;
    double operator()(double x) const { return eval(x, 0); }

    virtual bool supports_order(int order) const = 0;

    double q() const { return q_; }
    double delta_shift() const { return delta_shift_; }
    double leading_root() const { return leading_root_; }      // Phi(q) or phi(q)
    double leading_weight() const { return leading_weight_; }  // coefficient of e^{L x}

    /// Remainder of the leading-exponential decomposition,
    /// f(x) = leading_weight * e^{L x} - W(x). Non-negative and completely
    /// monotone under completely monotone jump densities.
    virtual double remainder(double x) const = 0;
    virtual double remainder_deriv(double x) const = 0;

    /// Sample abscissae for grid-based fallbacks (empty when the scale can be
    /// evaluated anywhere).
    virtual std::vector<double> grid_points() const { return {}; }

protected:
    double q_ = 0.0;
    double delta_shift_ = 0.0;
    double leading_root_ = 0.0;
    double leading_weight_ = 0.0;
};

/// Scale function as a finite exponential sum sum_i D_i e^{theta_i x} from the
/// partial-fraction decomposition of the rational transform. Complex roots
/// come in conjugate pairs with conjugate weights and are folded to a real
/// evaluation.
class ExponentialSumScale final : public ScaleFunction {
public:
    double eval(double x, int order = 0) const override;
    bool supports_order(int order) const override { return order >= 0 && order <= 2; }
    double remainder(double x) const override;
    double remainder_deriv(double x) const override;

    /// Full root/weight lists (conjugate pairs expanded), leading root first.
    std::vector<std::complex<double>> roots() const;
    std::vector<std::complex<double>> weights() const;
    int count() const;

private:
    friend ExponentialSumScale build_scale(const LevyModel&, double, double);
    friend class RefractionProblem;

    struct RealTerm {
        double root;
        double weight;
    };
    struct ComplexTerm {  // representative with Im > 0; contributes 2 Re(...)
        std::complex<double> root;
        std::complex<double> weight;
    };

    double sum_terms(double x, int order, bool tilted) const;

    std::vector<RealTerm> real_terms_;  // leading term at index 0
    std::vector<ComplexTerm> complex_terms_;
    double max_abs_root_ = 0.0;
};

/// Constructs the exponential-sum scale function by clearing denominators in
/// psi(theta) - delta_shift*theta - q = 0, solving for all roots and setting
/// D_i = 1/(psi'(theta_i) - delta_shift).
///
/// Throws MultipleRootError when two roots are closer than 1e-8 * max|theta|
/// (use build_scale_numeric in that case) and NumericalError when the root
/// count or the positive real root is inconsistent.
ExponentialSumScale build_scale(const LevyModel& model, double q, double delta_shift = 0.0);

/// Scale function on a grid from numerical inversion of the transform
/// 1/(psi(theta) - delta_shift*theta - q), computed in the exponentially
/// tilted variable e^{-L x} W(x) for stability. Supports orders 0 and 1.
class NumericScale final : public ScaleFunction {
public:
    double eval(double x, int order = 0) const override;
    bool supports_order(int order) const override { return order == 0 || order == 1; }
    double remainder(double x) const override;
    double remainder_deriv(double x) const override;
    std::vector<double> grid_points() const override { return grid_; }

    double inversion_tolerance() const { return tol_; }
    double achieved_residual() const { return achieved_; }
    int interpolation_order() const { return interp_order_; }

private:
    friend NumericScale build_scale_numeric(const LevyModel&, double, double,
                                            std::span<const double>, double);

    double tilted_at(double x, int deriv) const;

    std::vector<double> grid_;
    std::vector<double> tilted_;  // e^{-L x_i} W(x_i)
    int interp_order_ = 5;
    double tol_ = 0.0;
    double achieved_ = 0.0;
};

NumericScale build_scale_numeric(const LevyModel& model, double q, double delta_shift,
                                 std::span<const double> grid, double tol = 1e-8);

/// Decomposition W^(q)(x) = Phi'(q) e^{Phi(q) x} - f(x). The amplitude is
/// 1/psi'(Phi(q)); cm_ok records whether f stayed non-negative on a log-spaced
/// probe grid (a failure flags the model as violating the complete
/// monotonicity hypothesis).
struct CMDecomposition {
    double amplitude = 0.0;
    double tilt = 0.0;
    bool cm_ok = false;
    std::shared_ptr<const ScaleFunction> scale;

    double remainder(double x) const { return scale->remainder(x); }
    double remainder_deriv(double x) const { return scale->remainder_deriv(x); }
};

CMDecomposition cm_decompose(std::shared_ptr<const ScaleFunction> scale, const LevyModel& model,
                             double q);

/// argmin of W' on [0, infinity): 0 when W''(0+) >= 0, else the bracketed
/// root of W''. Guaranteed unique under completely monotone jump densities;
/// advisory otherwise. Grid-based for scales without second derivatives.
double a_star(const ScaleFunction& scale);

/// Relative deviation of the analytic transform of the exponential sum,
/// sum_i D_i/(theta - theta_i), from 1/(psi(theta) - delta_shift*theta - q).
/// Requires theta >= leading root + 0.1.
double laplace_residual(const ExponentialSumScale& scale, const LevyModel& model, double theta);

}  // namespace refract
