#include "refract/refraction.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace refract {

namespace {

using Cx = std::complex<double>;

constexpr double kCrossRootGap = 1e-6;   // below this, closed-form convolutions are off
constexpr double kQuadCondLimit = 35.0;  // max phi(q)*(x-b) for the quadrature path

double integrate(const std::function<double(double)>& f, double a, double b) {
    double err = 0.0, l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 15, 1e-12, &err, &l1);
    if (err > 1e-8 * std::max({std::abs(v), l1 * 1e-4, 1e-250}))
        throw IntegrationError("adaptive quadrature failed to converge");
    return v;
}

const ExponentialSumScale* as_sum(const ScaleFunction* s) {
    return dynamic_cast<const ExponentialSumScale*>(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// RefractionProblem

RefractionProblem::RefractionProblem(LevyModel model, RefractionParams params)
    : RefractionProblem(model, params,
                        std::make_shared<ExponentialSumScale>(build_scale(model, params.q, 0.0)),
                        std::make_shared<ExponentialSumScale>(
                            build_scale(model, params.q, params.delta))) {}

RefractionProblem::RefractionProblem(LevyModel model, RefractionParams params,
                                     std::shared_ptr<const ScaleFunction> w,
                                     std::shared_ptr<const ScaleFunction> ww)
    : model_(std::move(model)), params_(params), w_(std::move(w)), ww_(std::move(ww)) {
    validate_refraction(model_, params_);
    if (!w_ || !ww_) throw ValidationError("refraction: null scale function");
    if (w_->q() != params_.q || ww_->q() != params_.q || w_->delta_shift() != 0.0 ||
        ww_->delta_shift() != params_.delta)
        throw ValidationError("refraction: scale functions built for different (q, delta)");
    Phi_ = w_->leading_root();
    phi_ = ww_->leading_root();
    if (!(phi_ > Phi_)) throw ConsistencyError("refraction: phi(q) <= Phi(q)");

    const auto* ws = as_sum(w_.get());
    const auto* ys = as_sum(ww_.get());
    closed_ = ws && ys;
    if (closed_) {
        w_roots_ = ws->roots();
        w_weights_ = ws->weights();
        y_roots_ = ys->roots();
        y_weights_ = ys->weights();
        y_lead_ = 0;  // leading term first by construction
        for (const auto& ti : w_roots_)
            for (const auto& tj : y_roots_)
                if (std::abs(ti - tj) < kCrossRootGap) closed_ = false;
    }
}

Cx RefractionProblem::tilted_cross_sum(Cx z, double b) const {
    // sum_i D_i theta_i e^{(theta_i - Phi) b} / (z - theta_i)
    Cx acc = 0.0;
    for (size_t i = 0; i < w_roots_.size(); ++i)
        acc += w_weights_[i] * w_roots_[i] * std::exp((w_roots_[i] - Phi_) * b) /
               (z - w_roots_[i]);
    return acc;
}

double RefractionProblem::h(double b) const {
    if (!(b >= 0.0)) throw DomainError("h: b must be >= 0");
    if (closed_) return std::exp(Phi_ * b) * phi_ * tilted_cross_sum(phi_, b).real();
    return h_quadrature(b);
}

double RefractionProblem::h_quadrature(double b) const {
    // h(b) = phi int_0^inf e^{-phi u} W'(u+b) du; W' grows like e^{Phi y}, so
    // the integrand decays at rate phi - Phi and can be truncated.
    const double span = 37.0 / (phi_ - Phi_);
    return phi_ * integrate([&](double u) { return std::exp(-phi_ * u) * w_->eval(b + u, 1); },
                            0.0, span);
}

double RefractionProblem::h_prime(double b) const {
    return phi_ * (h(b) - w_->eval(b, 1));
}

// ---------------------------------------------------------------------------
// Threshold

const char* to_string(ThresholdCase c) {
    switch (c) {
        case ThresholdCase::InteriorPositive: return "interior_positive";
        case ThresholdCase::ZeroCaseI: return "zero_case_i";
        case ThresholdCase::ZeroCaseII: return "zero_case_ii";
    }
    return "unknown";
}

ThresholdSolution b_star(const RefractionProblem& problem) {
    const LevyModel& m = problem.model();
    const double delta = problem.params().delta;
    const double q = problem.params().q;
    const double phi = problem.phi_q();

    ThresholdSolution sol;
    sol.a_star = a_star(problem.W());

    bool positive;
    ThresholdCase zero_case;
    if (m.sigma() > 0.0) {
        positive = phi < 2.0 * delta / (m.sigma() * m.sigma());
        zero_case = ThresholdCase::ZeroCaseI;
    } else {
        // Parametric jump measures are compound Poisson, so the infinite
        // activity clause cannot fire.
        const double c = m.premium();
        positive = phi < delta * (m.jump_rate() + q) / (c * (c - delta));
        zero_case = ThresholdCase::ZeroCaseII;
    }

    auto crossing = [&](double b) { return problem.h(b) - problem.W().eval(b, 1); };

    if (m.completely_monotone_jumps()) {
        sol.unique_minimizer = true;
        if (!positive) {
            sol.b_star = 0.0;
            sol.threshold_case = zero_case;
            sol.h_at_bstar = problem.h(0.0);
            return sol;
        }
        // h < W' at 0+ and h > W' near a*: bracketed solve of the crossing.
        double hi = sol.a_star;
        if (!(hi > 0.0))
            throw ConsistencyError("b_star: positivity criterion holds but a* = 0");
        int guard = 0;
        while (crossing(hi) <= 0.0) {
            hi *= 1.3;
            if (++guard > 40)
                throw ConsistencyError("b_star: bracket failure (scale-function defect)");
        }
        double lo = 0.0;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (crossing(mid) < 0.0 ? lo : hi) = mid;
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        }
        sol.b_star = 0.5 * (lo + hi);
        sol.threshold_case = ThresholdCase::InteriorPositive;
        sol.h_at_bstar = problem.h(sol.b_star);
        return sol;
    }

    // Outside the completely monotone class: global grid scan, keeping the
    // largest minimiser per the sup convention.
    sol.unique_minimizer = false;
    const double hi = std::max({1.0, 1.5 * sol.a_star, 10.0 / problem.Phi_q()});
    const int n = 4000;
    std::vector<double> values(n + 1);
    double hmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
        values[k] = problem.h(k * hi / n);
        hmin = std::min(hmin, values[k]);
    }
    int best = 0;
    const double tie = 1e-12 * std::max(1.0, std::abs(hmin));
    for (int k = n; k >= 0; --k)
        if (values[k] <= hmin + tie) {
            best = k;
            break;
        }
    double lo_b = std::max(0.0, (best - 1) * hi / n);
    double hi_b = std::min(hi, (best + 1) * hi / n);
    constexpr double gr = 0.6180339887498949;
    double c1 = hi_b - gr * (hi_b - lo_b), c2 = lo_b + gr * (hi_b - lo_b);
    double f1 = problem.h(c1), f2 = problem.h(c2);
    for (int i = 0; i < 200 && hi_b - lo_b > 1e-13 * std::max(1.0, hi_b); ++i) {
        if (f1 > f2) {
            lo_b = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo_b + gr * (hi_b - lo_b);
            f2 = problem.h(c2);
        } else {
            hi_b = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi_b - gr * (hi_b - lo_b);
            f1 = problem.h(c1);
        }
    }
    double refined = 0.5 * (lo_b + hi_b);
    if (refined < 1e-10 * hi) refined = 0.0;
    // Ties resolve to the larger argument (sup convention); the boundary wins
    // only when strictly better.
    if (problem.h(0.0) < problem.h(refined) - tie) refined = 0.0;
    sol.b_star = refined;
    sol.h_at_bstar = problem.h(refined);
    sol.threshold_case = refined > 0.0 ? ThresholdCase::InteriorPositive : zero_case;
    return sol;
}

// ---------------------------------------------------------------------------
// ValueFunction

ValueFunction::ValueFunction(RefractionProblem problem, double b)
    : problem_(std::move(problem)), b_(b) {
    if (!(b >= 0.0) || !std::isfinite(b))
        throw DomainError("value function: threshold b must be finite and >= 0");
    h_b_ = problem_.h(b_);
    if (!problem_.closed_form()) return;

    // Closed form for x > b. Writing S_j(b) = sum_i D_i theta_i e^{theta_i b}
    // / (vtheta_j - theta_i), the primitive and convolution integrals of
    // Eq-style v_b collapse to
    //   v_b(x) = delta sum_j E_j/vtheta_j
    //            + sum_{j != lead} delta E_j (S_j(b)/h(b) - 1/vtheta_j)
    //              e^{vtheta_j (x-b)};
    // the j = lead mode cancels identically because h(b) = phi S_lead(b),
    // which is what keeps e^{phi(q) x} out of the evaluation. At b = 0 the
    // coefficients reduce to -delta E_j (phi - vtheta_j)/(vtheta_j phi)
    // without any cross-root division.
    const double delta = problem_.params().delta;
    const double phi = problem_.phi_q();
    Cx k_sum = 0.0;
    for (size_t j = 0; j < problem_.y_roots_.size(); ++j)
        k_sum += problem_.y_weights_[j] / problem_.y_roots_[j];
    const_term_ = delta * k_sum.real();

    const Cx a_phi = problem_.tilted_cross_sum(phi, b_);
    for (size_t j = 0; j < problem_.y_roots_.size(); ++j) {
        if (static_cast<int>(j) == problem_.y_lead_) continue;
        const Cx root = problem_.y_roots_[j];
        if (root.imag() < 0.0) continue;  // folded into the conjugate partner
        Cx ratio = b_ == 0.0 ? Cx(1.0 / phi)
                             : problem_.tilted_cross_sum(root, b_) / (phi * a_phi);
        Cx coef = delta * problem_.y_weights_[j] * (ratio - 1.0 / root);
        if (root.imag() == 0.0)
            real_modes_.push_back({root.real(), coef.real()});
        else
            complex_modes_.push_back({root, coef});
    }
}

double ValueFunction::value(double x) const {
    if (!(x >= 0.0)) throw DomainError("value: x must be >= 0");
    if (x <= b_) return problem_.W().eval(x) / h_b_;
    if (!problem_.closed_form()) return value_quadrature(x);
    const double dx = x - b_;
    double acc = const_term_;
    for (const auto& m : real_modes_) acc += m.coef * std::exp(m.root * dx);
    for (const auto& m : complex_modes_) acc += 2.0 * (m.coef * std::exp(m.root * dx)).real();
    return acc;
}

double ValueFunction::derivative(double x) const {
    if (!(x > 0.0)) throw DomainError("value derivative: x must be > 0");
    if (x <= b_) return problem_.W().eval(x, 1) / h_b_;
    if (!problem_.closed_form()) return derivative_quadrature(x);
    const double dx = x - b_;
    double acc = 0.0;
    for (const auto& m : real_modes_) acc += m.coef * m.root * std::exp(m.root * dx);
    for (const auto& m : complex_modes_)
        acc += 2.0 * (m.coef * m.root * std::exp(m.root * dx)).real();
    return acc;
}

double ValueFunction::value_quadrature(double x) const {
    const auto& w = problem_.W();
    const auto& ww = problem_.WW();
    const double delta = problem_.params().delta;
    const double phi = problem_.phi_q();
    if (phi * (x - b_) > kQuadCondLimit)
        throw NumericalError(
            "value: quadrature path is ill-conditioned for phi(q)*(x-b) this large; "
            "use exponential-sum scales");
    if (b_ == 0.0) {
        double primitive = integrate([&](double y) { return ww.eval(y); }, 0.0, x);
        return -delta * (primitive - ww.eval(x) / phi);
    }
    double primitive = integrate([&](double y) { return ww.eval(y); }, 0.0, x - b_);
    double conv = integrate([&](double y) { return ww.eval(x - y) * w.eval(y, 1); }, b_, x);
    return -delta * primitive + (w.eval(x) + delta * conv) / h_b_;
}

double ValueFunction::derivative_quadrature(double x) const {
    const auto& w = problem_.W();
    const auto& ww = problem_.WW();
    const double delta = problem_.params().delta;
    const double phi = problem_.phi_q();
    if (phi * (x - b_) > kQuadCondLimit)
        throw NumericalError(
            "value derivative: quadrature path is ill-conditioned for phi(q)*(x-b) this "
            "large; use exponential-sum scales");
    if (b_ == 0.0) return -delta * (ww.eval(x) - ww.eval(x, 1) / phi);
    double conv = integrate([&](double y) { return ww.eval(x - y, 1) * w.eval(y, 1); }, b_, x);
    return -delta * ww.eval(x - b_) +
           ((1.0 + delta * ww.eval(0.0)) * w.eval(x, 1) + delta * conv) / h_b_;
}

// ---------------------------------------------------------------------------
// HJB verification

double hjb_default_xmax(const RefractionProblem& problem, double b) {
    return b + 10.0 / problem.Phi_q();
}

HjbReport hjb_verify(const ValueFunction& vf, double x_max, int grid_n, double rel_tol) {
    if (grid_n < 100) throw ValidationError("hjb_verify: grid_n must be >= 100");
    const double b = vf.threshold();
    if (!(x_max > b)) throw ValidationError("hjb_verify: x_max must exceed the threshold");

    std::vector<double> xs;
    xs.reserve(grid_n + 1);
    for (int k = 1; k <= grid_n; ++k) xs.push_back(k * x_max / grid_n);
    if (b > 0.0 && b < x_max) xs.push_back(b);  // the boundary slope point itself
    std::sort(xs.begin(), xs.end());

    HjbReport rep;
    rep.holds = true;
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double x : xs) {
        const double vp = vf.derivative(x);
        const double excess = x <= b ? 1.0 - vp : vp - 1.0;
        const double tol = std::max(rel_tol * std::max(1.0, std::abs(vp)), 1e-9);
        if (excess > tol) rep.holds = false;
        if (excess > rep.worst_violation) {
            rep.worst_violation = excess;
            rep.location = x;
        }
        if (vp > prev + 1e-12 * std::max(1.0, std::abs(vp))) decreasing = false;
        prev = vp;
    }

    if (b == 0.0) {
        const auto& ww = vf.problem().WW();
        const double delta = vf.problem().params().delta;
        const double lhs = delta * ww.eval(0.0, 1) / (1.0 + delta * ww.eval(0.0));
        rep.zero_threshold_criterion = lhs <= vf.problem().phi_q() * (1.0 + 1e-12);
        rep.v0_prime_decreasing = decreasing;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Convolution identity

double convolution_identity_residual(const RefractionProblem& problem, double x) {
    if (!(x > 0.0)) throw DomainError("convolution_identity_residual: x must be > 0");
    const double delta = problem.params().delta;
    const double phi = problem.phi_q();
    const double w0 = problem.W().eval(0.0);
    const double ww0 = problem.WW().eval(0.0);

    double lhs, rhs_y, rhs_w;
    if (problem.closed_form()) {
        // All exponentials are tilted by e^{-phi x} so both sides stay
        // representable for arbitrarily large phi(q) x.
        Cx conv = 0.0;
        for (size_t i = 0; i < problem.w_roots_.size(); ++i) {
            const Cx ti = problem.w_roots_[i];
            const Cx di = problem.w_weights_[i] * ti;
            for (size_t j = 0; j < problem.y_roots_.size(); ++j) {
                const Cx tj = problem.y_roots_[j];
                const Cx ej = problem.y_weights_[j] * tj;
                conv += ej * di * (std::exp((ti - phi) * x) - std::exp((tj - phi) * x)) /
                        (ti - tj);
            }
        }
        Cx wy = 0.0;
        for (size_t j = 0; j < problem.y_roots_.size(); ++j)
            wy += problem.y_weights_[j] * problem.y_roots_[j] *
                  std::exp((problem.y_roots_[j] - phi) * x);
        Cx wx = 0.0;
        for (size_t i = 0; i < problem.w_roots_.size(); ++i)
            wx += problem.w_weights_[i] * problem.w_roots_[i] *
                  std::exp((problem.w_roots_[i] - phi) * x);
        lhs = delta * conv.real();
        rhs_y = (1.0 - delta * w0) * wy.real();
        rhs_w = (1.0 + delta * ww0) * wx.real();
    } else {
        const auto& w = problem.W();
        const auto& ww = problem.WW();
        lhs = delta * integrate(
                          [&](double y) {
                              return std::exp(-phi * (x - y)) * ww.eval(x - y, 1) *
                                     std::exp(-phi * y) * w.eval(y, 1);
                          },
                          0.0, x);
        rhs_y = (1.0 - delta * w0) * std::exp(-phi * x) * ww.eval(x, 1);
        rhs_w = (1.0 + delta * ww0) * std::exp(-phi * x) * w.eval(x, 1);
    }
    const double scale = std::max({std::abs(lhs), std::abs(rhs_y), std::abs(rhs_w), 1e-300});
    return std::abs(lhs - rhs_y + rhs_w) / scale;
}

}  // namespace refract
