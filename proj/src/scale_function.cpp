#include "refract/scale_function.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "detail/poly.hpp"

namespace refract {

namespace {

using Cx = std::complex<double>;

constexpr double kFactorThreshold = 30.0;  // switch to tilted evaluation

Cx pow_int(Cx z, int n) {
    Cx acc = 1.0;
    for (int i = 0; i < n; ++i) acc *= z;
    return acc;
}

double lemma21_value_at_zero(const LevyModel& model, double delta_shift) {
    if (model.bounded_variation()) return 1.0 / (model.premium() - delta_shift);
    return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExponentialSumScale

double ExponentialSumScale::sum_terms(double x, int order, bool tilted) const {
    const double shift = tilted ? leading_root_ : 0.0;
    double acc = 0.0;
    for (const auto& t : real_terms_)
        acc += t.weight * std::pow(t.root, order) * std::exp((t.root - shift) * x);
    for (const auto& t : complex_terms_)
        acc += 2.0 * (t.weight * pow_int(t.root, order) * std::exp((t.root - shift) * x)).real();
    return acc;
}

double ExponentialSumScale::eval(double x, int order) const {
    if (order < 0 || order > 2) throw DomainError("scale eval: order must be in {0,1,2}");
    if (x < 0.0) {
        if (order == 0) return 0.0;  // W vanishes on (-infinity, 0)
        throw DomainError("scale eval: derivatives need x >= 0");
    }
    if (x * max_abs_root_ > kFactorThreshold)
        return std::exp(leading_root_ * x) * sum_terms(x, order, true);
    return sum_terms(x, order, false);
}

double ExponentialSumScale::remainder(double x) const {
    // f(x) = D_lead e^{L x} - W(x); the leading terms cancel exactly.
    double acc = 0.0;
    for (size_t i = 1; i < real_terms_.size(); ++i)
        acc -= real_terms_[i].weight * std::exp(real_terms_[i].root * x);
    for (const auto& t : complex_terms_)
        acc -= 2.0 * (t.weight * std::exp(t.root * x)).real();
    return acc;
}

double ExponentialSumScale::remainder_deriv(double x) const {
    double acc = 0.0;
    for (size_t i = 1; i < real_terms_.size(); ++i)
        acc -= real_terms_[i].weight * real_terms_[i].root * std::exp(real_terms_[i].root * x);
    for (const auto& t : complex_terms_)
        acc -= 2.0 * (t.weight * t.root * std::exp(t.root * x)).real();
    return acc;
}

std::vector<Cx> ExponentialSumScale::roots() const {
    std::vector<Cx> out;
    for (const auto& t : real_terms_) out.emplace_back(t.root, 0.0);
    for (const auto& t : complex_terms_) {
        out.push_back(t.root);
        out.push_back(std::conj(t.root));
    }
    return out;
}

std::vector<Cx> ExponentialSumScale::weights() const {
    std::vector<Cx> out;
    for (const auto& t : real_terms_) out.emplace_back(t.weight, 0.0);
    for (const auto& t : complex_terms_) {
        out.push_back(t.weight);
        out.push_back(std::conj(t.weight));
    }
    return out;
}

int ExponentialSumScale::count() const {
    return static_cast<int>(real_terms_.size() + 2 * complex_terms_.size());
}

// ---------------------------------------------------------------------------
// build_scale

ExponentialSumScale build_scale(const LevyModel& model, double q, double delta_shift) {
    if (!(q > 0.0)) throw DomainError("build_scale: q must be > 0");
    const double lead = model.right_inverse(q, delta_shift);  // also validates (H)

    // Clear denominators: with D(t) = prod (alpha + t)^{M_alpha} over distinct
    // alphas and P = p_hat * D,
    //   N(t) = (sigma^2/2 t^2 + (c - delta) t - (eta + q)) D(t) + eta P(t).
    detail::Poly denom{{1.0}};
    detail::Poly numer_jump{{0.0}};
    double eta = model.jump_rate();
    if (model.jumps()) {
        const auto& comps = model.jumps()->components();
        std::map<double, int> max_shape;
        for (const auto& c : comps) {
            auto [it, inserted] = max_shape.try_emplace(c.alpha, c.shape);
            if (!inserted) it->second = std::max(it->second, c.shape);
        }
        for (const auto& [alpha, m] : max_shape) denom *= detail::linear_power(alpha, m);
        for (const auto& c : comps) {
            detail::Poly term{{1.0}};
            for (const auto& [alpha, m] : max_shape) {
                int pow = (alpha == c.alpha) ? m - c.shape : m;
                if (pow > 0) term *= detail::linear_power(alpha, pow);
            }
            term.scale(c.weight * std::pow(c.alpha, c.shape));
            numer_jump += term;
        }
    }
    detail::Poly head{{-(eta + q), model.premium() - delta_shift, 0.5 * model.sigma() * model.sigma()}};
    while (head.c.size() > 1 && head.c.back() == 0.0) head.c.pop_back();
    detail::Poly numer = head;
    numer *= denom;
    numer_jump.scale(eta);
    numer += numer_jump;

    const int expected = denom.degree() + (model.bounded_variation() ? 1 : 2);
    auto theta = detail::roots(numer);
    if (static_cast<int>(theta.size()) != expected)
        throw NumericalError("build_scale: transform root count does not match degree");

    // Snap numerically real roots onto the axis.
    double max_abs = 0.0;
    for (auto& z : theta) {
        if (std::abs(z.imag()) <= 1e-10 * (1.0 + std::abs(z))) z = Cx(z.real(), 0.0);
        max_abs = std::max(max_abs, std::abs(z));
    }
    for (size_t i = 0; i < theta.size(); ++i)
        for (size_t j = i + 1; j < theta.size(); ++j)
            if (std::abs(theta[i] - theta[j]) <= 1e-8 * max_abs) {
                std::ostringstream os;
                os << "build_scale: roots " << theta[i] << " and " << theta[j]
                   << " are numerically coincident; use build_scale_numeric";
                throw MultipleRootError(os.str());
            }

    ExponentialSumScale scale;
    scale.q_ = q;
    scale.delta_shift_ = delta_shift;
    scale.max_abs_root_ = max_abs;

    std::vector<double> real_roots;
    std::vector<Cx> upper_roots;
    for (const auto& z : theta) {
        if (z.imag() == 0.0)
            real_roots.push_back(z.real());
        else if (z.imag() > 0.0)
            upper_roots.push_back(z);
    }
    if (real_roots.size() + 2 * upper_roots.size() != theta.size())
        throw NumericalError("build_scale: complex roots do not pair into conjugates");

    int lead_idx = -1;
    for (size_t i = 0; i < real_roots.size(); ++i) {
        if (real_roots[i] <= 0.0) continue;
        if (lead_idx >= 0)
            throw NumericalError("build_scale: multiple positive real transform roots");
        lead_idx = static_cast<int>(i);
    }
    if (lead_idx < 0 || std::abs(real_roots[lead_idx] - lead) > 1e-10 * std::max(1.0, lead))
        throw ConsistencyError("build_scale: positive real root disagrees with right_inverse");
    std::swap(real_roots[0], real_roots[lead_idx]);

    auto weight_at = [&](Cx z) { return 1.0 / (model.psi_deriv(z, 1) - delta_shift); };
    for (double r : real_roots) scale.real_terms_.push_back({r, weight_at(Cx(r, 0.0)).real()});
    for (const auto& z : upper_roots) scale.complex_terms_.push_back({z, weight_at(z)});

    scale.leading_root_ = scale.real_terms_[0].root;
    scale.leading_weight_ = scale.real_terms_[0].weight;

    const double w0_expected = lemma21_value_at_zero(model, delta_shift);
    const double w0 = scale.sum_terms(0.0, 0, false);
    const double w0_scale = std::max(std::abs(w0_expected), scale.leading_weight_);
    if (std::abs(w0 - w0_expected) > 1e-8 * std::max(1.0, w0_scale))
        throw ConsistencyError("build_scale: W(0+) disagrees with its boundary value");
    return scale;
}

// ---------------------------------------------------------------------------
// NumericScale

namespace {

// Fixed-Talbot inversion of a Laplace transform at t > 0 with M nodes.
template <typename F>
double talbot(const F& transform, double t, int m) {
    const double r = 2.0 * m / (5.0 * t);
    double acc = 0.5 * std::exp(r * t) * transform(Cx(r, 0.0)).real();
    for (int k = 1; k < m; ++k) {
        const double u = k * std::numbers::pi / m;
        const double cot = std::cos(u) / std::sin(u);
        const Cx s(r * u * cot, r * u);
        const double sig = u + (u * cot - 1.0) * cot;
        acc += (std::exp(t * s) * transform(s) * Cx(1.0, sig)).real();
    }
    return acc * r / m;
}

}  // namespace

NumericScale build_scale_numeric(const LevyModel& model, double q, double delta_shift,
                                 std::span<const double> grid, double tol) {
    if (!(q > 0.0)) throw DomainError("build_scale_numeric: q must be > 0");
    if (!(tol > 0.0)) throw DomainError("build_scale_numeric: tol must be > 0");
    if (grid.size() < 8) throw ValidationError("build_scale_numeric: grid needs >= 8 points");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) throw ValidationError("build_scale_numeric: grid must be >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ValidationError("build_scale_numeric: grid must be strictly increasing");
    }

    const double lead = model.right_inverse(q, delta_shift);
    // Tilted transform of e^{-L x} W(x); analytic for Re s > 0 apart from the
    // simple pole at 0 carrying the finite limit, which Talbot handles.
    auto transform = [&](Cx s) { return 1.0 / (model.psi(s + lead) - delta_shift * (s + lead) - q); };

    NumericScale scale;
    scale.q_ = q;
    scale.delta_shift_ = delta_shift;
    scale.leading_root_ = lead;
    scale.leading_weight_ = 1.0 / (model.psi_deriv(lead, 1) - delta_shift);
    scale.tol_ = tol;
    scale.grid_.assign(grid.begin(), grid.end());
    scale.tilted_.resize(grid.size());

    static constexpr int kLevels[] = {24, 34, 48, 68};
    double worst = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        if (x == 0.0) {
            scale.tilted_[i] = lemma21_value_at_zero(model, delta_shift);
            continue;
        }
        double prev = talbot(transform, x, kLevels[0]);
        double value = prev, residual = 0.0;
        bool ok = false;
        for (size_t lvl = 1; lvl < std::size(kLevels); ++lvl) {
            value = talbot(transform, x, kLevels[lvl]);
            residual = std::abs(value - prev) / std::max(std::abs(value), 1e-30);
            if (residual <= tol) {
                ok = true;
                break;
            }
            prev = value;
        }
        if (!ok) {
            std::ostringstream os;
            os << "build_scale_numeric: inversion at x = " << x << " reached residual "
               << residual << " > tol " << tol;
            throw InversionError(os.str(), residual);
        }
        worst = std::max(worst, residual);
        scale.tilted_[i] = value;
    }
    scale.achieved_ = worst;
    return scale;
}

double NumericScale::tilted_at(double x, int deriv) const {
    const int k = interp_order_;  // local Lagrange interpolation on k+1 nodes
    const int n = static_cast<int>(grid_.size());
    auto it = std::lower_bound(grid_.begin(), grid_.end(), x);
    int idx = static_cast<int>(it - grid_.begin());
    int lo = std::clamp(idx - (k + 1) / 2, 0, n - k - 1);

    double acc = 0.0;
    for (int i = lo; i <= lo + k; ++i) {
        double denom = 1.0;
        for (int j = lo; j <= lo + k; ++j)
            if (j != i) denom *= grid_[i] - grid_[j];
        double basis;
        if (deriv == 0) {
            basis = 1.0;
            for (int j = lo; j <= lo + k; ++j)
                if (j != i) basis *= x - grid_[j];
        } else {
            basis = 0.0;
            for (int m = lo; m <= lo + k; ++m) {
                if (m == i) continue;
                double prod = 1.0;
                for (int j = lo; j <= lo + k; ++j)
                    if (j != i && j != m) prod *= x - grid_[j];
                basis += prod;
            }
        }
        acc += tilted_[i] * basis / denom;
    }
    return acc;
}

double NumericScale::eval(double x, int order) const {
    if (order < 0 || order > 1) throw DomainError("numeric scale: orders 0 and 1 only");
    if (x < 0.0) {
        if (order == 0) return 0.0;
        throw DomainError("numeric scale: derivative needs x >= 0");
    }
    if (x > grid_.back() * (1.0 + 1e-12))
        throw DomainError("numeric scale: x beyond the inversion grid");
    const double g = tilted_at(x, 0);
    if (order == 0) return std::exp(leading_root_ * x) * g;
    return std::exp(leading_root_ * x) * (leading_root_ * g + tilted_at(x, 1));
}

double NumericScale::remainder(double x) const {
    // Conditioned by e^{L x}; fine on the moderate ranges numeric scales serve.
    return std::exp(leading_root_ * x) * (leading_weight_ - tilted_at(x, 0));
}

double NumericScale::remainder_deriv(double x) const {
    return std::exp(leading_root_ * x) *
           (leading_root_ * (leading_weight_ - tilted_at(x, 0)) - tilted_at(x, 1));
}

// ---------------------------------------------------------------------------
// Derived quantities

CMDecomposition cm_decompose(std::shared_ptr<const ScaleFunction> scale, const LevyModel& model,
                             double q) {
    if (!scale) throw ValidationError("cm_decompose: null scale");
    CMDecomposition d;
    d.tilt = scale->leading_root();
    d.amplitude = 1.0 / (model.psi_deriv(d.tilt, 1) - scale->delta_shift());
    d.scale = std::move(scale);

    const double tol = 1e-10 * std::max(1.0, std::abs(d.amplitude));
    bool ok = true;
    double hi = 30.0 / std::max(d.tilt, 1e-3);
    if (auto pts = d.scale->grid_points(); !pts.empty()) hi = std::min(hi, pts.back());
    for (int i = 0; i <= 60; ++i) {
        double x = 1e-3 * std::pow(hi / 1e-3, i / 60.0);  // log-spaced probes
        if (d.remainder(x) < -tol) ok = false;
    }
    d.cm_ok = ok;
    return d;
}

double a_star(const ScaleFunction& scale) {
    if (scale.supports_order(2)) {
        if (scale.eval(0.0, 2) >= 0.0) return 0.0;
        double hi = 1.0 / std::max(scale.leading_root(), 1e-6);
        int guard = 0;
        while (scale.eval(hi, 2) < 0.0) {
            hi *= 2.0;
            if (++guard > 80) throw ConsistencyError("a_star: W'' never turns positive");
        }
        double lo = 0.0;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (scale.eval(mid, 2) < 0.0 ? lo : hi) = mid;
            if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
        }
        return 0.5 * (lo + hi);
    }
    // Grid-based argmin of W' for scales without second derivatives.
    auto pts = scale.grid_points();
    if (pts.empty()) throw ConsistencyError("a_star: scale offers neither W'' nor a grid");
    double best_x = pts.front(), best = scale.eval(pts.front(), 1);
    for (double x : pts) {
        double v = scale.eval(x, 1);
        if (v < best) {
            best = v;
            best_x = x;
        }
    }
    return best_x;
}

double laplace_residual(const ExponentialSumScale& scale, const LevyModel& model, double theta) {
    if (!(theta >= scale.leading_root() + 0.1))
        throw DomainError("laplace_residual: theta must exceed the leading root by 0.1");
    Cx transform = 0.0;
    auto roots = scale.roots();
    auto weights = scale.weights();
    for (size_t i = 0; i < roots.size(); ++i) transform += weights[i] / (theta - roots[i]);
    const double reference =
        1.0 / (model.psi(theta) - scale.delta_shift() * theta - scale.q());
    return std::abs(transform - reference) / std::abs(reference);
}

}  // namespace refract
