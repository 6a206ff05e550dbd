#pragma once

#include <complex>
#include <vector>

namespace refract::detail {

// Dense real polynomial, coefficients in ascending order.
struct Poly {
    std::vector<double> c{0.0};

    static Poly constant(double v) { return Poly{{v}}; }
    int degree() const { return static_cast<int>(c.size()) - 1; }

    Poly& operator*=(const Poly& o) {
        std::vector<double> r(c.size() + o.c.size() - 1, 0.0);
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = 0; j < o.c.size(); ++j) r[i + j] += c[i] * o.c[j];
        c = std::move(r);
        return *this;
    }
    Poly& operator+=(const Poly& o) {
        if (o.c.size() > c.size()) c.resize(o.c.size(), 0.0);
        for (size_t i = 0; i < o.c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    Poly& scale(double s) {
        for (auto& v : c) v *= s;
        return *this;
    }

    std::complex<double> eval(std::complex<double> x) const {
        std::complex<double> acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    }
    std::complex<double> eval_deriv(std::complex<double> x) const {
        std::complex<double> acc = 0.0;
        for (int k = degree(); k >= 1; --k) acc = acc * x + static_cast<double>(k) * c[k];
        return acc;
    }
};

inline Poly linear_power(double a, int m) {
    // (a + x)^m
    Poly p{{1.0}};
    Poly lin{{a, 1.0}};
    for (int i = 0; i < m; ++i) p *= lin;
    return p;
}

/// All complex roots of a real polynomial via a balanced companion matrix,
/// polished with a few complex Newton steps.
std::vector<std::complex<double>> roots(const Poly& p);

}  // namespace refract::detail
