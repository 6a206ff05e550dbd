#include "detail/poly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "refract/errors.hpp"

namespace refract::detail {

std::vector<std::complex<double>> roots(const Poly& p) {
    int n = p.degree();
    while (n > 0 && p.c[n] == 0.0) --n;
    if (n < 1) throw NumericalError("poly: degenerate polynomial has no roots");

    // Rescale the variable so all roots land in a moderate disc; keeps the
    // companion matrix well conditioned without balancing.
    const double an = p.c[n];
    double rho = 0.0;
    for (int k = 0; k < n; ++k) {
        if (p.c[k] == 0.0) continue;
        rho = std::max(rho, std::pow(std::abs(p.c[k] / an), 1.0 / (n - k)));
    }
    if (rho == 0.0) rho = 1.0;

    std::vector<double> b(n + 1);  // monic coefficients of q(t) = p(rho t)/(an rho^n)
    for (int k = 0; k <= n; ++k) b[k] = p.c[k] / an * std::pow(rho, k - n);

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -b[i];

    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericalError("poly: eigenvalue iteration failed");

    std::vector<std::complex<double>> out(n);
    for (int i = 0; i < n; ++i) {
        std::complex<double> z = es.eigenvalues()[i] * rho;
        for (int it = 0; it < 8; ++it) {  // Newton polish on the original polynomial
            std::complex<double> pv = p.eval(z);
            std::complex<double> dv = p.eval_deriv(z);
            if (std::abs(dv) == 0.0) break;
            std::complex<double> step = pv / dv;
            z -= step;
            if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) break;
        }
        out[i] = z;
    }
    std::sort(out.begin(), out.end(), [](auto a, auto b2) {
        if (a.real() != b2.real()) return a.real() < b2.real();
        return a.imag() < b2.imag();
    });
    return out;
}

}  // namespace refract::detail
