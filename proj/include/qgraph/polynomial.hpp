#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qgraph {

// coefficients are stored lowest power first
template <typename Real>
std::complex<Real> polyval(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& c,
                           std::complex<Real> z)
{
    std::complex<Real> acc(0);
    for (Eigen::Index j = c.size() - 1; j >= 0; --j) acc = acc * z + c(j);
    return acc;
}

template <typename Real>
std::complex<Real> polyder_val(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& c,
                               std::complex<Real> z)
{
    std::complex<Real> acc(0);
    for (Eigen::Index j = c.size() - 1; j >= 1; --j) acc = acc * z + Real(j) * c(j);
    return acc;
}

// Interpolate p(z) = sum c_j z^j of degree deg from samples at z_m = r w^m,
// w = exp(2 pi i / (deg+1)). Exact up to roundoff for a true polynomial.
template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> interpolate_on_circle(
    const std::vector<std::complex<Real>>& samples, Real radius)
{
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> c(n);
    const Real tau = Real(2) * std::acos(Real(-1));
    for (Eigen::Index j = 0; j < n; ++j) {
        std::complex<Real> acc(0);
        for (Eigen::Index m = 0; m < n; ++m)
            acc += samples[m] * std::polar(Real(1), -tau * Real((j * m) % n) / Real(n));
        c(j) = acc / (Real(n) * std::pow(radius, Real(j)));
    }
    return c;
}

// Roots via companion-matrix eigenvalues, then a few Newton steps on p.
// Leading and trailing coefficients below rel_tol * max|c| are dropped first
// (trailing zeros mean roots at 0, which never lie on the unit circle).
template <typename Real>
std::vector<std::complex<Real>> polynomial_roots(
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> c, Real rel_tol = Real(1e-13))
{
    using C = std::complex<Real>;
    std::vector<C> out;
    if (c.size() == 0) return out;
    const Real cmax = c.cwiseAbs().maxCoeff();
    if (cmax == Real(0)) return out;
    Eigen::Index hi = c.size() - 1, lo = 0;
    while (hi > 0 && std::abs(c(hi)) <= rel_tol * cmax) --hi;
    while (lo < hi && std::abs(c(lo)) <= rel_tol * cmax) ++lo;
    const Eigen::Index deg = hi - lo;
    if (deg <= 0) return out;
    Eigen::Matrix<C, Eigen::Dynamic, 1> p = c.segment(lo, deg + 1);

    Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic> comp =
        Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = C(1);
    for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -p(i) / p(deg);
    Eigen::ComplexEigenSolver<Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>> es(comp, false);
    const auto& ev = es.eigenvalues();

    for (Eigen::Index i = 0; i < deg; ++i) {
        C z = ev(i);
        for (int it = 0; it < 3; ++it) {
            C f = polyval(p, z), df = polyder_val(p, z);
            if (df == C(0)) break;
            C step = f / df;
            // multiple roots make Newton crawl; only keep steps that help
            if (std::abs(polyval(p, z - step)) < std::abs(f)) z -= step;
            else break;
        }
        out.push_back(z);
    }
    return out;
}

}  // namespace qgraph
