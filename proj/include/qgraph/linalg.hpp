#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "qgraph/types.hpp"

namespace qgraph {

template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-10)
{
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<typename Derived::PlainObject> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

// orthonormal basis of {x : m x = 0}, one vector per column
template <typename Derived>
typename Derived::PlainObject null_space(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-10)
{
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Index r = 0;
    if (s.size() > 0 && s(0) > 0.0)
        for (Index i = 0; i < s.size(); ++i)
            if (s(i) > rel_tol * s(0)) ++r;
    return svd.matrixV().rightCols(m.cols() - r);
}

// rows spanning {y : y^H m = 0}
template <typename Derived>
typename Derived::PlainObject left_null_space(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-10)
{
    typename Derived::PlainObject mh = m.adjoint();
    return null_space(mh, rel_tol).adjoint();
}

// largest principal angle between the column spans of two orthonormal bases
template <typename D1, typename D2>
double largest_principal_angle(const Eigen::MatrixBase<D1>& u, const Eigen::MatrixBase<D2>& v)
{
    if (u.cols() != v.cols()) return pi / 2;
    if (u.cols() == 0) return 0.0;
    // sine of the largest angle is the norm of the part of v outside span(u);
    // this stays accurate for tiny angles where acos of the overlap would not
    typename D1::PlainObject resid = v - u * (u.adjoint() * v);
    Eigen::JacobiSVD<typename D1::PlainObject> svd(resid);
    double smax = svd.singularValues()(0);
    return std::asin(std::clamp(smax, 0.0, 1.0));
}

}  // namespace qgraph
