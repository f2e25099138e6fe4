#include "qgraph/vertex.hpp"

#include <algorithm>
#include <numeric>

#include "qgraph/linalg.hpp"

namespace qgraph {

namespace {

MatrixXc stacked(const VertexCoupling& c)
{
    MatrixXc ab(c.n(), 2 * c.n());
    ab << c.A, c.B;
    return ab;
}

void check_square(const VertexCoupling& c)
{
    if (c.A.rows() != c.A.cols() || c.B.rows() != c.B.cols() || c.A.rows() != c.B.rows())
        throw StructuralError("coupling matrices must be square and of equal size");
}

// next k-subset of {0..n-1} in lexicographic order
bool next_subset(std::vector<Index>& idx, Index n)
{
    const Index k = static_cast<Index>(idx.size());
    for (Index i = k - 1; i >= 0; --i) {
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

bool try_order(const VertexCoupling& c, Index m, const std::vector<Index>& order, STForm& out)
{
    const Index n = c.n();
    MatrixXc Ap(n, n), Bp(n, n);
    for (Index i = 0; i < n; ++i) {
        Ap.col(i) = c.A.col(order[i]);
        Bp.col(i) = c.B.col(order[i]);
    }
    Eigen::JacobiSVD<MatrixXc> svd(Bp, Eigen::ComputeFullU);
    MatrixXc Um = svd.matrixU().leftCols(m);
    MatrixXc Ur = svd.matrixU().rightCols(n - m);

    MatrixXc G1;
    MatrixXc T = MatrixXc::Zero(m, n - m);
    if (m > 0) {
        MatrixXc C = Um.adjoint() * Bp;
        MatrixXc C1 = C.leftCols(m);
        Eigen::JacobiSVD<MatrixXc> s1(C1);
        const auto& sv = s1.singularValues();
        if (sv(m - 1) <= 1e-8 * sv(0)) return false;
        Eigen::PartialPivLU<MatrixXc> lu(C1);
        G1 = lu.solve(Um.adjoint());
        T = (G1 * Bp).rightCols(n - m);
    }
    MatrixXc G2;
    MatrixXc Sd = MatrixXc::Zero(m, m);
    if (n - m > 0) {
        MatrixXc R = Ur.adjoint() * Ap;  // rows of the Dirichlet-like block
        MatrixXc Y = R.rightCols(n - m);
        Eigen::JacobiSVD<MatrixXc> sy(Y);
        const auto& sv = sy.singularValues();
        if (sv(0) == 0.0 || sv(n - m - 1) <= 1e-8 * sv(0)) return false;
        Eigen::PartialPivLU<MatrixXc> lu(Y);
        G2 = -lu.solve(Ur.adjoint());  // G2 A = [T^H, -I]
        if (m > 0) {
            MatrixXc P = G1 * Ap;
            MatrixXc Th = (G2 * Ap).leftCols(m);
            Sd = -(P.leftCols(m) + P.rightCols(n - m) * Th);
        }
    } else if (m > 0) {
        Sd = -(G1 * Ap);
    }
    out.n = n;
    out.m = m;
    out.S = 0.5 * (Sd + Sd.adjoint());
    out.T = T;
    out.order = order;
    // the reconstructed pair has to describe the same boundary conditions
    return subspace_distance(st_to_ab(out), c) <= 1e-7;
}

}  // namespace

Diagnostics validate(const VertexCoupling& c)
{
    check_square(c);
    Diagnostics d;
    const Index n = c.n();
    MatrixXc ab = stacked(c);
    Eigen::JacobiSVD<MatrixXc> svd(ab);
    const auto& s = svd.singularValues();
    d.rank = 0;
    if (n > 0 && s(0) > 0)
        for (Index i = 0; i < s.size(); ++i)
            if (s(i) > rank_tolerance * s(0)) ++d.rank;
    d.smallest_singular = (n > 0 && s(0) > 0) ? s(s.size() - 1) / s(0) : 0.0;
    d.rank_ok = d.rank == n;

    MatrixXc h = c.A * c.B.adjoint();
    d.hermiticity_residual = n > 0 ? (h - h.adjoint()).cwiseAbs().maxCoeff() : 0.0;
    d.hermiticity_bound = 1e-10 * (1.0 + c.A.norm() * c.B.norm());
    d.hermitian_ok = d.hermiticity_residual <= d.hermiticity_bound;
    d.ok = d.rank_ok && d.hermitian_ok;
    if (!d.rank_ok) d.failed = "rank(A|B) < n";
    else if (!d.hermitian_ok) d.failed = "AB^H not Hermitian";
    return d;
}

VertexCoupling st_to_ab(const STForm& st)
{
    const Index n = st.n, m = st.m;
    if (m < 0 || m > n || st.S.rows() != m || st.S.cols() != m || st.T.rows() != m ||
        st.T.cols() != n - m)
        throw StructuralError("ST-form block sizes do not match (n, m)");
    MatrixXc A = MatrixXc::Zero(n, n), B = MatrixXc::Zero(n, n);
    B.topLeftCorner(m, m).setIdentity();
    B.topRightCorner(m, n - m) = st.T;
    A.topLeftCorner(m, m) = -st.S;
    A.bottomLeftCorner(n - m, m) = st.T.adjoint();
    A.bottomRightCorner(n - m, n - m) = -MatrixXc::Identity(n - m, n - m);
    if (st.order.empty()) return {A, B};
    if (static_cast<Index>(st.order.size()) != n) throw StructuralError("ST-form order has wrong length");
    VertexCoupling out{MatrixXc::Zero(n, n), MatrixXc::Zero(n, n)};
    for (Index i = 0; i < n; ++i) {
        out.A.col(st.order[i]) = A.col(i);
        out.B.col(st.order[i]) = B.col(i);
    }
    return out;
}

STForm to_st_form(const VertexCoupling& c)
{
    check_square(c);
    const Index n = c.n();
    const Index m = numerical_rank(c.B, rank_tolerance);
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    STForm out;
    if (try_order(c, m, order, out)) {
        out.order.clear();
        return out;
    }
    // move every other m-subset of ends to the front, keeping relative order
    std::vector<Index> lead(m);
    std::iota(lead.begin(), lead.end(), Index{0});
    while (next_subset(lead, n)) {
        std::vector<Index> ord(lead.begin(), lead.end());
        for (Index i = 0; i < n; ++i)
            if (std::find(lead.begin(), lead.end(), i) == lead.end()) ord.push_back(i);
        if (try_order(c, m, ord, out)) return out;
    }
    throw DomainError("coupling has no ST-form under any end ordering");
}

VertexCoupling delta_coupling(int n, double v)
{
    if (n < 1) throw DomainError("delta coupling needs n >= 1");
    STForm st;
    st.n = n;
    st.m = 1;
    st.S = MatrixXc::Constant(1, 1, v);
    st.T = MatrixXc::Ones(1, n - 1);
    return st_to_ab(st);
}

VertexCoupling delta_prime_coupling(int n, double u)
{
    if (n < 1) throw DomainError("delta' coupling needs n >= 1");
    VertexCoupling c{MatrixXc::Zero(n, n), MatrixXc::Identity(n, n)};
    for (int i = 0; i + 1 < n; ++i) c.B(i, n - 1) = -1.0;
    c.B(n - 1, n - 1) = u;
    c.A.row(n - 1).setConstant(-1.0);
    return c;
}

STForm chain_family(const CouplingFamilyParams& p)
{
    STForm st;
    st.n = 4;
    st.m = 2;
    st.T.resize(2, 2);
    st.T << p.a, p.b, p.a, p.b;
    st.S.resize(2, 2);
    st.S << p.c, p.c * p.d, p.c * p.d, p.c * p.d * p.d;
    return st;
}

MatrixXc boundary_subspace(const VertexCoupling& c)
{
    check_square(c);
    return null_space(stacked(c), rank_tolerance);
}

double subspace_distance(const VertexCoupling& x, const VertexCoupling& y)
{
    return largest_principal_angle(boundary_subspace(x), boundary_subspace(y));
}

}  // namespace qgraph
