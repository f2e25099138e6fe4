#include "qgraph/ladder.hpp"

#include <algorithm>
#include <cmath>

#include "qgraph/linalg.hpp"

namespace qgraph::ladder {

namespace {

void check(const LadderParams& p)
{
    if (!(p.L > 0) || !(p.ell > 0)) throw DomainError("ladder needs L > 0 and ell > 0");
}

// everything in the secular equation except the 2cos(2Lq) - 2cos(Lq)(...) part
double rest(const LadderParams& p, double k, double uv_sign)
{
    check(p);
    if (std::abs(std::cos(k * p.ell)) <= 1e-6) throw DomainError("tan(k ell) pole");
    const double s = std::sin(k * p.L), s2 = std::sin(2 * k * p.L);
    const double u = p.u, v = p.v;
    return s2 * (k * u - v / k) + uv_sign * s * s * (u * v + 5) - 2 +
           std::tan(k * p.ell) * (s * s * (v / k - k * u) + 2 * s2);
}

double residual(const LadderParams& p, double k, double q, double uv_sign)
{
    const double r = rest(p, k, uv_sign);
    const double s = std::sin(k * p.L);
    return 2 * std::cos(2 * p.L * q) - 2 * std::cos(p.L * q) * s * (k * p.u + p.v / k) + r;
}

}  // namespace

STForm general_top_st(const GeneralJunctionParams& g)
{
    STForm st;
    st.n = 3;
    st.m = 2;
    st.S.resize(2, 2);
    st.S << g.v11, g.v12, g.v21, g.v22;
    st.T.resize(2, 1);
    st.T << g.a1, g.a2;
    return st;
}

STForm general_bottom_st(const GeneralJunctionParams& g)
{
    STForm st;
    st.n = 3;
    st.m = 1;
    st.S = MatrixXc::Constant(1, 1, g.u);
    st.T.resize(1, 2);
    st.T << g.b1, g.b2;
    return st;
}

VertexCoupling general_top(const GeneralJunctionParams& g) { return st_to_ab(general_top_st(g)); }

VertexCoupling general_bottom(const GeneralJunctionParams& g) { return st_to_ab(general_bottom_st(g)); }

GeneralJunctionParams chain_limit_params(double a, double b, double c, double d)
{
    if (a == 0) throw DomainError("a = 0 has no ladder realisation");
    GeneralJunctionParams g;
    g.a1 = g.a2 = a;
    g.v11 = c;
    g.v12 = g.v21 = c * d;
    g.v22 = c * d * d;
    g.u = 0;
    g.b1 = b / a;
    g.b2 = 1;
    return g;
}

UnitCell ladder_cell(const VertexCoupling& top, const VertexCoupling& bottom, double L, double ell)
{
    if (!(L > 0) || !(ell > 0)) throw DomainError("ladder needs L > 0 and ell > 0");
    UnitCell cell;
    cell.periods = {L};
    cell.edges = {{L, 0.0, "strand1"}, {L, 0.0, "strand2"}, {ell, 0.0, "rung"}};
    cell.vertices.push_back({top, {{0, Side::end, {-1}}, {0, Side::start, {0}}, {2, Side::start, {0}}}});
    cell.vertices.push_back({bottom, {{1, Side::end, {-1}}, {1, Side::start, {0}}, {2, Side::end, {0}}}});
    return cell;
}

UnitCell ladder_cell(const LadderParams& p)
{
    return ladder_cell(delta_coupling(3, p.v), delta_prime_coupling(3, p.u), p.L, p.ell);
}

double secular_residual(const LadderParams& p, double k, double q)
{
    return residual(p, k, q, +1.0);
}

double secular_residual_paper_display(const LadderParams& p, double k, double q)
{
    return residual(p, k, q, -1.0);
}

std::vector<QSolution> solve_q(const LadderParams& p, double k)
{
    check(p);
    if (!(k > 0)) throw DomainError("k must be positive");
    std::vector<QSolution> out;
    if (std::abs(std::cos(k * p.ell)) > 1e-6) {
        // 4x^2 - 2 sin(kL)(ku + v/k) x + (rest - 2) = 0, x = cos(qL)
        const double B = -2 * std::sin(k * p.L) * (k * p.u + p.v / k);
        const double C = rest(p, k, +1.0) - 2;
        const double disc = B * B - 16 * C;
        if (disc < 0) return out;
        const double sq = std::sqrt(disc);
        const double xs[2] = {(-B + sq) / 8, (-B - sq) / 8};
        for (int b = 0; b < 2; ++b) {
            if (std::abs(xs[b]) <= 1.0) out.push_back({xs[b], std::acos(xs[b]) / p.L, b});
        }
        return out;
    }
    BlochRoots r = bloch_phases(ladder_cell(p), k, 0);
    std::vector<double> xs;
    for (Complex z : r.roots)
        if (z.imag() >= 0) xs.push_back(std::clamp(z.real(), -1.0, 1.0));
    std::sort(xs.begin(), xs.end(), std::greater<>());
    xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
             xs.end());
    for (std::size_t b = 0; b < xs.size() && b < 2; ++b)
        out.push_back({xs[b], std::acos(xs[b]) / p.L, static_cast<int>(b)});
    return out;
}

LadderFlux ladder_flux(const LadderParams& p, double k, int branch)
{
    for (const auto& s : solve_q(p, k)) {
        if (s.branch != branch) continue;
        LadderFlux out;
        out.cos_qL = s.cos_qL;
        out.q = s.q;
        out.eig = eigenvector(ladder_cell(p), k, {std::polar(1.0, s.q * p.L)});
        out.flux = flux_ratio(flux(out.eig.v, k, 0), flux(out.eig.v, k, 1), out.eig.v.squaredNorm());
        out.J_rung = flux(out.eig.v, k, 2);
        return out;
    }
    throw NoStateError("no ladder state on this branch at k");
}

VertexCoupling reduce_zero_length(const VertexCoupling& top, const VertexCoupling& bottom)
{
    if (top.n() != 3 || bottom.n() != 3) throw StructuralError("ladder junctions have 3 ends");
    // unknowns: psi (4), psi' (4), phi, phi'; columns 0..3, 4..7, 8, 9
    MatrixXc sys = MatrixXc::Zero(6, 10);
    for (Index r = 0; r < 3; ++r) {
        sys(r, 0) = top.A(r, 0);
        sys(r, 1) = top.A(r, 1);
        sys(r, 8) = top.A(r, 2);
        sys(r, 4) = top.B(r, 0);
        sys(r, 5) = top.B(r, 1);
        sys(r, 9) = top.B(r, 2);
        sys(3 + r, 2) = bottom.A(r, 0);
        sys(3 + r, 3) = bottom.A(r, 1);
        sys(3 + r, 8) = bottom.A(r, 2);
        sys(3 + r, 6) = bottom.B(r, 0);
        sys(3 + r, 7) = bottom.B(r, 1);
        // outward derivative at the far end of the rung is -phi'
        sys(3 + r, 9) = -bottom.B(r, 2);
    }
    MatrixXc inner = sys.rightCols(2);
    if (numerical_rank(inner, rank_tolerance) < 2)
        throw DomainError("rung values are not determined by the junctions (zero pivot)");
    MatrixXc left = left_null_space(inner, rank_tolerance);  // 4 x 6
    MatrixXc red = left * sys.leftCols(8);
    return {red.leftCols(4), red.rightCols(4)};
}

}  // namespace qgraph::ladder
