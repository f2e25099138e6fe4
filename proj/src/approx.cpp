#include "qgraph/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qgraph/chain.hpp"
#include "qgraph/ladder.hpp"

namespace qgraph::approx {

namespace {

constexpr double entry_tol = 1e-14;

bool nonzero(Complex c) { return std::abs(c) > entry_tol; }

struct SignedMod {
    std::vector<int>* signs;
    double operator()(Complex c) const
    {
        signs->push_back(c.real() >= 0 ? 1 : -1);
        return signed_modulus(c);
    }
};

double phase_potential(Complex t, double d0)
{
    return (std::arg(t) - (t.real() < 0 ? pi : 0.0)) / (2 * d0);
}

}  // namespace

double signed_modulus(Complex c) { return c.real() >= 0 ? std::abs(c) : -std::abs(c); }

ApproxGraph build_from_st(const STForm& st, double d0, int source_vertex)
{
    if (!(d0 > 0)) throw DomainError("d0 must be positive");
    const Index n = st.n, m = st.m;
    ApproxGraph g;
    g.d0 = d0;
    SignedMod sm{&g.signs};
    const MatrixXc& S = st.S;
    const MatrixXc& T = st.T;
    auto overlap = [&](Index j, Index k) {  // sum_l T_jl conj(T_kl)
        Complex acc = 0;
        for (Index l = 0; l < n - m; ++l) acc += T(j, l) * std::conj(T(k, l));
        return acc;
    };

    for (Index j = 0; j < m; ++j)
        for (Index k = m; k < n; ++k)
            if (nonzero(T(j, k - m))) {
                const Complex t = T(j, k - m);
                g.lines.push_back({int(j), int(k), (-2 + 1 / sm(t)) / d0, phase_potential(t, d0), 1});
            }
    for (Index j = 0; j < m; ++j)
        for (Index k = j + 1; k < m; ++k) {
            bool shared = false;
            for (Index l = 0; l < n - m; ++l) shared = shared || (nonzero(T(j, l)) && nonzero(T(k, l)));
            const int rule = shared ? 2 : (nonzero(S(j, k)) ? 3 : 0);
            if (!rule) continue;
            const Complex gjk = d0 * S(j, k) + overlap(j, k);
            g.lines.push_back({int(j), int(k), -(2 + 1 / sm(gjk)) / d0, phase_potential(gjk, d0), rule});
        }

    g.nodes.resize(n);
    for (const auto& ln : g.lines) {
        ++g.nodes[ln.j].degree;
        ++g.nodes[ln.k].degree;
    }
    for (Index k = m; k < n; ++k) {
        double acc = 1 - g.nodes[k].degree;
        for (Index h = 0; h < m; ++h)
            if (nonzero(T(h, k - m))) acc += sm(T(h, k - m));
        g.nodes[k].v = acc / d0;
    }
    for (Index j = 0; j < m; ++j) {
        double acc = S(j, j).real() - g.nodes[j].degree / d0;
        for (Index l = 0; l < n - m; ++l) {
            if (!nonzero(T(j, l))) continue;
            const double t = sm(T(j, l));
            acc += (1 + t) * t / d0;
        }
        // the diagonal term is left out: including it does not reproduce the
        // target coupling as d0 -> 0
        for (Index k = 0; k < m; ++k) {
            if (k == j) continue;
            const Complex x = S(j, k) + overlap(j, k) / d0;
            if (nonzero(x)) acc -= sm(x);
        }
        g.nodes[j].v = acc;
    }
    for (Index i = 0; i < n; ++i) {
        g.nodes[i].source_vertex = source_vertex;
        g.nodes[i].source_slot = st.order.empty() ? i : st.order[i];
        g.nodes[i].label = std::to_string(i + 1);
    }
    return g;
}

ApproxGraph ladder_vertex_approx(double a, double c, double d0)
{
    if (a == 0) throw DomainError("ladder approximation needs a != 0");
    const auto gp = ladder::chain_limit_params(a, a, c, 1.0);
    ApproxGraph top = build_from_st(ladder::general_top_st(gp), d0, 0);
    ApproxGraph bot = build_from_st(ladder::general_bottom_st(gp), d0, 1);
    const char* top_labels[] = {"1", "2", "5"};
    const char* bot_labels[] = {"3", "4", "6"};
    ApproxGraph g;
    g.d0 = d0;
    for (int i = 0; i < 3; ++i) {
        top.nodes[i].label = top_labels[i];
        bot.nodes[i].label = bot_labels[i];
    }
    g.nodes = top.nodes;
    g.nodes.insert(g.nodes.end(), bot.nodes.begin(), bot.nodes.end());
    g.lines = top.lines;
    for (auto ln : bot.lines) {
        ln.j += 3;
        ln.k += 3;
        g.lines.push_back(ln);
    }
    g.signs = top.signs;
    g.signs.insert(g.signs.end(), bot.signs.begin(), bot.signs.end());
    return g;
}

std::map<std::string, double> paper_display_star(double a, double c, double d0)
{
    std::map<std::string, double> v;
    v["v1"] = v["v2"] = -c - (2 * a * a - 2 * a + 3) / d0;
    v["v3"] = v["v4"] = (-1 + 2 * a) / d0;
    v["w12"] = -(2 + 1 / (d0 * c + 2 * a * a)) / d0;
    v["w13"] = v["w14"] = v["w23"] = v["w24"] = (-2 + 1 / a) / d0;
    return v;
}

std::map<std::string, double> paper_display_ladder(double a, double c, double d0)
{
    if (a == 0 || c == 0) throw DomainError("printed ladder values divide by a and c");
    std::map<std::string, double> v;
    v["v1"] = v["v2"] = -c - (a * a - a + 2) / d0;
    v["v3"] = 0;
    v["v4"] = v["v6"] = 1 / d0;
    v["v5"] = (-1 + 2 * a) / d0;
    v["w12"] = -(2 + 1 / (d0 * c + a * a)) / d0;
    v["w15"] = v["w25"] = (-2 + 1 / c) / d0;
    v["w34"] = v["w36"] = -1 / d0;
    return v;
}

std::map<std::string, double> named_values(const ApproxGraph& g)
{
    std::map<std::string, double> out;
    for (const auto& nd : g.nodes) out["v" + nd.label] = nd.v;
    for (const auto& ln : g.lines) {
        std::string a = g.nodes[ln.j].label, b = g.nodes[ln.k].label;
        if (b < a) std::swap(a, b);
        out["w" + a + b] = ln.w;
    }
    return out;
}

UnitCell substitute(const UnitCell& cell, const ApproxGraph& g, const std::vector<int>& vertex_map)
{
    UnitCell out;
    out.periods = cell.periods;
    out.edges = cell.edges;
    out.identifications = cell.identifications;
    for (std::size_t i = 0; i < cell.vertices.size(); ++i)
        if (std::find(vertex_map.begin(), vertex_map.end(), int(i)) == vertex_map.end())
            out.vertices.push_back(cell.vertices[i]);

    std::vector<std::vector<EdgeEnd>> ends(g.nodes.size());
    for (std::size_t j = 0; j < g.nodes.size(); ++j) {
        const auto& nd = g.nodes[j];
        const auto& src = cell.vertices.at(vertex_map.at(nd.source_vertex));
        ends[j].push_back(src.ends.at(nd.source_slot));
    }
    for (const auto& ln : g.lines) {
        // both halves run from their node to the midpoint. psi_k = conj(T) psi_j
        // needs a phase of -2 A d0 from j to k, so the j half carries -A
        const int e1 = static_cast<int>(out.edges.size());
        out.edges.push_back({g.d0, -ln.A, ""});
        const int e2 = static_cast<int>(out.edges.size());
        out.edges.push_back({g.d0, ln.A, ""});
        ends[ln.j].push_back({e1, Side::start, {}});
        ends[ln.k].push_back({e2, Side::start, {}});
        out.vertices.push_back({delta_coupling(2, ln.w), {{e1, Side::end, {}}, {e2, Side::end, {}}}});
    }
    for (std::size_t j = 0; j < g.nodes.size(); ++j)
        out.vertices.push_back({delta_coupling(int(ends[j].size()), g.nodes[j].v), ends[j]});
    return out;
}

ConvergenceReport compare_bands(const UnitCell& reference, const std::vector<UnitCell>& approximations,
                                const std::vector<double>& d0_list, const StudyOptions& opt)
{
    ConvergenceReport rep;
    rep.d0 = d0_list;
    EdgeScanOptions eo;
    eo.kmin = opt.kmin;
    eo.kmax = opt.kmax;
    eo.n = opt.n;
    eo.threads = opt.threads;
    eo.tol = 1e-10;
    rep.reference = generic_bands(reference, eo);
    if (static_cast<int>(rep.reference.size()) > opt.bands) rep.reference.resize(opt.bands);
    if (static_cast<int>(rep.reference.size()) < opt.bands)
        rep.warnings.push_back("fewer reference bands than requested in the k range");

    for (std::size_t i = 0; i < approximations.size(); ++i) {
        const double d0 = d0_list[i];
        if (d0 * opt.kmax > 0.1)
            rep.warnings.push_back("d0 = " + format_number(d0) + " is not small against 1/kmax");
        std::vector<Band> ab = generic_bands(approximations[i], eo);
        double worst = 0;
        for (std::size_t b = 0; b < rep.reference.size(); ++b) {
            const Band& r = rep.reference[b];
            // partner: largest overlap with the reference band
            const Band* best = nullptr;
            double bo = 0;
            for (const auto& x : ab) {
                const double ov = std::min(x.hi, r.hi) - std::max(x.lo, r.lo);
                if (ov > bo) bo = ov, best = &x;
            }
            ConvergenceRow row;
            row.d0 = d0;
            row.band = static_cast<int>(b) + 1;
            const double inf = std::numeric_limits<double>::infinity();
            const double nan = std::numeric_limits<double>::quiet_NaN();
            const bool lo_bound = r.lo <= opt.kmin + 1e-12, hi_bound = r.hi >= opt.kmax - 1e-12;
            row.edge_lo_err = lo_bound ? nan : (best ? std::abs(best->lo - r.lo) : inf);
            row.edge_hi_err = hi_bound ? nan : (best ? std::abs(best->hi - r.hi) : inf);
            for (double e : {row.edge_lo_err, row.edge_hi_err})
                if (!std::isnan(e)) worst = std::max(worst, e);
            rep.rows.push_back(row);
        }
        rep.max_err.push_back(worst);
    }
    rep.strictly_decreasing = rep.max_err.size() >= 2;
    for (std::size_t i = 0; i + 1 < rep.max_err.size(); ++i) {
        if (!(rep.max_err[i + 1] < rep.max_err[i])) rep.strictly_decreasing = false;
        rep.order_ratios.push_back(rep.max_err[i + 1] / rep.max_err[i]);
    }
    return rep;
}

namespace {

void note_sign_flips(ConvergenceReport& rep, const std::vector<ApproxGraph>& gs)
{
    for (std::size_t i = 1; i < gs.size(); ++i)
        if (gs[i].signs != gs[0].signs) rep.sign_flip = true;
    if (rep.sign_flip) rep.warnings.push_back("signed-modulus branch changes across the d0 list");
}

}  // namespace

ConvergenceReport convergence_study(double a, double c, const std::vector<double>& d0_list,
                                    const StudyOptions& opt)
{
    const chain::ChainParams cp{a, a, c, 1.0, opt.L};
    const UnitCell ref = chain::chain_cell(cp);
    const STForm st = chain_family({a, a, c, 1.0});
    std::vector<UnitCell> cells;
    std::vector<ApproxGraph> gs;
    for (double d0 : d0_list) {
        gs.push_back(build_from_st(st, d0));
        cells.push_back(substitute(ref, gs.back(), {0}));
    }
    ConvergenceReport rep = compare_bands(ref, cells, d0_list, opt);
    note_sign_flips(rep, gs);
    return rep;
}

ConvergenceReport ladder_convergence_study(double a, double c, double ell,
                                           const std::vector<double>& d0_list,
                                           const StudyOptions& opt)
{
    const auto gp = ladder::chain_limit_params(a, a, c, 1.0);
    const UnitCell ref = ladder::ladder_cell(ladder::general_top(gp), ladder::general_bottom(gp), opt.L, ell);
    std::vector<UnitCell> cells;
    std::vector<ApproxGraph> gs;
    for (double d0 : d0_list) {
        gs.push_back(ladder_vertex_approx(a, c, d0));
        cells.push_back(substitute(ref, gs.back(), {0, 1}));
    }
    ConvergenceReport rep = compare_bands(ref, cells, d0_list, opt);
    for (double d0 : d0_list)
        if (!(d0 < ell)) rep.warnings.push_back("d0 = " + format_number(d0) + " is not below the rung length");
    note_sign_flips(rep, gs);
    return rep;
}

std::string convergence_csv(const ConvergenceReport& r)
{
    std::ostringstream os;
    os << "d0,band,edge_lo_err,edge_hi_err\n";
    for (const auto& row : r.rows)
        os << format_number(row.d0) << ',' << row.band << ',' << format_number(row.edge_lo_err) << ','
           << format_number(row.edge_hi_err) << '\n';
    return os.str();
}

}  // namespace qgraph::approx
