#include "qgraph/lattice2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qgraph/parallel.hpp"

namespace qgraph::lattice2d {

namespace {

void check(const Lattice2DParams& p)
{
    if (!(p.L > 0) || !(p.ell > 0)) throw DomainError("lattice needs L > 0 and ell > 0");
}

double trig(CrossTerm t, double x) { return t == CrossTerm::cosine ? std::cos(x) : std::sin(x); }

double golden_min(const auto& f, double lo, double hi, double tol)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

UnitCell lattice_cell(const Lattice2DParams& p)
{
    check(p);
    UnitCell cell;
    cell.periods = {p.L, 2 * p.ell};
    cell.edges = {{p.L, 0.0, "strand1"}, {p.L, 0.0, "strand2"}, {p.ell, 0.0, "e3"}, {p.ell, 0.0, "e4"}};
    cell.vertices.push_back({delta_coupling(4, p.v),
                             {{0, Side::end, {-1, 0}}, {3, Side::end, {0, -1}}, {0, Side::start, {0, 0}},
                              {2, Side::start, {0, 0}}}});
    cell.vertices.push_back({delta_prime_coupling(4, p.u),
                             {{1, Side::end, {-1, 0}}, {2, Side::end, {0, 0}}, {1, Side::start, {0, 0}},
                              {3, Side::start, {0, 0}}}});
    return cell;
}

double secular_2d_generic(const Lattice2DParams& p, double k, double qx)
{
    const UnitCell cell = lattice_cell(p);
    SecularPolynomial sp = secular_polynomial(cell, k, 1, {std::polar(1.0, qx * p.L), 1.0});
    if (sp.flat || sp.coeffs.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const Complex c1 = sp.coeffs(1), c2 = sp.coeffs(2);
    const double scale = sp.coeffs.cwiseAbs().maxCoeff();
    if (std::abs(c2) <= 1e-14 * scale) return std::numeric_limits<double>::infinity();
    // both roots multiply to 1, so their mean is cos(2 ell q_y)
    return (-c1 / (2.0 * c2)).real();
}

double secular_2d_display(const Lattice2DParams& p, double k, double qx, CrossTerm t)
{
    check(p);
    const double L = p.L, l = p.ell, u = p.u, v = p.v;
    const double s = std::sin(k * L);
    if (std::abs(s) <= 1e-6) throw DomainError("sin(kL) guard");
    const double c2l = std::cos(2 * k * l) + 1;
    return (1 / (16 * s * s)) *
           (s * (8 * k * u + 8 * v / k) * c2l * std::cos(L * qx) - 8 * c2l * trig(t, 2 * L * qx) +
            (4 * v / k - 4 * k * u) * (std::sin(2 * k * L) - std::sin(2 * k * l) + std::sin(2 * k * (L + l))) +
            u * v * std::cos(2 * k * (L - l)) - 2 * u * v + (u * v + 16) * std::cos(2 * k * (L + l)) +
            (2 * u * v + 8) * (std::cos(2 * k * L) - std::cos(2 * k * l)));
}

double secular_2d_equal(const Lattice2DParams& p, double k, double qx, CrossTerm t)
{
    check(p);
    const double L = p.L, u = p.u, v = p.v;
    const double s = std::sin(k * L);
    if (std::abs(s) <= 1e-6) throw DomainError("sin(kL) guard");
    return (1 / (4 * s * s)) *
           ((std::sin(k * L) + std::sin(3 * k * L)) * (k * u + v / k) * std::cos(L * qx) -
            2 * (std::cos(2 * k * L) + 1) * trig(t, 2 * L * qx) + std::sin(4 * k * L) * (v / k - k * u) +
            (u * v / 4 + 4) * std::cos(4 * k * L) - u * v / 4);
}

double secular_2d(const Lattice2DParams& p, double k, double qx)
{
    if (!(k > 0)) throw DomainError("k must be positive");
    if (std::abs(std::sin(k * p.L)) <= 1e-6) return secular_2d_generic(p, k, qx);
    if (p.ell == p.L) return secular_2d_equal(p, k, qx, CrossTerm::cosine);
    return secular_2d_display(p, k, qx, CrossTerm::cosine);
}

std::optional<double> solve_qy(const Lattice2DParams& p, double k, double qx)
{
    const double X = secular_2d(p, k, qx);
    if (!(std::abs(X) <= 1.0)) return std::nullopt;
    return std::acos(X) / (2 * p.ell);
}

double parity_probe(const Lattice2DParams& p, int probes, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> kd(0.3, 6.0), qd(0.05, pi / p.L);
    double worst = 0;
    for (int i = 0; i < probes; ++i) {
        const double k = kd(rng), q = qd(rng);
        const double a = secular_2d_generic(p, k, q), b = secular_2d_generic(p, k, -q);
        worst = std::max(worst, std::abs(a - b) / (1 + std::abs(a)));
    }
    return worst;
}

std::vector<double> qx_grid(const Lattice2DParams& p, int n, bool symmetric)
{
    std::vector<double> g(n);
    const double lo = symmetric ? 0.0 : -pi / p.L, hi = pi / p.L;
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / std::max(n - 1, 1);
    return g;
}

bool in_band(const Lattice2DParams& p, double k, const std::vector<double>& grid)
{
    const std::size_t n = grid.size();
    std::vector<double> X(n);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t ilo = 0, ihi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        X[i] = secular_2d_generic(p, k, grid[i]);
        if (std::isnan(X[i])) return true;  // flat band: states at every q
        if (std::abs(X[i]) <= 1.0) return true;
        if (X[i] < lo) lo = X[i], ilo = i;
        if (X[i] > hi) hi = X[i], ihi = i;
    }
    if (lo < -1.0 && hi > 1.0) return true;  // X is continuous in qx, it crosses [-1, 1]
    // all samples on one side: a narrow window between grid points may still dip in
    const bool above = lo > 1.0;
    const std::size_t i0 = above ? ilo : ihi;
    const double a = grid[i0 == 0 ? 0 : i0 - 1], b = grid[i0 + 1 < n ? i0 + 1 : n - 1];
    auto f = [&](double q) {
        const double x = secular_2d_generic(p, k, q);
        return above ? x : -x;
    };
    const double qbest = golden_min(f, a, b, 1e-10);
    return std::abs(secular_2d_generic(p, k, qbest)) <= 1.0;
}

GapReport find_gaps(const Lattice2DParams& p, const GapOptions& opt)
{
    check(p);
    if (opt.nk < 2 || opt.nqx < 2) throw DomainError("gap scan needs at least 2 points per axis");
    GapReport rep;
    rep.parity_residual = parity_probe(p);
    rep.symmetric_grid = rep.parity_residual < 1e-8;
    const std::vector<double> grid = qx_grid(p, opt.nqx, rep.symmetric_grid);
    std::vector<double> ks(opt.nk);
    for (int i = 0; i < opt.nk; ++i) ks[i] = opt.kmin + (opt.kmax - opt.kmin) * i / (opt.nk - 1);
    std::vector<int> inb = parallel_map(
        ks.size(), [&](std::size_t i) { return in_band(p, ks[i], grid) ? 1 : 0; }, opt.threads);

    // pairs of grid cells where the status flips, refined independently
    std::vector<std::size_t> flips;
    for (std::size_t i = 0; i + 1 < ks.size(); ++i)
        if (inb[i] != inb[i + 1]) flips.push_back(i);
    std::vector<double> edges = parallel_map(
        flips.size(),
        [&](std::size_t j) {
            const std::size_t i = flips[j];
            double lo = ks[i], hi = ks[i + 1];
            const int s = inb[i];
            while (hi - lo > opt.tol * 1e-3) {
                const double mid = 0.5 * (lo + hi);
                if ((in_band(p, mid, grid) ? 1 : 0) == s) lo = mid;
                else hi = mid;
            }
            return 0.5 * (lo + hi);
        },
        opt.threads);

    double start = inb[0] ? -1.0 : opt.kmin;
    for (std::size_t j = 0; j < flips.size(); ++j) {
        const std::size_t i = flips[j];
        if (inb[i]) start = edges[j];
        else rep.gaps.push_back({start, edges[j]});
    }
    if (!inb.back()) rep.gaps.push_back({start, opt.kmax});
    return rep;
}

Currents2D currents_2d(const Lattice2DParams& p, double k, double qx, double qy)
{
    const UnitCell cell = lattice_cell(p);
    const std::vector<Complex> ph = {std::polar(1.0, qx * p.L), std::polar(1.0, 2 * p.ell * qy)};
    Currents2D c;
    c.eig = eigenvector(cell, k, ph);
    if (c.eig.sigma_min > 1e-8) throw NoStateError("(k, qx, qy) is not on the dispersion surface");
    const VectorXc& v = c.eig.v;
    c.J1x = flux(v, k, 0);
    c.J2x = flux(v, k, 1);
    c.J1y = flux(v, k, 2);
    c.J2y = flux(v, k, 3);
    c.vnorm2 = v.squaredNorm();
    c.kirchhoff = kirchhoff_residuals(cell, v, k);
    return c;
}

CurrentRoot find_current_root(const Lattice2DParams& p, double qx, double klo, double khi,
                              unsigned mask, double root_tol)
{
    auto value = [&](const Currents2D& c) {
        double s = 0;
        if (mask & J1x) s += std::abs(c.J1x);
        if (mask & J2x) s += std::abs(c.J2x);
        if (mask & J1y) s += std::abs(c.J1y);
        if (mask & J2y) s += std::abs(c.J2y);
        return s;
    };
    auto at = [&](double k) -> std::optional<Currents2D> {
        auto qy = solve_qy(p, k, qx);
        if (!qy) return std::nullopt;
        return currents_2d(p, k, qx, *qy);
    };
    CurrentRoot best;
    best.value = std::numeric_limits<double>::infinity();
    // band edges are evaluated at the exact q_y = 0 or pi/(2 ell); acos of a
    // rounded X would leave currents of order sqrt(eps)
    auto at_edge = [&](double k, double target) -> std::optional<Currents2D> {
        try {
            return currents_2d(p, k, qx, std::acos(target) / (2 * p.ell));
        } catch (const NoStateError&) {
            return at(k);
        }
    };
    auto consider_state = [&](double k, const std::optional<Currents2D>& c) {
        if (!c) return;
        const double f = value(*c);
        if (f < best.value) {
            best.value = f;
            best.k = k;
            best.currents = *c;
        }
    };
    auto consider = [&](double k) { consider_state(k, at(k)); };

    const int n = 400;
    std::vector<double> ks(n + 1), X(n + 1);
    for (int i = 0; i <= n; ++i) {
        ks[i] = klo + (khi - klo) * i / n;
        X[i] = secular_2d(p, ks[i], qx);
    }
    for (int i = 0; i < n; ++i) {
        const bool a = std::abs(X[i]) <= 1, b = std::abs(X[i + 1]) <= 1;
        if (a) consider(ks[i]);
        if (a != b) {
            // q_y band edge: X = +-1, bisect and evaluate on the inside
            const double target = (a ? X[i + 1] : X[i]) > 0 ? 1.0 : -1.0;
            double lo = ks[i], hi = ks[i + 1];
            auto g = [&](double k) { return secular_2d(p, k, qx) - target; };
            const double glo = g(lo);
            for (int it = 0; it < 200 && hi - lo > 1e-15 * (1 + hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((g(mid) > 0) == (glo > 0)) lo = mid;
                else hi = mid;
            }
            const double ke = std::abs(secular_2d(p, lo, qx)) <= 1 ? lo : hi;
            consider_state(ke, at_edge(ke, target));
        }
    }
    // interior minima of the sampled sum
    if (best.k > klo && best.k < khi && std::isfinite(best.value)) {
        const double h = (khi - klo) / n;
        auto f = [&](double k) {
            auto c = at(k);
            return c ? value(*c) : std::numeric_limits<double>::infinity();
        };
        consider(golden_min(f, std::max(klo, best.k - h), std::min(khi, best.k + h), 1e-13));
    }
    best.found = std::isfinite(best.value) && best.value <= root_tol * best.currents.vnorm2;
    return best;
}

}  // namespace qgraph::lattice2d
