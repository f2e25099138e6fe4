#include "qgraph/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "qgraph/parallel.hpp"
#include "qgraph/polynomial.hpp"

namespace qgraph {

namespace {

int shift_of(const EdgeEnd& e, int d)
{
    return d < static_cast<int>(e.shift.size()) ? e.shift[d] : 0;
}

Complex slot_factor(const EdgeEnd& e, const std::vector<Complex>& phases)
{
    Complex f = 1.0;
    for (std::size_t d = 0; d < e.shift.size(); ++d) {
        if (e.shift[d] == 0) continue;
        Complex z = d < phases.size() ? phases[d] : Complex(1.0);
        f *= std::pow(z, e.shift[d]);
    }
    return f;
}

std::vector<Complex> full_phases(const UnitCell& cell, std::vector<Complex> phases)
{
    phases.resize(std::max<std::size_t>(phases.size(), cell.periods.size()), Complex(1.0));
    return phases;
}

// trace assembly of an already expanded cell
MatrixXc traces_expanded(const UnitCell& cell, double k, const std::vector<Complex>& phases)
{
    const Index ne = static_cast<Index>(cell.edges.size());
    MatrixXc M(2 * ne, 2 * ne);
    M.setZero();
    Index row = 0;
    for (const auto& vx : cell.vertices) {
        const Index n = static_cast<Index>(vx.ends.size());
        MatrixXc P = MatrixXc::Zero(n, 2 * ne), D = MatrixXc::Zero(n, 2 * ne);
        for (Index j = 0; j < n; ++j) {
            const EdgeEnd& end = vx.ends[j];
            const Edge& e = cell.edges[end.edge];
            const Complex f = slot_factor(end, phases);
            const Index c0 = 2 * end.edge;
            if (end.side == Side::start) {
                P(j, c0) += f;
                D(j, c0 + 1) += f;
            } else {
                const double kl = k * e.length;
                const double cs = std::cos(kl), sn = std::sin(kl);
                const Complex g = f * std::polar(1.0, e.potential * e.length);
                P(j, c0) += g * cs;
                P(j, c0 + 1) += g * (sn / k);
                // outward derivative at x = L is -Dpsi(L)
                D(j, c0) += g * (k * sn);
                D(j, c0 + 1) += -g * cs;
            }
        }
        M.middleRows(row, n) = vx.coupling.A * P + vx.coupling.B * D;
        row += n;
    }
    return M;
}

// amplitude <- trace: alpha = (c + s/(ik))/2, beta = (c - s/(ik))/2
VectorXc traces_to_amplitudes(const VectorXc& t, double k)
{
    VectorXc v(t.size());
    for (Index e = 0; 2 * e + 1 < t.size(); ++e) {
        const Complex c = t(2 * e), s = t(2 * e + 1);
        const Complex si = s / (I * k);
        v(2 * e) = 0.5 * (c + si);
        v(2 * e + 1) = 0.5 * (c - si);
    }
    return v;
}

struct Laurent {
    int lo = 0, hi = 0;
};

Laurent laurent_range(const UnitCell& cell, int d)
{
    std::vector<int> s0(cell.edges.size(), 0), s1(cell.edges.size(), 0);
    for (const auto& vx : cell.vertices)
        for (const auto& end : vx.ends)
            (end.side == Side::start ? s0 : s1)[end.edge] = shift_of(end, d);
    Laurent r;
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
        r.lo += 2 * std::min(s0[e], s1[e]);
        r.hi += 2 * std::max(s0[e], s1[e]);
    }
    return r;
}

struct ScaledPoly {
    VectorXc coeffs;  // of det(diag(scale) M_traces) * z^offset
    Complex log_unscale = 0;  // log of the factor turning it into det(assemble)
    int offset = 0;
    int degree = 0;
    bool flat = false;
};

ScaledPoly scaled_polynomial(const UnitCell& x, double k, int d, std::vector<Complex> phases,
                             double radius)
{
    ScaledPoly out;
    const Laurent lr = laurent_range(x, d);
    out.offset = -lr.lo;
    out.degree = lr.hi - lr.lo;
    const int n = out.degree + 1;

    phases[d] = radius;
    MatrixXc ref = traces_expanded(x, k, phases);
    Eigen::VectorXd scale(ref.rows());
    for (Index i = 0; i < ref.rows(); ++i) {
        const double rn = ref.row(i).norm();
        scale(i) = rn > 0 ? 1.0 / rn : 1.0;
    }
    std::vector<Complex> vals(n);
    for (int m = 0; m < n; ++m) {
        const Complex z = std::polar(radius, 2.0 * pi * m / n);
        phases[d] = z;
        MatrixXc M = scale.asDiagonal() * traces_expanded(x, k, phases);
        vals[m] = M.rows() ? Eigen::PartialPivLU<MatrixXc>(M).determinant() : Complex(1.0);
        vals[m] *= std::pow(z, out.offset);
    }
    out.coeffs = interpolate_on_circle(vals, radius);
    const double cmax = out.coeffs.size() ? out.coeffs.cwiseAbs().maxCoeff() : 0.0;
    // with unit rows, roundoff cannot produce coefficients this large. Below it
    // a small determinant can still be genuine (many short edges), so decide by
    // the conditioning at two samples instead.
    if (!(cmax > 1e-10)) {
        out.flat = true;
        for (int m : {0, n / 2}) {
            phases[d] = std::polar(radius, 2.0 * pi * m / n);
            MatrixXc M = scale.asDiagonal() * traces_expanded(x, k, phases);
            if (!M.rows()) continue;
            const Eigen::VectorXd sv = Eigen::JacobiSVD<MatrixXc>(M).singularValues();
            if (sv(sv.size() - 1) > 1e-12 * sv(0)) out.flat = false;
        }
    }

    Complex lu = 0;
    for (Index i = 0; i < scale.size(); ++i) lu -= std::log(scale(i));
    for (std::size_t e = 0; e < x.edges.size(); ++e) lu += std::log(Complex(0.0, -2.0 * k));
    out.log_unscale = lu;
    return out;
}

void require_k(double k)
{
    if (!(k > 0)) throw DomainError("wavenumber k must be positive");
}

}  // namespace

void check_cell(const UnitCell& cell)
{
    for (double p : cell.periods)
        if (!(p > 0)) throw StructuralError("periods must be positive");
    const std::size_t ne = cell.edges.size();
    for (const auto& e : cell.edges)
        if (!(e.length > 0)) throw StructuralError("edge lengths must be positive");
    std::vector<int> used(2 * ne, 0);
    auto mark = [&](const EdgeEnd& end) {
        if (end.edge < 0 || static_cast<std::size_t>(end.edge) >= ne)
            throw StructuralError("edge end refers to a missing edge");
        if (end.shift.size() > cell.periods.size())
            throw StructuralError("shift has more entries than Bloch directions");
        ++used[2 * end.edge + (end.side == Side::end ? 1 : 0)];
    };
    for (const auto& vx : cell.vertices) {
        if (vx.coupling.A.rows() != static_cast<Index>(vx.ends.size()) ||
            vx.coupling.A.cols() != vx.coupling.A.rows() ||
            vx.coupling.B.rows() != vx.coupling.A.rows() ||
            vx.coupling.B.cols() != vx.coupling.A.rows())
            throw StructuralError("vertex coupling size differs from its end count");
        for (const auto& end : vx.ends) mark(end);
    }
    for (const auto& id : cell.identifications) {
        if (id.direction < 0 || id.direction >= cell.directions())
            throw StructuralError("identification direction out of range");
        mark(id.from);
        mark(id.to);
    }
    for (int u : used)
        if (u != 1) throw StructuralError("every edge end must be attached exactly once");
}

UnitCell expand_identifications(const UnitCell& cell)
{
    UnitCell out = cell;
    out.identifications.clear();
    for (const auto& id : cell.identifications) {
        Vertex vx;
        vx.coupling = delta_coupling(2, 0.0);
        EdgeEnd from = id.from;
        from.shift.resize(std::max<std::size_t>(from.shift.size(), id.direction + 1), 0);
        from.shift[id.direction] -= 1;
        vx.ends = {from, id.to};
        out.vertices.push_back(vx);
    }
    return out;
}

MatrixXc assemble_traces(const UnitCell& cell, double k, const std::vector<Complex>& phases)
{
    require_k(k);
    check_cell(cell);
    return traces_expanded(expand_identifications(cell), k, full_phases(cell, phases));
}

MatrixXc assemble(const UnitCell& cell, double k, const std::vector<Complex>& phases)
{
    MatrixXc M = assemble_traces(cell, k, phases);
    // columns (c, s) -> (alpha, beta): c = alpha + beta, s = ik(alpha - beta)
    MatrixXc out(M.rows(), M.cols());
    for (Index e = 0; 2 * e + 1 < M.cols(); ++e) {
        out.col(2 * e) = M.col(2 * e) + (I * k) * M.col(2 * e + 1);
        out.col(2 * e + 1) = M.col(2 * e) - (I * k) * M.col(2 * e + 1);
    }
    return out;
}

SecularPolynomial secular_polynomial(const UnitCell& cell, double k, int direction,
                                     const std::vector<Complex>& phases,
                                     const PolynomialOptions& opt)
{
    require_k(k);
    check_cell(cell);
    if (direction < 0 || direction >= cell.directions())
        throw StructuralError("Bloch direction out of range");
    UnitCell x = expand_identifications(cell);
    ScaledPoly sp = scaled_polynomial(x, k, direction, full_phases(cell, phases), opt.radius);
    SecularPolynomial out;
    out.offset = sp.offset;
    out.degree = sp.degree;
    out.flat = sp.flat;
    out.coeffs = sp.coeffs * std::exp(sp.log_unscale);
    return out;
}

BlochRoots bloch_phases(const UnitCell& cell, double k, int direction,
                        const std::vector<Complex>& phases, const RootOptions& opt)
{
    require_k(k);
    check_cell(cell);
    if (direction < 0 || direction >= cell.directions())
        throw StructuralError("Bloch direction out of range");
    UnitCell x = expand_identifications(cell);
    ScaledPoly sp = scaled_polynomial(x, k, direction, full_phases(cell, phases), opt.radius);
    BlochRoots out;
    if (sp.flat) {
        out.flat = true;
        return out;
    }
    for (Complex z : polynomial_roots(sp.coeffs)) {
        if (std::abs(std::abs(z) - 1.0) <= opt.unit_tol) out.roots.push_back(z / std::abs(z));
    }
    std::sort(out.roots.begin(), out.roots.end(),
              [](Complex a, Complex b) { return std::arg(a) < std::arg(b); });
    return out;
}

int count_unit_roots(const UnitCell& cell, double k, int direction,
                     const std::vector<Complex>& phases, const RootOptions& opt)
{
    BlochRoots r = bloch_phases(cell, k, direction, phases, opt);
    return r.flat ? -1 : static_cast<int>(r.roots.size());
}

EigenResult eigenvector(const UnitCell& cell, double k, const std::vector<Complex>& phases,
                        double degeneracy_tol)
{
    MatrixXc Mt = assemble_traces(cell, k, phases);
    for (Index i = 0; i < Mt.rows(); ++i) {
        const double rn = Mt.row(i).norm();
        if (rn > 0) Mt.row(i) /= rn;
    }
    Eigen::JacobiSVD<MatrixXc> svd(Mt, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const Index n = Mt.cols();
    EigenResult r;
    r.sigma_min = s(n - 1) / s(0);
    r.sigma_next = n > 1 ? s(n - 2) / s(0) : 1.0;
    r.v = traces_to_amplitudes(svd.matrixV().col(n - 1), k);
    r.v.normalize();
    r.degenerate = r.sigma_next <= degeneracy_tol;
    if (r.degenerate) {
        VectorXc w = traces_to_amplitudes(svd.matrixV().col(n - 2), k);
        w -= r.v * r.v.dot(w);
        r.second = w.normalized();
    }
    MatrixXc M = assemble(cell, k, phases);
    r.residual = (M * r.v).norm() / M.norm();
    return r;
}

double flux(const VectorXc& v, double k, int edge)
{
    return k * (std::norm(v(2 * edge)) - std::norm(v(2 * edge + 1)));
}

Complex psi_at(const UnitCell& cell, const VectorXc& v, double k, int edge, double x)
{
    const double A = cell.edges[edge].potential;
    return std::polar(1.0, A * x) * (v(2 * edge) * std::polar(1.0, k * x) +
                                     v(2 * edge + 1) * std::polar(1.0, -k * x));
}

double current_at(const UnitCell& cell, const VectorXc& v, double k, int edge, double x)
{
    const double A = cell.edges[edge].potential;
    const Complex psi = psi_at(cell, v, k, edge, x);
    const Complex dpsi = std::polar(1.0, A * x) * (I * k) *
                         (v(2 * edge) * std::polar(1.0, k * x) -
                          v(2 * edge + 1) * std::polar(1.0, -k * x));
    return std::imag(std::conj(psi) * dpsi);
}

std::vector<double> kirchhoff_residuals(const UnitCell& cell, const VectorXc& v, double k)
{
    UnitCell x = expand_identifications(cell);
    std::vector<double> out;
    for (const auto& vx : x.vertices) {
        double acc = 0;
        for (const auto& end : vx.ends) {
            const double J = flux(v, k, end.edge);
            acc += end.side == Side::end ? J : -J;
        }
        out.push_back(acc);
    }
    return out;
}

FluxResult flux_ratio(double J1, double J2, double vnorm2)
{
    FluxResult f;
    f.J1 = J1;
    f.J2 = J2;
    const double tiny = 1e-12 * vnorm2;
    const bool z1 = std::abs(J1) < tiny, z2 = std::abs(J2) < tiny;
    f.rel_sign = (z1 || z2) ? 0 : (J1 * J2 > 0 ? 1 : -1);
    if (z2) f.log_ratio = std::numeric_limits<double>::infinity();
    else if (z1) f.log_ratio = -std::numeric_limits<double>::infinity();
    else f.log_ratio = std::log10(std::abs(J1 / J2));
    return f;
}

std::vector<BandEdge> band_edges(const UnitCell& cell, const EdgeScanOptions& opt)
{
    if (opt.n < 2) throw DomainError("edge scan needs at least 2 points");
    if (!(opt.kmin > 0) || !(opt.kmax > opt.kmin)) throw DomainError("bad k range");
    check_cell(cell);
    std::vector<double> ks(opt.n);
    for (int i = 0; i < opt.n; ++i)
        ks[i] = opt.kmin + (opt.kmax - opt.kmin) * i / (opt.n - 1);
    auto count = [&](double k) {
        return count_unit_roots(cell, k, opt.direction, opt.phases, opt.roots);
    };
    std::vector<int> c = parallel_map(ks.size(), [&](std::size_t i) { return count(ks[i]); },
                                      opt.threads);
    std::vector<std::size_t> changes;
    for (std::size_t i = 0; i + 1 < ks.size(); ++i)
        if (c[i] != c[i + 1] && c[i] >= 0 && c[i + 1] >= 0) changes.push_back(i);
    return parallel_map(
        changes.size(),
        [&](std::size_t j) {
            const std::size_t i = changes[j];
            double lo = ks[i], hi = ks[i + 1];
            while (hi - lo > opt.tol) {
                const double mid = 0.5 * (lo + hi);
                if (count(mid) == c[i]) lo = mid;
                else hi = mid;
            }
            return BandEdge{0.5 * (lo + hi), c[i], c[i + 1]};
        },
        opt.threads);
}

std::vector<Band> bands_from_edges(const std::vector<BandEdge>& edges, double kmin, double kmax,
                                   int count_at_kmin)
{
    std::vector<Band> out;
    int cur = count_at_kmin;
    double start = kmin;
    int peak = cur;
    for (const auto& e : edges) {
        if (cur > 0 && e.count_above <= 0) {
            out.push_back({start, e.k, peak});
        } else if (cur <= 0 && e.count_above > 0) {
            start = e.k;
            peak = 0;
        }
        cur = e.count_above;
        peak = std::max(peak, cur);
    }
    if (cur > 0) out.push_back({start, kmax, peak});
    return out;
}

std::vector<Band> generic_bands(const UnitCell& cell, const EdgeScanOptions& opt)
{
    auto edges = band_edges(cell, opt);
    const int c0 = count_unit_roots(cell, opt.kmin, opt.direction, opt.phases, opt.roots);
    return bands_from_edges(edges, opt.kmin, opt.kmax, c0);
}

BandScan scan(const UnitCell& cell, const std::vector<double>& k_grid, const ScanOptions& opt)
{
    check_cell(cell);
    BandScan out;
    out.directions = cell.directions();
    out.edges = static_cast<int>(cell.edges.size());

    auto per_k = parallel_map(
        k_grid.size(),
        [&](std::size_t i) {
            std::vector<ScanRow> rows;
            const double k = k_grid[i];
            if (k < 1e-6) return rows;
            BlochRoots br = bloch_phases(cell, k, opt.direction, opt.phases, opt.roots);
            for (Complex z : br.roots) {
                if (z.imag() < -1e-12) continue;
                std::vector<Complex> ph = full_phases(cell, opt.phases);
                ph[opt.direction] = z;
                EigenResult ev = eigenvector(cell, k, ph);
                ScanRow row;
                row.k = k;
                row.E = k * k;
                row.q.assign(cell.directions(), 0.0);
                for (int d = 0; d < cell.directions(); ++d)
                    row.q[d] = std::arg(ph[d]) / cell.periods[d];
                row.cos_qP = std::cos(std::arg(z));
                row.v = ev.v;
                for (int e = 0; e < out.edges; ++e) row.fluxes.push_back(flux(ev.v, k, e));
                const double Ja = opt.flux_a < out.edges ? row.fluxes[opt.flux_a] : 0.0;
                const double Jb = opt.flux_b < out.edges ? row.fluxes[opt.flux_b] : 0.0;
                row.ratio = flux_ratio(Ja, Jb, ev.v.squaredNorm());
                rows.push_back(std::move(row));
            }
            std::sort(rows.begin(), rows.end(),
                      [](const ScanRow& a, const ScanRow& b) { return a.cos_qP < b.cos_qP; });
            return rows;
        },
        opt.threads);

    // continuity labels: nearest previous cos value, new label when none is close
    std::vector<std::pair<int, double>> prev;
    int next_label = 0;
    for (auto& rows : per_k) {
        std::vector<std::pair<int, double>> cur;
        std::vector<bool> taken(prev.size(), false);
        for (auto& row : rows) {
            int best = -1;
            double bd = 0.5, second = 1e300;
            for (std::size_t j = 0; j < prev.size(); ++j) {
                if (taken[j]) continue;
                const double dist = std::abs(prev[j].second - row.cos_qP);
                if (dist < bd) {
                    second = bd;
                    bd = dist;
                    best = static_cast<int>(j);
                } else if (dist < second) {
                    second = dist;
                }
            }
            int label;
            if (best >= 0) {
                taken[best] = true;
                label = prev[best].first;
                row.tie = second - bd < 1e-6;
            } else {
                label = next_label++;
            }
            row.branch = "b" + std::to_string(label);
            cur.push_back({label, row.cos_qP});
            out.rows.push_back(std::move(row));
        }
        prev = std::move(cur);
    }
    return out;
}

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string band_scan_csv(const BandScan& s)
{
    std::ostringstream os;
    os << "k,E";
    for (int d = 0; d < s.directions; ++d) os << ",q" << d;
    os << ",branch";
    for (int e = 0; e < s.edges; ++e) os << ",J" << (e + 1);
    os << ",log_ratio,rel_sign\n";
    for (const auto& r : s.rows) {
        os << format_number(r.k) << ',' << format_number(r.E);
        for (double q : r.q) os << ',' << format_number(q);
        os << ',' << r.branch;
        for (double J : r.fluxes) os << ',' << format_number(J);
        os << ',' << format_number(r.ratio.log_ratio) << ',' << r.ratio.rel_sign << '\n';
    }
    return os.str();
}

}  // namespace qgraph
