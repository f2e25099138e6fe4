#include "qgraph/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qgraph/parallel.hpp"

namespace qgraph::chain {

namespace {

BranchValues solve(double a, double b, double k, double R, double S)
{
    const double den = 4 * a * b * k;
    if (std::abs(den) <= 1e-12)
        throw DomainError("4abk vanishes; use bloch::bloch_phases on chain_cell instead");
    const Complex sq = std::sqrt(Complex(R * R + 2 * a * b * k * S, 0.0));
    return {(R + sq) / den, (R - sq) / den};
}

// where two branches cross the discriminant has a double zero and rounding
// can leave a tiny imaginary part; treat that as real
constexpr double imag_tol = 1e-9;

bool is_real(Complex x) { return std::abs(x.imag()) <= imag_tol; }

bool in_band(const ChainParams& p, double k, Branch br)
{
    const Complex x = dispersion_closed_form(p, k).get(br);
    return is_real(x) && std::abs(x.real()) <= 1.0;
}

double abs_real(const ChainParams& p, double k, Branch br)
{
    const Complex x = dispersion_closed_form(p, k).get(br);
    return is_real(x) ? std::abs(x.real()) : -1.0;
}

double bisect_edge(const ChainParams& p, Branch br, double lo, double hi, bool lo_inside)
{
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (in_band(p, mid, br) == lo_inside) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<BandInterval> branch_bands(const ChainParams& p, Branch br, double kmin, double kmax,
                                       int resolution)
{
    std::vector<BandInterval> out;
    const int n = std::max(resolution, 2);
    double prev_k = kmin;
    bool prev_in = in_band(p, kmin, br);
    double start = kmin;
    for (int i = 1; i < n; ++i) {
        const double k = kmin + (kmax - kmin) * i / (n - 1);
        const bool in = in_band(p, k, br);
        if (in != prev_in) {
            const double e = bisect_edge(p, br, prev_k, k, prev_in);
            if (in) start = e;
            else out.push_back({start, e});
        }
        prev_in = in;
        prev_k = k;
    }
    if (prev_in) out.push_back({start, kmax});
    return out;
}

// golden-section maximum of |x| on [lo, hi]
double refine_peak(const ChainParams& p, Branch br, double lo, double hi)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = abs_real(p, x1, br), f2 = abs_real(p, x2, br);
    while (hi - lo > 1e-11) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = abs_real(p, x2, br);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = abs_real(p, x1, br);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

char label(Branch b) { return b == Branch::plus ? '+' : '-'; }

BranchValues dispersion_closed_form(const ChainParams& p, double k)
{
    if (!(k > 0)) throw DomainError("k must be positive");
    const double a = p.a, b = p.b, c = p.c, d = p.d, L = p.L;
    const double K = (a * a + b * b) * (d - 1) * (d - 1) + d * d + 1;
    const double R = (a - b) * (a - b) * k * std::cos(k * L) +
                     c * (d - a * b * (d - 1) * (d - 1)) * std::sin(k * L);
    const double S = (2 * a * a + 2 * b * b - 1) * k +
                     (2 * a * a + 2 * b * b + 1) * k * std::cos(2 * k * L) +
                     c * K * std::sin(2 * k * L);
    return solve(a, b, k, R, S);
}

BranchValues dispersion_paper_display(const ChainParams& p, double k)
{
    if (!(k > 0)) throw DomainError("k must be positive");
    const double a = p.a, b = p.b, c = p.c, d = p.d, L = p.L;
    const double K = (a * a + b * b) * (d - 1) * (d - 1) + d * d + 1;
    const double R = (a - b) * (a - b) * k * std::cos(k * L) + c * K * std::sin(k * L);
    const double S = (2 * a * a + 2 * b * b - 1) * k +
                     (2 * a * a + 2 * b * b + 1) * k * std::cos(2 * k * L) -
                     c * K * std::sin(2 * k * L);
    return solve(a, b, k, R, S);
}

UnitCell chain_cell(const ChainParams& p)
{
    if (!(p.L > 0)) throw DomainError("L must be positive");
    UnitCell cell;
    cell.periods = {p.L};
    cell.edges = {{p.L, 0.0, "strand1"}, {p.L, 0.0, "strand2"}};
    Vertex vx;
    vx.coupling = st_to_ab(chain_family({p.a, p.b, p.c, p.d}));
    vx.ends = {{0, Side::end, {-1}}, {0, Side::start, {0}}, {1, Side::end, {-1}}, {1, Side::start, {0}}};
    cell.vertices.push_back(vx);
    return cell;
}

BandTable band_table(const ChainParams& p, double kmin, double kmax, int resolution)
{
    if (!(kmin > 0) || !(kmax > kmin)) throw DomainError("bad k range");
    BandTable t;
    t.plus = branch_bands(p, Branch::plus, kmin, kmax, resolution);
    t.minus = branch_bands(p, Branch::minus, kmin, kmax, resolution);
    return t;
}

std::vector<FluxBand> flux_bands(const ChainParams& p, double kmin, double kmax, int resolution)
{
    BandTable t = band_table(p, kmin, kmax, resolution);
    std::vector<FluxBand> out;
    for (Branch br : {Branch::plus, Branch::minus}) {
        for (const auto& iv : t.get(br)) {
            const int m = std::max(64, resolution / 4);
            std::vector<double> cuts;
            double h = (iv.hi - iv.lo) / m;
            for (int i = 1; i + 1 < m; ++i) {
                const double k0 = iv.lo + h * (i - 1), k1 = iv.lo + h * i, k2 = iv.lo + h * (i + 1);
                const double f0 = abs_real(p, k0, br), f1 = abs_real(p, k1, br), f2 = abs_real(p, k2, br);
                if (f1 >= f0 && f1 >= f2 && f1 > 0.99) {
                    const double kp = refine_peak(p, br, k0, k2);
                    // the closed form loses about 1e-8 to cancellation near a touching point
                    if (abs_real(p, kp, br) >= 1.0 - 1e-6 && kp - iv.lo > 1e-6 && iv.hi - kp > 1e-6)
                        cuts.push_back(kp);
                }
            }
            std::sort(cuts.begin(), cuts.end());
            double lo = iv.lo;
            for (double c : cuts) {
                if (c - lo > 1e-6) out.push_back({br, lo, c});
                lo = c;
            }
            out.push_back({br, lo, iv.hi});
        }
    }
    std::sort(out.begin(), out.end(), [](const FluxBand& x, const FluxBand& y) { return x.lo < y.lo; });
    return out;
}

ChainFlux flux_profile(const ChainParams& p, double k, Branch branch)
{
    const Complex x = dispersion_closed_form(p, k).get(branch);
    if (!is_real(x) || std::abs(x.real()) > 1.0 + 1e-9)
        throw NoStateError("k is in a gap of this branch");
    ChainFlux out;
    out.cos_qL = std::clamp(x.real(), -1.0, 1.0);
    out.q = std::acos(out.cos_qL) / p.L;
    const UnitCell cell = chain_cell(p);
    out.eig = eigenvector(cell, k, {std::polar(1.0, out.q * p.L)});
    out.flux = flux_ratio(flux(out.eig.v, k, 0), flux(out.eig.v, k, 1), out.eig.v.squaredNorm());
    return out;
}

std::vector<ChainScanRow> scan(const ChainParams& p, const std::vector<double>& k_grid, int threads)
{
    auto per_k = parallel_map(
        k_grid.size(),
        [&](std::size_t i) {
            std::vector<ChainScanRow> rows;
            const double k = k_grid[i];
            if (k < 1e-6) return rows;
            for (Branch br : {Branch::plus, Branch::minus}) {
                if (!in_band(p, k, br)) continue;
                ChainFlux f = flux_profile(p, k, br);
                rows.push_back({k, k * k, br, f.cos_qL, f.q, f.flux, f.eig.residual});
            }
            return rows;
        },
        threads);
    std::vector<ChainScanRow> out;
    for (auto& r : per_k) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::string scan_csv(const std::vector<ChainScanRow>& rows)
{
    std::ostringstream os;
    os << "k,E,branch,cosqL,q,J1,J2,log10_ratio,rel_sign\n";
    for (const auto& r : rows) {
        os << format_number(r.k) << ',' << format_number(r.E) << ',' << label(r.branch) << ','
           << format_number(r.cos_qL) << ',' << format_number(r.q) << ',' << format_number(r.flux.J1)
           << ',' << format_number(r.flux.J2) << ',' << format_number(r.flux.log_ratio) << ','
           << r.flux.rel_sign << '\n';
    }
    return os.str();
}

std::string band_table_csv(const BandTable& t)
{
    std::ostringstream os;
    os << "branch,k_lo,k_hi,E_lo,E_hi\n";
    for (Branch br : {Branch::plus, Branch::minus})
        for (const auto& iv : t.get(br))
            os << label(br) << ',' << format_number(iv.lo) << ',' << format_number(iv.hi) << ','
               << format_number(iv.lo * iv.lo) << ',' << format_number(iv.hi * iv.hi) << '\n';
    return os.str();
}

}  // namespace qgraph::chain
