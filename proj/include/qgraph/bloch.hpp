#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgraph/types.hpp"
#include "qgraph/vertex.hpp"

namespace qgraph {

enum class Side { start, end };

// One end of an edge attached to a vertex slot. The slot sees the value
// z^shift * psi(end); shift = -1 in direction d means the end lives in the
// neighbouring cell (psi(0-) = exp(-i q P) psi(P-)).
struct EdgeEnd {
    int edge = 0;
    Side side = Side::start;
    std::vector<int> shift;  // one entry per Bloch direction, missing = 0
};

struct Edge {
    double length = 1.0;
    double potential = 0.0;  // constant vector potential A_e
    std::string id;
};

struct Vertex {
    VertexCoupling coupling;
    std::vector<EdgeEnd> ends;
};

// psi on `to` continues psi on `from` across a cell boundary in `direction`
struct Identification {
    EdgeEnd from;
    EdgeEnd to;
    int direction = 0;
};

struct UnitCell {
    std::vector<Edge> edges;
    std::vector<Vertex> vertices;
    std::vector<Identification> identifications;
    std::vector<double> periods;  // P_d per Bloch direction

    int directions() const { return static_cast<int>(periods.size()); }
};

// throws StructuralError if an end is attached twice or not at all, etc.
void check_cell(const UnitCell& cell);

// identifications rewritten as transparent two-end vertices
UnitCell expand_identifications(const UnitCell& cell);

// M V = 0 with V = (alpha_0, beta_0, alpha_1, beta_1, ...)
MatrixXc assemble(const UnitCell& cell, double k, const std::vector<Complex>& phases);

// same conditions in the trace basis V = (psi_e(0), Dpsi_e(0), ...);
// better conditioned for edges with k L << 1
MatrixXc assemble_traces(const UnitCell& cell, double k, const std::vector<Complex>& phases);

struct SecularPolynomial {
    VectorXc coeffs;      // lowest power first
    int offset = 0;       // det M(z) * z^offset = p(z)
    int degree = 0;
    bool flat = false;    // identically zero: flat band or singular parameters
};

struct PolynomialOptions {
    double radius = 1.0 + 1e-3;
};

// det(assemble(...)) as a polynomial in z_d, other phases taken from `phases`
SecularPolynomial secular_polynomial(const UnitCell& cell, double k, int direction,
                                     const std::vector<Complex>& phases = {},
                                     const PolynomialOptions& opt = {});

struct RootOptions {
    double unit_tol = 1e-6;
    double radius = 1.0 + 1e-3;
};

struct BlochRoots {
    std::vector<Complex> roots;  // on the unit circle, sorted by arg in (-pi, pi]
    bool flat = false;
};

BlochRoots bloch_phases(const UnitCell& cell, double k, int direction,
                        const std::vector<Complex>& phases = {}, const RootOptions& opt = {});

int count_unit_roots(const UnitCell& cell, double k, int direction,
                     const std::vector<Complex>& phases = {}, const RootOptions& opt = {});

struct EigenResult {
    VectorXc v;              // amplitude basis, unit norm
    double residual = 0;     // |M v| / (|M| |v|), M from assemble
    double sigma_min = 0;    // relative singular values of the trace matrix
    double sigma_next = 0;
    bool degenerate = false;
    VectorXc second;         // orthonormal partner when degenerate
};

EigenResult eigenvector(const UnitCell& cell, double k, const std::vector<Complex>& phases,
                        double degeneracy_tol = 1e-7);

double flux(const VectorXc& v, double k, int edge);

// pointwise Im(conj(psi) Dpsi) at x on edge, Dpsi the covariant derivative
double current_at(const UnitCell& cell, const VectorXc& v, double k, int edge, double x);
Complex psi_at(const UnitCell& cell, const VectorXc& v, double k, int edge, double x);

// per vertex: flux leaving through end slots minus flux entering at start slots
std::vector<double> kirchhoff_residuals(const UnitCell& cell, const VectorXc& v, double k);

struct FluxResult {
    double J1 = 0, J2 = 0;
    double log_ratio = 0;  // log10|J1/J2|, +-inf sentinels
    int rel_sign = 0;
};

FluxResult flux_ratio(double J1, double J2, double vnorm2 = 1.0);

struct BandEdge {
    double k = 0;
    int count_below = 0;
    int count_above = 0;
};

struct Band {
    double lo = 0, hi = 0;
    int count = 0;
};

struct EdgeScanOptions {
    int direction = 0;
    std::vector<Complex> phases;
    double kmin = 0.05, kmax = 10;
    int n = 2000;
    double tol = 1e-10;
    int threads = 0;
    RootOptions roots;
};

// k where the number of unit-circle roots changes, refined by bisection
std::vector<BandEdge> band_edges(const UnitCell& cell, const EdgeScanOptions& opt);
std::vector<Band> bands_from_edges(const std::vector<BandEdge>& edges, double kmin, double kmax,
                                   int count_at_kmin);
std::vector<Band> generic_bands(const UnitCell& cell, const EdgeScanOptions& opt);

struct ScanRow {
    double k = 0;
    double E = 0;
    std::vector<double> q;
    std::string branch;
    bool tie = false;
    double cos_qP = 0;
    VectorXc v;
    std::vector<double> fluxes;
    FluxResult ratio;
};

struct BandScan {
    std::vector<ScanRow> rows;
    int directions = 1;
    int edges = 0;
};

struct ScanOptions {
    int direction = 0;
    std::vector<Complex> phases;
    int flux_a = 0, flux_b = 1;  // strands compared in log_ratio / rel_sign
    int threads = 0;
    RootOptions roots;
};

// one row per (k, root with q in [0, pi/P]); branch labels by continuity in k
BandScan scan(const UnitCell& cell, const std::vector<double>& k_grid, const ScanOptions& opt = {});

std::string format_number(double x);  // 12 significant digits, inf/-inf/nan sentinels
std::string band_scan_csv(const BandScan& s);

}  // namespace qgraph
