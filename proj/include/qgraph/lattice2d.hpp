#pragma once

#include <optional>
#include <vector>

#include "qgraph/bloch.hpp"

namespace qgraph::lattice2d {

struct Lattice2DParams {
    double u = 1, v = 1;
    double L = 1, ell = 1;
};

// edges: strand1 (x, delta row), strand2 (x, delta' row), vertical bonds
// e3 in (0, ell) and e4 in (ell, 2 ell); directions 0 = x (period L), 1 = y (2 ell)
UnitCell lattice_cell(const Lattice2DParams& p);

enum class CrossTerm { cosine, sine };

// cos(2 ell q_y) from the generic determinant (quadratic in z_y)
double secular_2d_generic(const Lattice2DParams& p, double k, double qx);
// closed forms; throw DomainError when |sin kL| <= 1e-6
double secular_2d_display(const Lattice2DParams& p, double k, double qx, CrossTerm t);
double secular_2d_equal(const Lattice2DParams& p, double k, double qx, CrossTerm t);
// closed form with the matching cross term, generic path at the guard
double secular_2d(const Lattice2DParams& p, double k, double qx);

std::optional<double> solve_qy(const Lattice2DParams& p, double k, double qx);

// max |X(k, qx) - X(k, -qx)| over deterministic probes
double parity_probe(const Lattice2DParams& p, int probes = 20, unsigned seed = 7);

struct Gap {
    double lo = 0, hi = 0;
};

struct GapOptions {
    double kmin = 0.05, kmax = 6.0;
    int nk = 2000;
    int nqx = 256;
    double tol = 1e-3;
    int threads = 0;
};

struct GapReport {
    std::vector<Gap> gaps;
    bool symmetric_grid = true;
    double parity_residual = 0;
};

// is there a real (qx, qy) at this k, qx sampled on `grid` with local refinement
bool in_band(const Lattice2DParams& p, double k, const std::vector<double>& grid);
std::vector<double> qx_grid(const Lattice2DParams& p, int n, bool symmetric);

GapReport find_gaps(const Lattice2DParams& p, const GapOptions& opt = {});

struct Currents2D {
    double J1x = 0, J2x = 0, J1y = 0, J2y = 0;
    double vnorm2 = 1;
    std::vector<double> kirchhoff;
    EigenResult eig;
};

Currents2D currents_2d(const Lattice2DParams& p, double k, double qx, double qy);

enum CurrentMask : unsigned { J1x = 1, J2x = 2, J1y = 4, J2y = 8 };

struct CurrentRoot {
    bool found = false;
    double k = 0;
    double value = 0;  // sum of the selected |J| at k
    Currents2D currents;
};

// minimise the selected current sum over in-band k in [klo, khi]; q_y band
// edges are located exactly because the vertical currents vanish there
CurrentRoot find_current_root(const Lattice2DParams& p, double qx, double klo, double khi,
                              unsigned mask, double root_tol = 1e-8);

}  // namespace qgraph::lattice2d
