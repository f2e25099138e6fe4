#pragma once

#include <vector>

#include "qgraph/bloch.hpp"
#include "qgraph/vertex.hpp"

namespace qgraph::ladder {

struct LadderParams {
    double u = 1, v = 1;
    double L = 1, ell = 1;
};

// top: S = [[v11, v12], [v21, v22]], T = [a1; a2] on (psi1(0-), psi1(0+), phi(0));
// bottom: S = [u], T = [b1, b2] on (psi2(0-), psi2(0+), phi(ell))
struct GeneralJunctionParams {
    Complex a1 = 1, a2 = 1, b1 = 1, b2 = 1;
    Complex v11 = 0, v12 = 0, v21 = 0, v22 = 0;
    Complex u = 0;
};

STForm general_top_st(const GeneralJunctionParams& g);
STForm general_bottom_st(const GeneralJunctionParams& g);
VertexCoupling general_top(const GeneralJunctionParams& g);
VertexCoupling general_bottom(const GeneralJunctionParams& g);
// the pair that reduces to chain_family(a, b, c, d) as ell -> 0
GeneralJunctionParams chain_limit_params(double a, double b, double c, double d);

UnitCell ladder_cell(const VertexCoupling& top, const VertexCoupling& bottom, double L, double ell);
UnitCell ladder_cell(const LadderParams& p);  // delta(3, v) on top, delta'(3, u) below

double secular_residual(const LadderParams& p, double k, double q);
double secular_residual_paper_display(const LadderParams& p, double k, double q);

struct QSolution {
    double cos_qL = 0;
    double q = 0;      // in [0, pi/L]
    int branch = 0;    // 0: larger root of the quadratic, 1: smaller
};

// quadratic in cos(qL); near tan(k ell) poles falls back to the generic solver
std::vector<QSolution> solve_q(const LadderParams& p, double k);

struct LadderFlux {
    FluxResult flux;   // strands 1 and 2
    double J_rung = 0;
    double cos_qL = 0, q = 0;
    EigenResult eig;
};

LadderFlux ladder_flux(const LadderParams& p, double k, int branch);

// eliminate the rung in the limit ell -> 0, giving a coupling on
// (psi1(0-), psi1(0+), psi2(0-), psi2(0+))
VertexCoupling reduce_zero_length(const VertexCoupling& top, const VertexCoupling& bottom);

}  // namespace qgraph::ladder
