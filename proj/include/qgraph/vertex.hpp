#pragma once

#include <string>
#include <vector>

#include "qgraph/types.hpp"

namespace qgraph {

// A psi + B psi' = 0 on n edge ends; psi' is the outward derivative
struct VertexCoupling {
    MatrixXc A;
    MatrixXc B;
    Index n() const { return A.rows(); }
};

// B = [[I, T], [0, 0]], A = -[[S, 0], [-T^H, I]] acting on the ends reordered
// by `order` (order[i] = original end placed at position i); empty = identity
struct STForm {
    Index n = 0;
    Index m = 0;
    MatrixXc S;
    MatrixXc T;
    std::vector<Index> order;
};

struct CouplingFamilyParams {
    double a = 0, b = 0, c = 0, d = 0;
};

struct Diagnostics {
    bool ok = false;
    bool rank_ok = false;
    bool hermitian_ok = false;
    Index rank = 0;
    double hermiticity_residual = 0;  // max |AB^H - (AB^H)^H|
    double hermiticity_bound = 0;     // 1e-10 (1 + |A||B|)
    double smallest_singular = 0;     // of (A|B), relative to the largest
    std::string failed;               // empty when ok
};

inline constexpr double rank_tolerance = 1e-10;

Diagnostics validate(const VertexCoupling& c);
VertexCoupling st_to_ab(const STForm& st);
STForm to_st_form(const VertexCoupling& c);

VertexCoupling delta_coupling(int n, double v);
VertexCoupling delta_prime_coupling(int n, double u);
STForm chain_family(const CouplingFamilyParams& p);

// orthonormal basis (columns) of the solution space {(psi, psi') : A psi + B psi' = 0}
MatrixXc boundary_subspace(const VertexCoupling& c);
// largest principal angle between the two boundary subspaces
double subspace_distance(const VertexCoupling& x, const VertexCoupling& y);

}  // namespace qgraph
