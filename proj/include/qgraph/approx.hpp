#pragma once

#include <map>
#include <string>
#include <vector>

#include "qgraph/bloch.hpp"
#include "qgraph/vertex.hpp"

namespace qgraph::approx {

struct ApproxNode {
    double v = 0;          // delta strength at the node
    int degree = 0;        // number of connecting lines N_j
    int source_vertex = 0; // which singular vertex of the target cell
    Index source_slot = 0; // which end of that vertex the node replaces
    std::string label;
};

struct ApproxLine {
    int j = 0, k = 0;   // node indices, j < k within one source vertex
    double w = 0;       // delta strength at the midpoint
    double A = 0;       // vector potential on the j half; the k half carries -A
    int rule = 0;       // 1: j <= m < k, 2: shared T column, 3: S_jk only
};

struct ApproxGraph {
    double d0 = 0;
    std::vector<ApproxNode> nodes;
    std::vector<ApproxLine> lines;
    std::vector<int> signs;  // branch of every signed modulus evaluated, in order
};

// signed modulus: |c| if Re c >= 0, else -|c|
double signed_modulus(Complex c);

ApproxGraph build_from_st(const STForm& st, double d0, int source_vertex = 0);

// both ladder junctions that reduce to chain_family(a, a, c, 1); nodes in the
// order psi1(0-), psi1(0+), phi(0), psi2(0-), psi2(0+), phi(ell), labelled 1 2 5 3 4 6
ApproxGraph ladder_vertex_approx(double a, double c, double d0);

// values as printed for the two explicit constructions, keyed "v1", "w12", ...
std::map<std::string, double> paper_display_star(double a, double c, double d0);
std::map<std::string, double> paper_display_ladder(double a, double c, double d0);

// same quantities read off a built graph, keyed by node labels
std::map<std::string, double> named_values(const ApproxGraph& g);

// replace vertex vertex_map[s] of the cell by the nodes with source_vertex s
UnitCell substitute(const UnitCell& cell, const ApproxGraph& g, const std::vector<int>& vertex_map);

struct StudyOptions {
    double kmin = 0.05, kmax = 10.0;
    int n = 1000;
    int bands = 4;
    double L = 1.0;
    int threads = 0;
};

struct ConvergenceRow {
    double d0 = 0;
    int band = 0;
    double edge_lo_err = 0;  // nan when the reference edge is the scan bound
    double edge_hi_err = 0;
};

struct ConvergenceReport {
    std::vector<Band> reference;
    std::vector<ConvergenceRow> rows;
    std::vector<double> d0;
    std::vector<double> max_err;
    bool strictly_decreasing = false;
    std::vector<double> order_ratios;  // err(i+1) / err(i)
    bool sign_flip = false;
    std::vector<std::string> warnings;
};

// compare `reference` to each approximating cell on the first opt.bands bands
ConvergenceReport compare_bands(const UnitCell& reference, const std::vector<UnitCell>& approximations,
                                const std::vector<double>& d0_list, const StudyOptions& opt);

// star graph for the chain vertex chain_family(a, a, c, 1)
ConvergenceReport convergence_study(double a, double c, const std::vector<double>& d0_list,
                                    const StudyOptions& opt = {});
// the six-node ladder variant against the singular ladder with rung ell
ConvergenceReport ladder_convergence_study(double a, double c, double ell,
                                           const std::vector<double>& d0_list,
                                           const StudyOptions& opt = {});

std::string convergence_csv(const ConvergenceReport& r);

}  // namespace qgraph::approx
