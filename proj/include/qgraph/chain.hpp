#pragma once

#include <string>
#include <vector>

#include "qgraph/bloch.hpp"
#include "qgraph/vertex.hpp"

namespace qgraph::chain {

struct ChainParams {
    double a = 0, b = 0, c = 0, d = 0;
    double L = 1.0;
};

enum class Branch { plus, minus };
char label(Branch b);

struct BranchValues {
    Complex plus;
    Complex minus;
    Complex get(Branch b) const { return b == Branch::plus ? plus : minus; }
};

// cos(qL) on both branches, from the expansion of det(AF + ikBG)
BranchValues dispersion_closed_form(const ChainParams& p, double k);
// the literal printed coefficients, kept for the audit test
BranchValues dispersion_paper_display(const ChainParams& p, double k);

UnitCell chain_cell(const ChainParams& p);

struct BandInterval {
    double lo = 0, hi = 0;
};

struct BandTable {
    std::vector<BandInterval> plus;
    std::vector<BandInterval> minus;
    const std::vector<BandInterval>& get(Branch b) const { return b == Branch::plus ? plus : minus; }
};

// maximal intervals with a real branch value |cos qL| <= 1, edges bisected to 1e-9
BandTable band_table(const ChainParams& p, double kmin, double kmax, int resolution);

struct FluxBand {
    Branch branch = Branch::plus;
    double lo = 0, hi = 0;
};

// band_table intervals split where the branch touches |cos qL| = 1 inside the
// interval (q reaches 0 or pi there), merged over branches and sorted by lo
std::vector<FluxBand> flux_bands(const ChainParams& p, double kmin, double kmax, int resolution);

struct ChainFlux {
    FluxResult flux;
    double cos_qL = 0;
    double q = 0;
    EigenResult eig;
};

ChainFlux flux_profile(const ChainParams& p, double k, Branch branch);

struct ChainScanRow {
    double k = 0, E = 0;
    Branch branch = Branch::plus;
    double cos_qL = 0, q = 0;
    FluxResult flux;
    double residual = 0;
};

std::vector<ChainScanRow> scan(const ChainParams& p, const std::vector<double>& k_grid,
                               int threads = 0);

std::string scan_csv(const std::vector<ChainScanRow>& rows);
std::string band_table_csv(const BandTable& t);

}  // namespace qgraph::chain
