#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/serialize.hpp"

namespace qgraph::cli {

struct RunConfig {
    std::string command;                   // chain | ladder | lattice2d | approx | generic
    std::map<std::string, double> params;  // a b c d u v L ell, whichever the command uses
    double kmin = 0.05, kmax = 10;
    int n = 2000;
    int qxgrid = 256;
    std::vector<double> qx_list = {0.0, 1.0};  // current maps
    std::vector<double> d0_list = {1e-2, 1e-3, 1e-4};
    std::string variant = "star";
    int bands = 4;
    std::string cell;  // generic: path to a UnitCell json
    int direction = 0;
    std::string out = ".";
    int threads = 0;
    double root_tol = 1e-6;
    double gap_tol = 1e-3;
    bool dump_config = false;
};

struct UsageError : std::runtime_error {
    int status;
    UsageError(const std::string& what, int status_ = 1) : std::runtime_error(what), status(status_) {}
};

json to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);

// throws UsageError; --help comes back as a UsageError with status 0 and the help text
RunConfig parse_args(int argc, const char* const* argv);

// 0 ok, 2 empty spectrum in the k range, 1 error (message on err)
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

}  // namespace qgraph::cli
