#pragma once

#include <string>

#include <json.hpp>

#include "qgraph/approx.hpp"
#include "qgraph/bloch.hpp"
#include "qgraph/vertex.hpp"

namespace qgraph {

using json = nlohmann::json;

// matrices are row-major arrays of rows of [re, im] pairs
json matrix_to_json(const MatrixXc& m);
MatrixXc matrix_from_json(const json& j, Index rows, Index cols);

json to_json(const VertexCoupling& c);  // form "AB"
json to_json(const STForm& st);         // form "ST"
// accepts either form; ST input is converted to (A, B)
VertexCoupling coupling_from_json(const json& j);
STForm st_from_json(const json& j);

json to_json(const UnitCell& cell);
UnitCell cell_from_json(const json& j);

json to_json(const approx::ApproxGraph& g);

// write to a temporary sibling then rename over the target
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace qgraph
