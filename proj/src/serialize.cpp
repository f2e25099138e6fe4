#include "qgraph/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qgraph {

json matrix_to_json(const MatrixXc& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

MatrixXc matrix_from_json(const json& j, Index rows, Index cols)
{
    if (!j.is_array() || static_cast<Index>(j.size()) != rows)
        throw StructuralError("matrix has the wrong number of rows");
    MatrixXc m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j.at(r);
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw StructuralError("matrix row has the wrong length");
        for (Index c = 0; c < cols; ++c) {
            const json& e = row.at(c);
            if (e.is_number()) m(r, c) = e.get<double>();
            else if (e.is_array() && e.size() == 2) m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
            else throw StructuralError("matrix entries must be [re, im] pairs");
        }
    }
    return m;
}

json to_json(const VertexCoupling& c)
{
    return {{"n", c.n()}, {"form", "AB"}, {"A", matrix_to_json(c.A)}, {"B", matrix_to_json(c.B)}};
}

json to_json(const STForm& st)
{
    json j = {{"n", st.n}, {"form", "ST"}, {"m", st.m}, {"S", matrix_to_json(st.S)}, {"T", matrix_to_json(st.T)}};
    if (!st.order.empty()) j["order"] = st.order;
    return j;
}

STForm st_from_json(const json& j)
{
    STForm st;
    st.n = j.at("n").get<Index>();
    st.m = j.at("m").get<Index>();
    if (st.m < 0 || st.m > st.n) throw StructuralError("ST-form needs 0 <= m <= n");
    st.S = matrix_from_json(j.at("S"), st.m, st.m);
    st.T = matrix_from_json(j.at("T"), st.m, st.n - st.m);
    if (j.contains("order")) st.order = j.at("order").get<std::vector<Index>>();
    return st;
}

VertexCoupling coupling_from_json(const json& j)
{
    const std::string form = j.value("form", "AB");
    if (form == "ST") return st_to_ab(st_from_json(j));
    if (form != "AB") throw StructuralError("coupling form must be AB or ST");
    const Index n = j.at("n").get<Index>();
    return {matrix_from_json(j.at("A"), n, n), matrix_from_json(j.at("B"), n, n)};
}

namespace {

json end_to_json(const EdgeEnd& e)
{
    return {{"edge", e.edge}, {"side", e.side == Side::start ? "start" : "end"}, {"shift", e.shift}};
}

EdgeEnd end_from_json(const json& j)
{
    EdgeEnd e;
    e.edge = j.at("edge").get<int>();
    const std::string side = j.at("side").get<std::string>();
    if (side != "start" && side != "end") throw StructuralError("side must be start or end");
    e.side = side == "start" ? Side::start : Side::end;
    if (j.contains("shift")) e.shift = j.at("shift").get<std::vector<int>>();
    return e;
}

}  // namespace

json to_json(const UnitCell& cell)
{
    json j;
    j["periods"] = cell.periods;
    j["edges"] = json::array();
    for (const auto& e : cell.edges)
        j["edges"].push_back({{"id", e.id}, {"length", e.length}, {"potential", e.potential}});
    j["vertices"] = json::array();
    for (const auto& v : cell.vertices) {
        json ends = json::array();
        for (const auto& e : v.ends) ends.push_back(end_to_json(e));
        j["vertices"].push_back({{"coupling", to_json(v.coupling)}, {"ends", ends}});
    }
    j["identifications"] = json::array();
    for (const auto& id : cell.identifications)
        j["identifications"].push_back(
            {{"from", end_to_json(id.from)}, {"to", end_to_json(id.to)}, {"direction", id.direction}});
    return j;
}

UnitCell cell_from_json(const json& j)
{
    UnitCell cell;
    cell.periods = j.at("periods").get<std::vector<double>>();
    for (const auto& e : j.at("edges"))
        cell.edges.push_back({e.at("length").get<double>(), e.value("potential", 0.0), e.value("id", "")});
    for (const auto& v : j.at("vertices")) {
        Vertex vx;
        vx.coupling = coupling_from_json(v.at("coupling"));
        for (const auto& e : v.at("ends")) vx.ends.push_back(end_from_json(e));
        cell.vertices.push_back(vx);
    }
    if (j.contains("identifications"))
        for (const auto& id : j.at("identifications"))
            cell.identifications.push_back(
                {end_from_json(id.at("from")), end_from_json(id.at("to")), id.at("direction").get<int>()});
    check_cell(cell);
    return cell;
}

json to_json(const approx::ApproxGraph& g)
{
    json j;
    j["d0"] = g.d0;
    j["nodes"] = json::array();
    for (const auto& n : g.nodes)
        j["nodes"].push_back({{"label", n.label}, {"v", n.v}, {"degree", n.degree},
                              {"source_vertex", n.source_vertex}, {"source_slot", n.source_slot}});
    j["lines"] = json::array();
    for (const auto& l : g.lines)
        j["lines"].push_back({{"j", g.nodes[l.j].label}, {"k", g.nodes[l.k].label}, {"w", l.w}, {"A", l.A},
                              {"rule", l.rule}});
    return j;
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
        os.flush();
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto " + target.string() + ": " + ec.message());
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace qgraph
