#include "qgraph/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "qgraph/approx.hpp"
#include "qgraph/chain.hpp"
#include "qgraph/ladder.hpp"
#include "qgraph/lattice2d.hpp"
#include "qgraph/parallel.hpp"

namespace qgraph::cli {

namespace fs = std::filesystem;

namespace {

struct CommandSpec {
    const char* name;
    const char* help;
    std::vector<std::string> required;
    std::vector<std::pair<std::string, double>> optional;
    double kmax;
    int n;
};

const std::vector<CommandSpec>& commands()
{
    static const std::vector<CommandSpec> specs = {
        {"chain", "double-stranded Kronig-Penney chain", {"a", "b", "c", "d"}, {{"L", 1.0}}, 10.0, 2000},
        {"ladder", "delta / delta' ladder", {"u", "v"}, {{"L", 1.0}, {"ell", 1.0}}, 10.0, 2000},
        {"lattice2d", "2D alternating-layer lattice", {"u", "v"}, {{"L", 1.0}, {"ell", 1.0}}, 6.0, 2000},
        {"approx", "delta-graph approximation of the chain vertex", {"a", "c"}, {{"L", 1.0}, {"ell", 0.1}},
         10.0, 1000},
        {"generic", "any unit cell given as json", {}, {}, 10.0, 2000},
    };
    return specs;
}

const CommandSpec& spec_for(const std::string& name)
{
    for (const auto& s : commands())
        if (name == s.name) return s;
    throw UsageError("unknown command '" + name + "'");
}

std::vector<double> k_grid(const RunConfig& c)
{
    std::vector<double> ks(c.n);
    for (int i = 0; i < c.n; ++i) ks[i] = c.kmin + (c.kmax - c.kmin) * i / (c.n - 1);
    return ks;
}

struct Writer {
    const RunConfig& c;
    std::ostream& log;
    void operator()(const std::string& name, const std::string& content) const
    {
        const std::string path = (fs::path(c.out) / name).string();
        write_file_atomic(path, content);
        log << "wrote " << path << '\n';
    }
};

std::string bands_csv(const std::vector<Band>& bands)
{
    std::ostringstream os;
    os << "band,k_lo,k_hi,E_lo,E_hi,count\n";
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const Band& b = bands[i];
        os << i + 1 << ',' << format_number(b.lo) << ',' << format_number(b.hi) << ','
           << format_number(b.lo * b.lo) << ',' << format_number(b.hi * b.hi) << ',' << b.count << '\n';
    }
    return os.str();
}

EdgeScanOptions edge_options(const RunConfig& c)
{
    EdgeScanOptions eo;
    eo.direction = c.direction;
    eo.kmin = c.kmin;
    eo.kmax = c.kmax;
    eo.n = c.n;
    eo.threads = c.threads;
    eo.roots.unit_tol = c.root_tol;
    return eo;
}

int run_chain(const RunConfig& c, const Writer& write)
{
    const auto& P = c.params;
    const chain::ChainParams p{P.at("a"), P.at("b"), P.at("c"), P.at("d"), P.at("L")};
    const chain::BandTable t = chain::band_table(p, c.kmin, c.kmax, c.n);
    write("chain_bands.csv", chain::band_table_csv(t));
    write("chain_scan.csv", chain::scan_csv(chain::scan(p, k_grid(c), c.threads)));
    return t.plus.empty() && t.minus.empty() ? 2 : 0;
}

int run_ladder(const RunConfig& c, const Writer& write)
{
    const auto& P = c.params;
    const ladder::LadderParams p{P.at("u"), P.at("v"), P.at("L"), P.at("ell")};
    const auto bands = generic_bands(ladder::ladder_cell(p), edge_options(c));
    write("ladder_bands.csv", bands_csv(bands));

    const auto ks = k_grid(c);
    auto rows = parallel_map(
        ks.size(),
        [&](std::size_t i) {
            std::ostringstream os;
            const double k = ks[i];
            for (const auto& s : ladder::solve_q(p, k)) {
                const ladder::LadderFlux f = ladder::ladder_flux(p, k, s.branch);
                os << format_number(k) << ',' << format_number(k * k) << ',' << s.branch << ','
                   << format_number(f.cos_qL) << ',' << format_number(f.q) << ',' << format_number(f.flux.J1)
                   << ',' << format_number(f.flux.J2) << ',' << format_number(f.flux.log_ratio) << ','
                   << f.flux.rel_sign << '\n';
            }
            return os.str();
        },
        c.threads);
    std::string csv = "k,E,branch,cosqL,q,J1,J2,log10_ratio,rel_sign\n";
    for (const auto& r : rows) csv += r;
    write("ladder_scan.csv", csv);
    return bands.empty() ? 2 : 0;
}

int run_lattice(const RunConfig& c, const Writer& write, std::ostream& log)
{
    const auto& P = c.params;
    const lattice2d::Lattice2DParams p{P.at("u"), P.at("v"), P.at("L"), P.at("ell")};
    lattice2d::GapOptions o;
    o.kmin = c.kmin;
    o.kmax = c.kmax;
    o.nk = c.n;
    o.nqx = c.qxgrid;
    o.tol = c.gap_tol;
    o.threads = c.threads;
    const lattice2d::GapReport rep = lattice2d::find_gaps(p, o);
    log << "parity residual " << format_number(rep.parity_residual) << ", qx grid "
        << (rep.symmetric_grid ? "[0, pi/L]" : "[-pi/L, pi/L]") << '\n';

    std::ostringstream gs;
    gs << "gap,k_lo,k_hi,E_lo,E_hi,start_spacing\n";
    for (std::size_t i = 0; i < rep.gaps.size(); ++i) {
        const auto& g = rep.gaps[i];
        const double spacing = i ? g.lo - rep.gaps[i - 1].lo : std::nan("");
        gs << i + 1 << ',' << format_number(g.lo) << ',' << format_number(g.hi) << ','
           << format_number(g.lo * g.lo) << ',' << format_number(g.hi * g.hi) << ',' << format_number(spacing)
           << '\n';
    }
    write("lattice2d_gaps.csv", gs.str());

    const auto ks = k_grid(c);
    std::string cur = "k,qx,qy,J1x,J2x,J1y,J2y,vnorm2\n";
    for (double qx : c.qx_list) {
        auto rows = parallel_map(
            ks.size(),
            [&](std::size_t i) {
                const double k = ks[i];
                auto qy = lattice2d::solve_qy(p, k, qx);
                if (!qy) return std::string();
                lattice2d::Currents2D j;
                try {
                    j = lattice2d::currents_2d(p, k, qx, *qy);
                } catch (const NoStateError&) {
                    return std::string();  // closed form and assembly disagree at a guard point
                }
                std::ostringstream os;
                os << format_number(k) << ',' << format_number(qx) << ',' << format_number(*qy) << ','
                   << format_number(j.J1x) << ',' << format_number(j.J2x) << ',' << format_number(j.J1y)
                   << ',' << format_number(j.J2y) << ',' << format_number(j.vnorm2) << '\n';
                return os.str();
            },
            c.threads);
        for (const auto& r : rows) cur += r;
    }
    write("lattice2d_currents.csv", cur);
    const bool all_gap =
        rep.gaps.size() == 1 && rep.gaps[0].lo <= c.kmin && rep.gaps[0].hi >= c.kmax;
    return all_gap ? 2 : 0;
}

int run_approx(const RunConfig& c, const Writer& write, std::ostream& log, std::ostream& err)
{
    const auto& P = c.params;
    const double a = P.at("a"), cc = P.at("c"), L = P.at("L"), ell = P.at("ell");
    approx::StudyOptions so;
    so.kmin = c.kmin;
    so.kmax = c.kmax;
    so.n = c.n;
    so.bands = c.bands;
    so.L = L;
    so.threads = c.threads;

    json graphs = json::array();
    approx::ConvergenceReport rep;
    if (c.variant == "star") {
        const UnitCell ref = chain::chain_cell({a, a, cc, 1.0, L});
        for (double d0 : c.d0_list) {
            const auto g = approx::build_from_st(chain_family({a, a, cc, 1.0}), d0);
            graphs.push_back({{"d0", d0}, {"graph", qgraph::to_json(g)}, {"cell", qgraph::to_json(approx::substitute(ref, g, {0}))}});
        }
        rep = approx::convergence_study(a, cc, c.d0_list, so);
    } else {
        const auto gp = ladder::chain_limit_params(a, a, cc, 1.0);
        const UnitCell ref = ladder::ladder_cell(ladder::general_top(gp), ladder::general_bottom(gp), L, ell);
        for (double d0 : c.d0_list) {
            const auto g = approx::ladder_vertex_approx(a, cc, d0);
            graphs.push_back(
                {{"d0", d0}, {"graph", qgraph::to_json(g)}, {"cell", qgraph::to_json(approx::substitute(ref, g, {0, 1}))}});
        }
        rep = approx::ladder_convergence_study(a, cc, ell, c.d0_list, so);
    }
    write("approx_graph.json", graphs.dump(1) + "\n");
    write("approx_convergence.csv", approx::convergence_csv(rep));
    for (std::size_t i = 0; i < rep.d0.size(); ++i)
        log << "d0 " << format_number(rep.d0[i]) << " max edge error " << format_number(rep.max_err[i]) << '\n';
    for (std::size_t i = 0; i < rep.order_ratios.size(); ++i)
        log << "error ratio " << format_number(rep.order_ratios[i]) << '\n';
    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
    return rep.reference.empty() ? 2 : 0;
}

int run_generic(const RunConfig& c, const Writer& write)
{
    const UnitCell cell = cell_from_json(json::parse(read_file(c.cell)));
    if (c.direction < 0 || c.direction >= cell.directions())
        throw DomainError("direction out of range for this cell");
    const auto bands = generic_bands(cell, edge_options(c));
    write("generic_bands.csv", bands_csv(bands));
    ScanOptions so;
    so.direction = c.direction;
    so.threads = c.threads;
    so.roots.unit_tol = c.root_tol;
    write("generic_scan.csv", band_scan_csv(scan(cell, k_grid(c), so)));
    return bands.empty() ? 2 : 0;
}

void validate_config(const RunConfig& c)
{
    const CommandSpec& s = spec_for(c.command);
    for (const auto& r : s.required)
        if (!c.params.count(r)) throw UsageError(c.command + ": missing required parameter --" + r);
    if (!(c.kmin > 0)) throw UsageError("kmin must be positive");
    if (!(c.kmax > c.kmin)) throw UsageError("kmax must exceed kmin");
    if (c.n < 2) throw UsageError("n must be at least 2");
    if (c.qxgrid < 2) throw UsageError("qxgrid must be at least 2");
    if (c.bands < 1) throw UsageError("bands must be at least 1");
    if (c.threads < 0) throw UsageError("threads must be >= 0");
    if (!(c.root_tol > 0) || !(c.gap_tol > 0)) throw UsageError("tolerances must be positive");
    if (c.variant != "star" && c.variant != "ladder") throw UsageError("variant must be star or ladder");
    for (double d0 : c.d0_list)
        if (!(d0 > 0)) throw UsageError("d0 values must be positive");
    if (c.command == "approx" && c.d0_list.empty()) throw UsageError("approx needs a d0 list");
    if (c.command == "generic" && c.cell.empty()) throw UsageError("generic needs --cell");
}

}  // namespace

json to_json(const RunConfig& c)
{
    json j;
    j["command"] = c.command;
    j["params"] = c.params;
    j["kmin"] = c.kmin;
    j["kmax"] = c.kmax;
    j["n"] = c.n;
    j["qxgrid"] = c.qxgrid;
    j["qx_list"] = c.qx_list;
    j["d0_list"] = c.d0_list;
    j["variant"] = c.variant;
    j["bands"] = c.bands;
    j["cell"] = c.cell;
    j["direction"] = c.direction;
    j["out"] = c.out;
    j["threads"] = c.threads;
    j["root_tol"] = c.root_tol;
    j["gap_tol"] = c.gap_tol;
    return j;
}

RunConfig config_from_json(const json& j)
{
    RunConfig c;
    c.command = j.value("command", c.command);
    if (j.contains("params")) c.params = j.at("params").get<std::map<std::string, double>>();
    c.kmin = j.value("kmin", c.kmin);
    c.kmax = j.value("kmax", c.kmax);
    c.n = j.value("n", c.n);
    c.qxgrid = j.value("qxgrid", c.qxgrid);
    c.qx_list = j.value("qx_list", c.qx_list);
    c.d0_list = j.value("d0_list", c.d0_list);
    c.variant = j.value("variant", c.variant);
    c.bands = j.value("bands", c.bands);
    c.cell = j.value("cell", c.cell);
    c.direction = j.value("direction", c.direction);
    c.out = j.value("out", c.out);
    c.threads = j.value("threads", c.threads);
    c.root_tol = j.value("root_tol", c.root_tol);
    c.gap_tol = j.value("gap_tol", c.gap_tol);
    return c;
}

RunConfig parse_args(int argc, const char* const* argv)
{
    // a config file supplies the starting values; flags given on the command line win
    RunConfig cfg;
    bool from_file = false;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        std::string path;
        if (a == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
        if (path.empty()) continue;
        try {
            cfg = config_from_json(json::parse(read_file(path)));
        } catch (const std::exception& e) {
            throw UsageError("cannot read config " + path + ": " + e.what());
        }
        from_file = true;
    }

    CLI::App app{"Band structures and strand fluxes of periodic quantum graphs", "qgraph"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "json config (as written by --dump-config)");
    app.add_flag("--dump-config", cfg.dump_config, "print the resolved config as json and exit");
    app.add_option("--threads", cfg.threads, "worker threads, 0 = QGRAPH_THREADS or all cores");
    app.add_option("--out", cfg.out, "output directory");
    app.add_option("--root-tol", cfg.root_tol, "accept Bloch roots with ||z| - 1| below this");
    app.add_option("--gap-tol", cfg.gap_tol, "gap edge tolerance in k (lattice2d)");

    std::map<std::string, double> values;
    std::map<std::string, std::vector<CLI::Option*>> given;
    double kmin = 0, kmax = 0;
    int n = 0;
    std::vector<CLI::Option*> grid_opts[3];
    std::vector<double> d0_list, qx_list;
    std::vector<CLI::Option*> d0_opts, qx_opts;
    std::map<std::string, CLI::App*> subs;
    for (const auto& s : commands()) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        subs[s.name] = sub;
        std::vector<std::string> names = s.required;
        for (const auto& [o, def] : s.optional) names.push_back(o);
        for (const auto& name : names) given[name].push_back(sub->add_option("--" + name, values[name]));
        grid_opts[0].push_back(sub->add_option("--kmin", kmin));
        grid_opts[1].push_back(sub->add_option("--kmax", kmax));
        grid_opts[2].push_back(sub->add_option("--n", n, "number of k points"));
        if (std::string(s.name) == "lattice2d") {
            sub->add_option("--qxgrid", cfg.qxgrid, "qx points for the gap scan");
            qx_opts.push_back(sub->add_option("--qx-list", qx_list, "qx values for the current maps")->delimiter(','));
        }
        if (std::string(s.name) == "approx") {
            d0_opts.push_back(sub->add_option("--d0-list", d0_list, "comma separated d0 values")->delimiter(','));
            sub->add_option("--variant", cfg.variant, "star or ladder");
            sub->add_option("--bands", cfg.bands, "number of bands compared");
        }
        if (std::string(s.name) == "generic") {
            sub->add_option("--cell", cfg.cell, "unit cell json");
            sub->add_option("--direction", cfg.direction, "Bloch direction scanned");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        auto chosen = app.get_subcommands();
        throw UsageError(chosen.empty() ? app.help() : chosen.front()->help(), 0);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what(), e.get_exit_code() ? e.get_exit_code() : 1);
    }

    auto any = [](const std::vector<CLI::Option*>& opts) {
        for (auto* o : opts)
            if (o->count()) return true;
        return false;
    };
    auto chosen = app.get_subcommands();
    const std::string previous = cfg.command;
    if (!chosen.empty()) cfg.command = chosen.front()->get_name();
    if (cfg.command.empty()) throw UsageError("a subcommand is required (chain, ladder, lattice2d, approx, generic)");
    const CommandSpec& s = spec_for(cfg.command);

    const bool keep_file_values = from_file && previous == cfg.command;
    std::map<std::string, double> params;
    auto take = [&](const std::string& name, const double* def) {
        if (any(given[name])) params[name] = values[name];
        else if (keep_file_values && cfg.params.count(name)) params[name] = cfg.params.at(name);
        else if (def) params[name] = *def;
    };
    for (const auto& r : s.required) take(r, nullptr);
    for (const auto& [o, def] : s.optional) take(o, &def);
    cfg.params = params;

    if (!keep_file_values) {
        cfg.kmin = 0.05;
        cfg.kmax = s.kmax;
        cfg.n = s.n;
    }
    if (any(grid_opts[0])) cfg.kmin = kmin;
    if (any(grid_opts[1])) cfg.kmax = kmax;
    if (any(grid_opts[2])) cfg.n = n;
    if (any(d0_opts)) cfg.d0_list = d0_list;
    if (any(qx_opts)) cfg.qx_list = qx_list;
    validate_config(cfg);
    return cfg;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    try {
        validate_config(c);
        if (c.dump_config) {
            json j = to_json(c);
            out << j.dump(2) << '\n';
            return 0;
        }
        std::error_code ec;
        fs::create_directories(c.out, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + c.out + ": " + ec.message());
        const Writer write{c, out};
        int status = 0;
        if (c.command == "chain") status = run_chain(c, write);
        else if (c.command == "ladder") status = run_ladder(c, write);
        else if (c.command == "lattice2d") status = run_lattice(c, write, out);
        else if (c.command == "approx") status = run_approx(c, write, out, err);
        else status = run_generic(c, write);
        if (status == 2) err << "no spectrum in [" << format_number(c.kmin) << ", " << format_number(c.kmax) << "]\n";
        return status;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return e.status ? e.status : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace qgraph::cli
