#include "corrugate/cli_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "corrugate/errors.hpp"

namespace corrugate {

namespace {

enum class Kind { Int, NonNegInt, PosInt, Real, PosReal, Text };

struct OptionSpec {
    const char* name;
    Kind kind;
    const char* fallback;
    const char* help;
};

const std::vector<OptionSpec>& map_options() {
    static const std::vector<OptionSpec> v{
        {"map", Kind::Text, "clifford", "clifford | circle | strip | random"},
        {"radius", Kind::PosReal, "1", "radius of the circle or Clifford factors"},
        {"resolution", Kind::PosInt, "64", "nodes per axis (power of two, >= 16)"},
        {"dim", Kind::PosInt, "2", "chart dimension for the random map"},
        {"ambient", Kind::NonNegInt, "0", "ambient dimension (0: natural for the map)"},
        {"extra-axes", Kind::NonNegInt, "0", "compose with the inclusion into extra ambient axes"},
        {"input", Kind::Text, "", "map field CSV; overrides --map"},
        {"seed", Kind::NonNegInt, "0", "seed for random test fields"},
    };
    return v;
}

std::vector<OptionSpec> options_for(const std::string& cmd) {
    std::vector<OptionSpec> v;
    auto add_map = [&] { v.insert(v.end(), map_options().begin(), map_options().end()); };
    if (cmd == "pullback") {
        add_map();
        v.push_back({"output", Kind::Text, "", "metric CSV (stdout when empty)"});
    } else if (cmd == "decompose") {
        add_map();
        v.push_back({"target-scale", Kind::PosReal, "1.5", "target metric c^2 I"});
        v.push_back({"metric-file", Kind::Text, "", "target metric CSV; overrides --target-scale"});
        v.push_back({"bumps", Kind::PosInt, "2", "patches per axis"});
        v.push_back({"output", Kind::Text, "", "primitives CSV (stdout when empty)"});
    } else if (cmd == "frame") {
        add_map();
        v.push_back({"out-prefix", Kind::Text, "frame", "writes <prefix>_nu.csv and <prefix>_b.csv"});
    } else if (cmd == "stage") {
        add_map();
        v.push_back({"target-scale", Kind::PosReal, "1.5", "target metric c^2 I"});
        v.push_back({"eta", Kind::PosReal, "0.5", "C0 budget"});
        v.push_back({"delta", Kind::PosReal, "0.25", "defect budget"});
        v.push_back({"bumps", Kind::PosInt, "2", "patches per axis"});
        v.push_back({"out-prefix", Kind::Text, "stage", "writes <prefix>_map.csv and <prefix>_report.csv"});
    } else if (cmd == "run") {
        add_map();
        v.push_back({"stages", Kind::NonNegInt, "4", "number of stages Q"});
        v.push_back({"epsilon", Kind::PosReal, "0.5", "C0 budget"});
        v.push_back({"target-scale", Kind::PosReal, "1.5", "target metric c^2 I"});
        v.push_back({"bumps", Kind::PosInt, "2", "patches per axis"});
        v.push_back({"out-prefix", Kind::Text, "run", "per-stage maps, report and mesh prefix"});
    } else if (cmd == "flow") {
        v.push_back({"resolution", Kind::PosInt, "128", "circle nodes"});
        v.push_back({"radius", Kind::PosReal, "1", "initial circle radius"});
        v.push_back({"t0", Kind::PosReal, "10", "start time"});
        v.push_back({"tend", Kind::PosReal, "210", "end time"});
        v.push_back({"dt", Kind::PosReal, "0.05", "time step"});
        v.push_back({"tol", Kind::PosReal, "0.001", "final identity tolerance"});
        v.push_back({"alpha", Kind::Real, "0.04", "constant perturbation alpha dx^2"});
        v.push_back({"h-file", Kind::Text, "", "perturbation metric CSV; overrides --alpha"});
        v.push_back({"smallness", Kind::Real, "-1", "bound on |h|_3 (negative: 0.05 |w0#e|_0)"});
        v.push_back({"seed", Kind::NonNegInt, "0", "unused seed slot"});
        v.push_back({"out-prefix", Kind::Text, "flow", "writes <prefix>_diagnostics.csv and <prefix>_map.csv"});
    } else if (cmd == "smooth-bench") {
        v.push_back({"resolution", Kind::PosInt, "256", "circle nodes"});
        v.push_back({"pairs", Kind::Text, "2,0;3,1;0,2", "(r,s) pairs"});
        v.push_back({"eps-levels", Kind::PosInt, "6", "eps = 2^-1 .. 2^-levels"});
        v.push_back({"seed", Kind::NonNegInt, "0", "unused seed slot"});
        v.push_back({"output", Kind::Text, "", "table CSV (stdout when empty)"});
    } else if (cmd == "free-check") {
        add_map();
    }
    return v;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void add_validators(CLI::Option* o, Kind k) {
    switch (k) {
        case Kind::Int: o->check(CLI::TypeValidator<long long>()); break;
        case Kind::NonNegInt: o->check(CLI::TypeValidator<long long>())->check(CLI::NonNegativeNumber); break;
        case Kind::PosInt: o->check(CLI::TypeValidator<long long>())->check(CLI::PositiveNumber); break;
        case Kind::Real: o->check(CLI::Number); break;
        case Kind::PosReal: o->check(CLI::PositiveNumber); break;
        case Kind::Text: break;
    }
}

[[noreturn]] void bad(const std::string& what) { throw InputError(what); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        bad(std::string("cannot parse ") + what + " value '" + s + "'");
    }
}

long long to_int(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        bad(std::string("cannot parse ") + what + " value '" + s + "'");
    }
}

}  // namespace

namespace {

const char* describe(const std::string& cmd) {
    if (cmd == "pullback") return "pullback metric of a map";
    if (cmd == "decompose") return "split g - w#e into primitive metrics";
    if (cmd == "frame") return "global normal frame and its audit";
    if (cmd == "stage") return "one corrugation stage";
    if (cmd == "run") return "iterate stages towards an isometric map";
    if (cmd == "flow") return "regularized flow on a circle in the plane";
    if (cmd == "smooth-bench") return "smoothing estimate ratios";
    return "freeness check of a map";
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> v{"pullback", "decompose", "frame", "stage",
                                            "run", "flow", "smooth-bench", "free-check"};
    return v;
}

const std::string& RunConfig::text(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) bad("configuration has no key '" + key + "'");
    return it->second;
}

double RunConfig::number(const std::string& key) const { return to_double(text(key), key.c_str()); }

int RunConfig::integer(const std::string& key) const { return static_cast<int>(to_int(text(key), key.c_str())); }

RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Corrugation and regularized-flow toolkit for isometric maps of periodic charts"};
    app.set_config("--config", "", "INI file with a [subcommand] section");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name, describe(name));
        sub->configurable();
        sub->allow_config_extras(CLI::config_extras_mode::error);
        auto& store = values[name];
        for (const auto& spec : options_for(name)) {
            store[spec.name] = spec.fallback;
            auto* o = sub->add_option(std::string("--") + spec.name, store[spec.name], spec.help);
            o->capture_default_str();
            add_validators(o, spec.kind);
        }
        subs[name] = sub;
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        bad(e.what());
    }
    RunConfig cfg;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) cfg.command = name;
    if (cfg.command.empty()) bad("a subcommand is required");
    cfg.params = values[cfg.command];
    if (cfg.has("seed")) cfg.seed = static_cast<std::uint64_t>(to_int(cfg.text("seed"), "seed"));
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) bad("cannot open config file '" + path + "'");
    return parse_config({"--config", path});
}

std::string config_to_string(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[" << cfg.command << "]\n";
    for (const auto& [k, v] : cfg.params) os << k << "=\"" << v << "\"\n";
    return os.str();
}

// ---------------------------------------------------------------- maps

ImmersionField build_map(const RunConfig& cfg) {
    ImmersionField w;
    if (cfg.has("input") && !cfg.text("input").empty()) {
        std::ifstream is(cfg.text("input"));
        if (!is) bad("cannot open map file '" + cfg.text("input") + "'");
        w = read_immersion_field(is);
    } else {
        const std::string kind = cfg.text("map");
        const int res = cfg.integer("resolution");
        const double r = cfg.number("radius");
        const int ambient = cfg.integer("ambient");
        if (kind == "clifford") {
            w = clifford_map(PeriodicGrid(res, res), r);
        } else if (kind == "circle") {
            w = circle_map(PeriodicGrid(res), r, std::max(2, ambient));
        } else if (kind == "strip") {
            w = flat_strip(PeriodicGrid(res, res), std::max(2, ambient == 0 ? 4 : ambient));
        } else if (kind == "random") {
            const int dim = cfg.integer("dim");
            if (dim != 1 && dim != 2) bad("--dim must be 1 or 2");
            PeriodicGrid g = dim == 1 ? PeriodicGrid(res) : PeriodicGrid(res, res);
            const int N = ambient == 0 ? 6 : ambient;
            std::mt19937_64 rng(cfg.seed);
            std::normal_distribution<double> nd;
            w = ImmersionField(g, N);
            const int kmax = 4, k1max = dim == 2 ? kmax : 0;
            for (int a = 0; a < N; ++a)
                for (int k0 = 0; k0 <= kmax; ++k0)
                    for (int k1 = -k1max; k1 <= k1max; ++k1) {
                        const double s = r / (1.0 + k0 * k0 + k1 * k1);
                        const double c = nd(rng) * s, d = nd(rng) * s;
                        for (std::size_t p = 0; p < g.size(); ++p) {
                            auto x = g.point(p);
                            w.at(p, a) += c * std::cos(k0 * x[0] + k1 * x[1]) + d * std::sin(k0 * x[0] + k1 * x[1]);
                        }
                    }
        } else {
            bad("unknown map '" + kind + "' (expected clifford, circle, strip or random)");
        }
        if (kind == "clifford" && ambient > 4) w = w.embedded(ambient - 4);
    }
    const int extra = cfg.has("extra-axes") ? cfg.integer("extra-axes") : 0;
    return extra > 0 ? w.embedded(extra) : w;
}

// ---------------------------------------------------------------- fields

namespace {

struct FieldHeader {
    std::string kind;
    int dim = 1;
    std::array<int, 2> res{16, 1};
    int N = 0;
    PeriodicGrid grid() const { return dim == 1 ? PeriodicGrid(res[0]) : PeriodicGrid(res[0], res[1]); }
};

void write_header(std::ostream& os, const std::string& kind, const PeriodicGrid& g, int N) {
    os << "# field " << kind << " dim=" << g.dim() << " res=" << g.res(0);
    if (g.dim() == 2) os << "," << g.res(1);
    if (N > 0) os << " N=" << N;
    os << "\n";
}

std::string value_of(const std::string& line, const std::string& key) {
    const auto pos = line.find(" " + key + "=");
    if (pos == std::string::npos) bad("field header lacks '" + key + "': " + line);
    const auto b = pos + key.size() + 2;
    return line.substr(b, line.find(' ', b) - b);
}

FieldHeader read_header(std::istream& is, const std::string& expect) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# field ", 0) != 0) bad("not a field file (missing '# field' header)");
    FieldHeader h;
    std::istringstream ss(line.substr(8));
    ss >> h.kind;
    if (h.kind != expect) bad("expected a " + expect + " field, found '" + h.kind + "'");
    h.dim = static_cast<int>(to_int(value_of(line, "dim"), "dim"));
    auto r = split(value_of(line, "res"), ',');
    h.res[0] = static_cast<int>(to_int(r.at(0), "res"));
    if (h.dim == 2) {
        if (r.size() != 2) bad("two-dimensional field needs two resolutions");
        h.res[1] = static_cast<int>(to_int(r[1], "res"));
    }
    if (expect == "immersion") h.N = static_cast<int>(to_int(value_of(line, "N"), "N"));
    return h;
}

void write_index(std::ostream& os, const PeriodicGrid& g, std::size_t p) {
    auto ij = g.index(p);
    os << ij[0];
    if (g.dim() == 2) os << "," << ij[1];
}

// Reads the column header and count rows; returns the value columns per row.
std::vector<std::vector<double>> read_rows(std::istream& is, const PeriodicGrid& g, std::size_t width) {
    std::string line;
    if (!std::getline(is, line)) bad("field file truncated before column header");
    const std::size_t idx = g.dim();
    std::vector<std::vector<double>> rows;
    rows.reserve(g.size());
    while (std::getline(is, line)) {
        if (trim(line).empty() || line[0] == '#') continue;
        auto cells = split(line, ',');
        if (cells.size() != idx + width) bad("field row has " + std::to_string(cells.size()) + " columns, expected " +
                                             std::to_string(idx + width));
        const std::size_t p = rows.size();
        if (p >= g.size()) bad("field file has more rows than nodes");
        auto ij = g.index(p);
        if (to_int(cells[0], "index") != ij[0] || (g.dim() == 2 && to_int(cells[1], "index") != ij[1]))
            bad("field rows out of order at row " + std::to_string(p));
        std::vector<double> v(width);
        for (std::size_t c = 0; c < width; ++c) v[c] = to_double(cells[idx + c], "field");
        rows.push_back(std::move(v));
    }
    if (rows.size() != g.size()) bad("field file has " + std::to_string(rows.size()) + " rows, expected " +
                                     std::to_string(g.size()));
    return rows;
}

std::string index_columns(const PeriodicGrid& g) { return g.dim() == 2 ? "i,j" : "i"; }

}  // namespace

void write_field(std::ostream& os, const ScalarField& f) {
    const auto& g = f.grid();
    write_header(os, "scalar", g, 0);
    os << index_columns(g) << ",f\n";
    for (std::size_t p = 0; p < g.size(); ++p) {
        write_index(os, g, p);
        os << "," << fmt17(f[p]) << "\n";
    }
}

void write_field(std::ostream& os, const MetricField& f) {
    const auto& g = f.grid();
    write_header(os, "metric", g, 0);
    os << index_columns(g) << (g.dim() == 2 ? ",g00,g01,g11\n" : ",g00\n");
    for (std::size_t p = 0; p < g.size(); ++p) {
        write_index(os, g, p);
        for (int c = 0; c < f.ncomp(); ++c) os << "," << fmt17(f.data()[p * f.ncomp() + c]);
        os << "\n";
    }
}

void write_field(std::ostream& os, const ImmersionField& f) {
    const auto& g = f.grid();
    write_header(os, "immersion", g, f.ambient());
    os << "# offsets";
    for (int ax = 0; ax < g.dim(); ++ax) {
        os << (ax ? ";" : " ");
        for (int a = 0; a < f.ambient(); ++a) os << (a ? "," : "") << fmt17(f.offset(ax)[a]);
    }
    os << "\n" << index_columns(g);
    for (int a = 0; a < f.ambient(); ++a) os << ",w" << a;
    os << "\n";
    for (std::size_t p = 0; p < g.size(); ++p) {
        write_index(os, g, p);
        for (int a = 0; a < f.ambient(); ++a) os << "," << fmt17(f.at(p, a));
        os << "\n";
    }
}

ScalarField read_scalar_field(std::istream& is) {
    auto h = read_header(is, "scalar");
    auto g = h.grid();
    auto rows = read_rows(is, g, 1);
    ScalarField f(g);
    for (std::size_t p = 0; p < g.size(); ++p) f[p] = rows[p][0];
    return f;
}

MetricField read_metric_field(std::istream& is) {
    auto h = read_header(is, "metric");
    auto g = h.grid();
    MetricField f(g);
    auto rows = read_rows(is, g, f.ncomp());
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int c = 0; c < f.ncomp(); ++c) f.data()[p * f.ncomp() + c] = rows[p][c];
    require_finite(f.data(), "metric file");
    return f;
}

ImmersionField read_immersion_field(std::istream& is) {
    auto h = read_header(is, "immersion");
    if (h.N < 1) bad("immersion field needs N >= 1");
    auto g = h.grid();
    ImmersionField f(g, h.N);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# offsets", 0) != 0) bad("immersion field lacks the offsets line");
    auto axes = split(trim(line.substr(9)), ';');
    if (axes.size() != std::size_t(g.dim())) bad("offsets line needs one group per axis");
    for (int ax = 0; ax < g.dim(); ++ax) {
        auto vals = split(axes[ax], ',');
        if (vals.size() != std::size_t(h.N)) bad("offsets group has the wrong length");
        for (int a = 0; a < h.N; ++a) f.offset(ax)[a] = to_double(vals[a], "offset");
    }
    auto rows = read_rows(is, g, h.N);
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int a = 0; a < h.N; ++a) f.at(p, a) = rows[p][a];
    require_finite(f.values(), "map file");
    return f;
}

void write_primitives(std::ostream& os, const std::vector<PrimitiveMetric>& prims) {
    if (prims.empty()) {
        os << "# primitives count=0\n";
        return;
    }
    const auto& g = prims[0].a.grid();
    os << "# primitives count=" << prims.size() << " dim=" << g.dim() << " res=" << g.res(0);
    if (g.dim() == 2) os << "," << g.res(1);
    os << "\n";
    for (const auto& p : prims)
        os << "# primitive id=" << p.id << " patch=" << p.support_id << " dpsi=" << fmt17(p.dpsi[0]) << ","
           << fmt17(p.dpsi[1]) << " origin=" << fmt17(p.psi_origin[0]) << "," << fmt17(p.psi_origin[1])
           << " wrapped=" << (p.psi_wrapped ? 1 : 0) << "\n";
    os << index_columns(g);
    for (std::size_t k = 0; k < prims.size(); ++k) os << ",a" << k << ",psi" << k;
    os << "\n";
    for (std::size_t q = 0; q < g.size(); ++q) {
        write_index(os, g, q);
        for (const auto& p : prims) os << "," << fmt17(p.a[q]) << "," << fmt17(p.psi[q]);
        os << "\n";
    }
}

std::vector<PrimitiveMetric> read_primitives(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# primitives ", 0) != 0) bad("not a primitives file");
    const auto count = static_cast<std::size_t>(to_int(value_of(line, "count"), "count"));
    if (count == 0) return {};
    FieldHeader h;
    h.dim = static_cast<int>(to_int(value_of(line, "dim"), "dim"));
    auto r = split(value_of(line, "res"), ',');
    h.res[0] = static_cast<int>(to_int(r.at(0), "res"));
    if (h.dim == 2) h.res[1] = static_cast<int>(to_int(r.at(1), "res"));
    auto g = h.grid();
    std::vector<PrimitiveMetric> prims(count);
    for (auto& p : prims) {
        if (!std::getline(is, line) || line.rfind("# primitive ", 0) != 0) bad("primitive manifest line missing");
        p.id = static_cast<int>(to_int(value_of(line, "id"), "id"));
        p.support_id = static_cast<int>(to_int(value_of(line, "patch"), "patch"));
        auto d = split(value_of(line, "dpsi"), ',');
        auto o = split(value_of(line, "origin"), ',');
        for (int k = 0; k < 2; ++k) {
            p.dpsi[k] = to_double(d.at(k), "dpsi");
            p.psi_origin[k] = to_double(o.at(k), "origin");
        }
        p.psi_wrapped = value_of(line, "wrapped") == "1";
        p.a = ScalarField(g);
        p.psi = ScalarField(g);
    }
    auto rows = read_rows(is, g, 2 * count);
    for (std::size_t q = 0; q < g.size(); ++q)
        for (std::size_t k = 0; k < count; ++k) {
            prims[k].a[q] = rows[q][2 * k];
            prims[k].psi[q] = rows[q][2 * k + 1];
        }
    return prims;
}

// ---------------------------------------------------------------- reports

namespace {

const char* kStageColumns =
    "eta,delta,delta0,c0_delta,c1_delta,defect_before,defect_after,margin_after,min_separation,primitives,res0,res1,"
    "lambdas";

void stage_row(std::ostream& os, const StageReport& r) {
    os << fmt17(r.eta) << "," << fmt17(r.delta) << "," << fmt17(r.delta0) << "," << fmt17(r.c0_delta) << ","
       << fmt17(r.c1_delta) << "," << fmt17(r.defect_before) << "," << fmt17(r.defect_after) << ","
       << fmt17(r.margin_after) << "," << fmt17(r.min_separation) << "," << r.primitives << "," << r.resolution[0]
       << "," << r.resolution[1] << ",";
    for (std::size_t i = 0; i < r.lambdas.size(); ++i) os << (i ? ";" : "") << fmt17(r.lambdas[i]);
}

StageReport parse_stage(const std::vector<std::string>& c, std::size_t at) {
    StageReport r;
    double* reals[] = {&r.eta, &r.delta, &r.delta0, &r.c0_delta, &r.c1_delta, &r.defect_before,
                       &r.defect_after, &r.margin_after, &r.min_separation};
    for (double* x : reals) *x = to_double(c.at(at++), "report");
    r.primitives = static_cast<int>(to_int(c.at(at++), "primitives"));
    r.resolution[0] = static_cast<int>(to_int(c.at(at++), "res0"));
    r.resolution[1] = static_cast<int>(to_int(c.at(at++), "res1"));
    const std::string lam = c.at(at);
    if (!lam.empty())
        for (const auto& s : split(lam, ';')) r.lambdas.push_back(to_double(s, "lambda"));
    return r;
}

}  // namespace

void emit_report(std::ostream& os, const StageReport& r) {
    os << kStageColumns << "\n";
    stage_row(os, r);
    os << "\n";
}

void emit_report(std::ostream& os, const RunReport& r) {
    os << "stage," << kStageColumns << ",slack,c1_increment\n";
    for (std::size_t q = 0; q < r.stages.size(); ++q) {
        os << q + 1 << ",";
        stage_row(os, r.stages[q]);
        os << "," << fmt17(r.slack.at(q)) << "," << fmt17(r.c1_increments.at(q)) << "\n";
    }
}

RunReport parse_run_report(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("stage,", 0) != 0) bad("not a run report (bad header)");
    const std::size_t width = split(line, ',').size();
    RunReport r;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        auto c = split(line, ',');
        if (c.size() != width) bad("run report row has the wrong number of columns");
        if (to_int(c[0], "stage") != static_cast<long long>(r.stages.size()) + 1) bad("run report stages out of order");
        r.stages.push_back(parse_stage(c, 1));
        r.slack.push_back(to_double(c[width - 2], "slack"));
        r.c1_increments.push_back(to_double(c[width - 1], "c1_increment"));
        r.c0_sum += r.stages.back().c0_delta;
        r.final_defect = r.stages.back().defect_after;
    }
    return r;
}

void emit_flow_diagnostics(std::ostream& os, const FlowDiagnostics& d) {
    os << "t,hdot_bound,wdot_bound,w_deviation,residual,orthogonality,identity\n";
    for (const auto& s : d.steps)
        os << fmt17(s.t) << "," << fmt17(s.hdot_bound) << "," << fmt17(s.wdot_bound) << "," << fmt17(s.w_deviation)
           << "," << fmt17(s.residual) << "," << fmt17(s.orthogonality) << "," << fmt17(s.identity) << "\n";
}

void emit_bench(std::ostream& os, const BenchTable& t) {
    os << "r,s,eps,family,lhs,ratio\n";
    for (const auto& row : t.rows)
        os << row.r << "," << row.s << "," << fmt17(row.eps) << "," << family_name(row.family) << ","
           << fmt17(row.lhs) << "," << fmt17(row.ratio) << "\n";
}

// ---------------------------------------------------------------- meshes

void write_obj_mesh(std::ostream& os, int nx, int ny, const std::vector<std::array<double, 3>>& pos) {
    if (nx < 1 || ny < 1 || pos.size() != std::size_t(nx) * ny) bad("write_obj_mesh: vertex count does not match grid");
    os << "# periodic surface mesh " << nx << "x" << ny << "\n";
    for (const auto& v : pos) os << "v " << fmt17(v[0]) << " " << fmt17(v[1]) << " " << fmt17(v[2]) << "\n";
    auto id = [&](int i, int j) { return (i % nx) * ny + (j % ny) + 1; };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            os << "f " << id(i, j) << " " << id(i + 1, j) << " " << id(i + 1, j + 1) << " " << id(i, j + 1) << "\n";
}

void export_obj(std::ostream& os, const ImmersionField& w) {
    const auto& g = w.grid();
    if (g.dim() != 2) bad("export_obj: mesh export needs a two-dimensional chart");
    std::vector<std::array<double, 3>> pos(g.size(), {0.0, 0.0, 0.0});
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int a = 0; a < std::min(3, w.ambient()); ++a) pos[p][a] = w.at(p, a);
    write_obj_mesh(os, g.res(0), g.res(1), pos);
}

ObjCounts count_obj(std::istream& is) {
    ObjCounts c;
    std::vector<long> refs;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            ++c.vertices;
        } else if (tag == "f") {
            ++c.faces;
            long k;
            while (ss >> k) refs.push_back(k);
        }
    }
    for (long k : refs)
        if (k < 1 || std::size_t(k) > c.vertices) c.indices_valid = false;
    return c;
}

int exit_code(ErrorKind k) { return static_cast<int>(k); }

}  // namespace corrugate
