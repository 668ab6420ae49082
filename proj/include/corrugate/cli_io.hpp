#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "corrugate/c1_driver.hpp"
#include "corrugate/flow.hpp"
#include "corrugate/smoothing.hpp"

namespace corrugate {

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> params;  // every option of the subcommand, defaults included
    std::uint64_t seed = 0;

    bool has(const std::string& key) const { return params.count(key) > 0; }
    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    bool operator==(const RunConfig& o) const { return command == o.command && params == o.params && seed == o.seed; }
};

// Raised for --help; carries the usage text.
struct HelpRequested {
    std::string text;
};

const std::vector<std::string>& subcommands();

// args exclude the program name. "--config FILE" loads an INI file whose
// [section] names the subcommand.
RunConfig parse_config(const std::vector<std::string>& args);
RunConfig parse_config_file(const std::string& path);
std::string config_to_string(const RunConfig& cfg);

// Map named by map/radius/resolution/dim/ambient/extra-axes/seed, or read from input.
ImmersionField build_map(const RunConfig& cfg);

// Fields as CSV: "# field <kind> dim=.. res=..,.. N=.." header, an offsets
// comment for maps, a column header, one row per node, values as %.17g.
void write_field(std::ostream& os, const ScalarField& f);
void write_field(std::ostream& os, const MetricField& f);
void write_field(std::ostream& os, const ImmersionField& f);
ScalarField read_scalar_field(std::istream& is);
MetricField read_metric_field(std::istream& is);
ImmersionField read_immersion_field(std::istream& is);

void write_primitives(std::ostream& os, const std::vector<PrimitiveMetric>& prims);
std::vector<PrimitiveMetric> read_primitives(std::istream& is);

// One header line plus one row per stage.
void emit_report(std::ostream& os, const StageReport& r);
void emit_report(std::ostream& os, const RunReport& r);
RunReport parse_run_report(std::istream& is);
void emit_flow_diagnostics(std::ostream& os, const FlowDiagnostics& d);
void emit_bench(std::ostream& os, const BenchTable& t);

// Quads over an nx x ny periodic vertex grid (row-major), wrapped at the seams.
void write_obj_mesh(std::ostream& os, int nx, int ny, const std::vector<std::array<double, 3>>& positions);
// First three ambient coordinates of a surface map.
void export_obj(std::ostream& os, const ImmersionField& w);

struct ObjCounts {
    std::size_t vertices = 0, faces = 0;
    bool indices_valid = true;
};
ObjCounts count_obj(std::istream& is);

int exit_code(ErrorKind k);

}  // namespace corrugate
