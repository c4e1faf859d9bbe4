#pragma once

#include "tecell/coupled.hpp"
#include "tecell/mesh.hpp"
#include "tecell/params.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tecell {

enum class RunMode { Run, Validate, Mms, SweepTau, OracleCompare };

std::string_view to_string(RunMode mode);

struct MeshConfig {
    SandwichLengths lengths;
    SandwichCells cells;
    std::optional<TransverseExtent> transverse;
};

/// Open-circuit potential switched on at start_time, per electrode.
struct OcpStep {
    double start_time = 0.0;
    double anode = 0.0;
    double cathode = 0.0;
};

struct OutputConfig {
    std::string directory = "out";
    int snapshot_stride = 1;
    bool csv = true;
    bool fields = true;
    bool run_log = true;
};

struct RunConfig {
    MeshConfig mesh;
    UniformData params;
    std::vector<OcpStep> ocp_schedule;
    SolverSettings solver;
    std::optional<double> eps;  ///< solver.eps; defaults to half of min u0
    OutputConfig output;
    RunMode mode = RunMode::Run;
};

/// Parses `section.key = value` lines; `#` starts a comment. Unknown keys,
/// malformed values, duplicates, and missing required keys raise ConfigError
/// naming the line and key.
RunConfig parse_config(std::string_view text);

/// Reads and parses a file. Throws ConfigError if it cannot be read.
RunConfig load_config(const std::filesystem::path& path);

Mesh build_mesh(const RunConfig& config);
PhysicalParams build_params(const RunConfig& config, const Mesh& mesh);

/// Solver settings with eps resolved against the parameters.
SolverSettings resolved_settings(const RunConfig& config, const PhysicalParams& params);

/// Effective configuration, every key in schema order.
std::string config_echo(const RunConfig& config);

}  // namespace tecell
