#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermistor/mesh.hpp"
#include "thermistor/schemes.hpp"

namespace thermistor {

enum class RunMode { Solve, SpatialEoc, TemporalEoc };

/// Batch run description. Parsed from flat `section.key = value` lines;
/// see README for the key list and defaults.
struct RunConfig {
    RunMode mode = RunMode::Solve;

    int dim = 1;
    /// Defaults to (-1, 1) in 1D and the unit square in 2D.
    Box bounds{-1.0, 0.0, 1.0, 0.0};
    int nx = 16;
    int ny = 16;

    SchemeConfig scheme;

    std::string k = "1 + 1/(1 + u^2)";
    std::string f = "1 + exp(-u^2)";
    double lambda = 1.0;
    double sigma = 1.0;
    double k1 = 1.0;
    double k2 = 2.0;
    double u_range = 10.0;
    int samples = 10000;

    std::optional<std::string> u_exact;
    std::string u0 = "0";

    int levels = 4;
    std::optional<double> study_tau;

    std::string output_dir = "output";
    /// 0 disables snapshots; otherwise every n-th step plus the final one.
    int snapshot_every = 1;
    /// Default: csv in 1D, vtk in 2D.
    bool write_csv = true;
    bool write_vtk = false;

    Mesh make_mesh() const;
};

struct ConfigIssue {
    int line = 0;  // 0 when not tied to a line
    std::string message;
};

struct ConfigResult {
    std::optional<RunConfig> config;
    std::vector<ConfigIssue> errors;

    bool ok() const { return config.has_value(); }
    std::string error_text() const;
};

/// Parses and validates the whole file, collecting every error instead of
/// stopping at the first.
ConfigResult parse_config(std::string_view text);

std::string_view to_string(RunMode m);

}  // namespace thermistor
