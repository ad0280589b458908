#pragma once

#include <optional>
#include <string>

#include "thermistor/config.hpp"
#include "thermistor/error.hpp"

namespace thermistor {

enum ExitStatus : int {
    kExitSuccess = 0,
    kExitConfigError = 2,
    kExitSolverError = 3,
    kExitHypothesisViolation = 4,
};

enum class LogLevel { Info, Debug };

struct ExecuteOptions {
    /// Overrides RunConfig::output_dir.
    std::optional<std::string> output_dir;
    int threads = 1;
    /// Debug additionally dumps the mesh and the assembled matrices.
    LogLevel log_level = LogLevel::Info;
    /// Mirror log lines to stderr.
    bool echo = false;
};

/// Runs the configured solve or study and writes run.log, snapshots,
/// errors.csv and MANIFEST into the output directory. Never throws; the
/// result is one of the ExitStatus codes.
int execute(const RunConfig& cfg, const ExecuteOptions& opts = {});

/// Maps a library error code to a process exit status.
int exit_status(ErrorCode code);

}  // namespace thermistor
