#pragma once

#include <filesystem>
#include <iosfwd>

#include "warp_harmonic/run_io.hpp"

namespace warp_harmonic::cli {

/// Stable exit codes for scripting.
enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,        // unexpected internal error
  kConfigError = 2,
  kNonConvergence = 3,
  kTheoremCheck = 4,
  kLedgerViolation = 5,
};

/// Parses argv (subcommand, options, optional --config file with key=value lines; explicit
/// options override the file) and runs the command.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs an already assembled config; library errors become exit codes. When run_dir is
/// non-null it receives the directory the command wrote to (empty if none).
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err,
             std::filesystem::path* run_dir = nullptr);

// Command bodies. They throw library errors; dispatch maps them to exit codes.
int cmd_minimize(const RunConfig& config, std::ostream& out, std::filesystem::path& run_dir);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::filesystem::path& run_dir);
int cmd_spectrum(const RunConfig& config, std::ostream& out, std::filesystem::path& run_dir);
int cmd_bubbles(const RunConfig& config, std::ostream& out, std::filesystem::path& run_dir);
int cmd_ledger(const RunConfig& config, std::ostream& out, std::filesystem::path& run_dir);
int cmd_report(const RunConfig& config, std::ostream& out);

}  // namespace warp_harmonic::cli
