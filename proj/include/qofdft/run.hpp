#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "qofdft/config.hpp"

namespace qofdft {

inline constexpr const char* kVersion = "0.1.0";

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "QOFDFT_OUT";

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitIncomplete = 2 };

struct RunOptions {
  /// Overrides the configured output directory.
  std::optional<std::filesystem::path> out_dir;
  /// Overrides the configured seed (and therefore the config hash).
  std::optional<std::uint64_t> seed;
  int threads = 1;
  /// Also write the final density grid and a statevector snapshot.
  bool dump_state = false;
  /// Diagnostics stream; nullptr silences them.
  std::ostream* log = nullptr;
};

/// Output directory: --out, then the configured output_dir, then
/// $QOFDFT_OUT, then "qofdft-out".
std::filesystem::path resolve_output_dir(const RunConfig& config,
                                         const RunOptions& options);

/// Executes config.mode. Every run writes
///   trace.jsonl            one JSON record per iteration/step/sample/row and
///                          a final summary record, each with the config hash,
///   metadata.json          version, seed, config hash, threads, wall times,
///   effective_config.json  the configuration with defaults filled in,
/// plus the mode's CSV table (first line "# config_hash=<hash>"). Returns
/// kExitOk when converged or complete, kExitIncomplete when the SCF did not
/// converge or QPE stopped short of its target, kExitError on any error.
int run(RunConfig config, const RunOptions& options);

}  // namespace qofdft
