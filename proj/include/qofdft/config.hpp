#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "qofdft/cell.hpp"
#include "qofdft/ofham.hpp"
#include "qofdft/oracle.hpp"
#include "qofdft/pite.hpp"
#include "qofdft/qpe.hpp"
#include "qofdft/scf.hpp"

namespace qofdft {

enum class RunMode { kScf, kPiteDemo, kQpe, kCost, kOracleScf };

const char* to_string(RunMode mode);
/// Parses "scf", "pite-demo", "qpe", "cost" or "oracle-scf".
RunMode parse_run_mode(const std::string& name);

struct CellSpec {
  std::array<double, 9> lattice{1, 0, 0, 0, 1, 0, 0, 0, 1};  // a1, a2, a3
  std::array<int, 3> qubits{3, 3, 3};

  SimulationCell build() const;
  friend bool operator==(const CellSpec&, const CellSpec&) = default;
};

struct CostSpec {
  int min_qubits = 6;
  int max_qubits = 20;
  std::uint64_t groups = 0;  // 0: full redundancy

  friend bool operator==(const CostSpec&, const CostSpec&) = default;
};

struct QpeRunSpec {
  QpeConfig config;
  int trotter_steps = 1;
  /// Prepare the QPE input with run_pite from sqrt(rho0); otherwise the
  /// dense ground state is used.
  bool prepare_with_pite = true;
};

struct RunConfig {
  RunMode mode = RunMode::kScf;
  CellSpec cell;
  FunctionalSet functionals;
  double electrons = 2.0;
  /// Initial density table; uniform when absent.
  std::optional<std::filesystem::path> initial_density;
  ExternalPotentialSpec external;
  ScfConfig scf;
  QpeRunSpec qpe;
  CostSpec cost;
  OracleSolver oracle_solver = OracleSolver::kDense;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output_dir;

  /// Range and reference checks; throws ConfigError with a key path.
  void validate() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Reads a JSON run configuration. Unknown keys, wrong types, invalid ranges
/// and missing referenced files raise ConfigError naming the file and key
/// path. Relative file references resolve against the config directory.
RunConfig parse_config(const std::filesystem::path& path);

/// Same, from JSON text; relative paths resolve against `base_dir`.
RunConfig parse_config_text(const std::string& text,
                            const std::filesystem::path& base_dir = ".",
                            const std::string& source = "<config>");

/// Complete configuration with every default spelled out, as JSON text that
/// parse_config_text reads back to an identical RunConfig. Includes a
/// "config_hash" entry; the output directory is kept but not hashed.
std::string effective_config_json(const RunConfig& config);

/// FNV-1a hash of the canonical configuration without the output directory,
/// as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace qofdft
