#pragma once

#include <span>

#include "qofdft/eigref.hpp"
#include "qofdft/ofham.hpp"
#include "qofdft/scf.hpp"

namespace qofdft {

enum class OracleSolver { kDense, kLobpcg };

struct OracleOptions {
  OracleSolver solver = OracleSolver::kDense;
  LobpcgOptions lobpcg{1e-11, 2000};
};

/// Ground-state stage that replaces PITE with an eigensolver: rho_out is
/// n_e |phi_gs|^2 / (V_cell / N_g).
GroundStateStage eigensolver_stage(const OracleOptions& options);

/// The SCF loop of scf_loop with the ground state taken from eigref. The
/// cumulative success probability of every record is 1 and the infidelity
/// is not reported.
ScfTrace classical_scf_oracle(const DensityGrid& rho0, const FunctionalSet& funcs,
                              std::span<const double> v_ext,
                              const ScfConfig& config,
                              const OracleOptions& options = {},
                              const IterationObserver& observer = {});

}  // namespace qofdft
