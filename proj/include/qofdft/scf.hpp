#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qofdft/ofham.hpp"
#include "qofdft/pite.hpp"
#include "qofdft/qsim.hpp"

namespace qofdft {

/// |phi> = sqrt(V_cell / (n_e N_g)) sum_i sqrt(rho(r_i)) |r_i>.
/// Throws ParameterError (or DomainError) for an invalid density.
StateVector encode_density(const DensityGrid& rho);

/// rho(r_i) = |a_i|^2 n_e N_g / V_cell on the density register, rescaled so
/// that the quadrature integral equals n_e exactly. Ancilla qubits must be in
/// a definite basis state (weight on the other value at most 1e-10) and are
/// dropped; otherwise ReadoutError.
DensityGrid decode_density(const StateVector& state, double electrons,
                           const SimulationCell& cell);

enum class MixingScheme { kLinear, kBroyden };

struct MixingConfig {
  MixingScheme scheme = MixingScheme::kBroyden;
  double alpha = 0.3;  // linear weight, also the initial inverse-Jacobian scale
  int history = 8;     // Broyden difference pairs kept

  void validate() const;
};

/// One step of the fixed-point iteration x -> x + G F(x) with
/// F(x) = out - in, from the full history of (input, output) vectors.
/// Linear: x_k + alpha F_k. Broyden: good (first) Broyden with rank-one
/// Jacobian updates over the last `history` differences, starting from the
/// Jacobian -I/alpha; the inverse is carried in low-rank form.
std::vector<double> mix_vectors(std::span<const std::vector<double>> inputs,
                                std::span<const std::vector<double>> outputs,
                                const MixingConfig& config);

/// mix_vectors on densities, then negative samples clipped to zero and the
/// result rescaled to the electron count.
DensityGrid mix_density(std::span<const std::pair<DensityGrid, DensityGrid>> history,
                        const MixingConfig& config);

/// sqrt((V_cell / N_g) sum_i (a_i - b_i)^2).
double density_residual(const DensityGrid& a, const DensityGrid& b);

enum class EnergyConvention {
  kOutputDensity,  // E[rho_out] of the iteration
  kInputDensity,   // E[rho_in]
};

struct ScfConfig {
  double threshold = 1e-6;
  int max_iterations = 50;
  MixingConfig mixing;
  PiteParams pite;
  EnergyConvention energy = EnergyConvention::kOutputDensity;
  /// Infidelity against the exact ground state of each iteration's
  /// Hamiltonian, when the grid admits a dense diagonalization.
  bool track_infidelity = true;

  void validate() const;
};

struct ScfIteration {
  int iteration = 0;
  double residual = 0.0;
  double energy = 0.0;
  double cumulative_success_probability = 1.0;
  std::optional<double> infidelity;
  double seconds = 0.0;
};

enum class ScfStatus { kConverged, kMaxIterations };

struct ScfTrace {
  std::vector<ScfIteration> iterations;
  ScfStatus status = ScfStatus::kMaxIterations;
  /// Output density of the last iteration and the input that produced it.
  std::optional<DensityGrid> final_density;
  std::optional<DensityGrid> final_input;
  EnergyBreakdown final_energy;

  bool converged() const { return status == ScfStatus::kConverged; }
};

/// Output of the ground-state stage of one SCF iteration.
struct StageResult {
  DensityGrid rho_out;
  double cumulative_success_probability = 1.0;
  std::optional<double> infidelity;
};

using GroundStateStage =
    std::function<StageResult(const OrbitalFreeHamiltonian&, const DensityGrid&)>;
using IterationObserver = std::function<void(const ScfIteration&)>;

/// The self-consistency loop shared by the hybrid and classical pipelines:
/// assemble H[rho_in], run `stage`, evaluate the residual and energy, stop
/// when the residual is below the threshold, otherwise mix.
ScfTrace run_scf(const DensityGrid& rho0, const FunctionalSet& funcs,
                 std::span<const double> v_ext, const ScfConfig& config,
                 const GroundStateStage& stage,
                 const IterationObserver& observer = {});

/// PITE stage: encode sqrt(rho_in), run config.pite steps, decode.
GroundStateStage pite_stage(const ScfConfig& config);

/// Hybrid loop with the PITE stage.
ScfTrace scf_loop(const DensityGrid& rho0, const FunctionalSet& funcs,
                  std::span<const double> v_ext, const ScfConfig& config,
                  const IterationObserver& observer = {});

}  // namespace qofdft
