#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "qofdft/hamiltonian.hpp"
#include "qofdft/qsim.hpp"

namespace qofdft {

enum class PiteMode { kExact, kApproximate };

/// Probabilistic imaginary-time evolution with the non-unitary step
/// M = m0 exp(-H dtau).
struct PiteParams {
  double m0 = 0.99;
  double dtau = 0.001;  // hartree^-1
  int steps = 50;
  PiteMode mode = PiteMode::kExact;

  /// Throws ParameterError unless 0 < m0 < 1, m0 != 1/sqrt2, dtau >= 0 and
  /// steps >= 1.
  void validate() const;

  /// sign(m0 - 1/sqrt2).
  int kappa() const;
  /// m0 / sqrt(1 - m0^2).
  double s1() const;
  /// kappa arccos((m0 + sqrt(1 - m0^2)) / sqrt2).
  double theta0() const;
};

struct PiteStep {
  double probability = 0.0;
  StateVector state;
};

/// Dense M = m0 V exp(-Lambda dtau) V^dagger.
Eigen::MatrixXcd pite_operator(const DenseSpectrum& spectrum,
                               const PiteParams& params);

/// M|psi> / ||M|psi>|| with probability ||M|psi>||^2, for a precomputed M
/// acting on the low qubits of `state`.
PiteStep pite_step_exact(const StateVector& state, const Eigen::MatrixXcd& m);

/// Exact step through the dense eigendecomposition of `h` (dimension up to
/// 2^13). Larger orbital-free operators fall back to the split factors
/// m0 exp(-T dtau) exp(-V dtau), whose error is O(dtau^2).
PiteStep pite_step_exact(const StateVector& state, const HamiltonianOperator& h,
                         const PiteParams& params);

/// First-order ancilla circuit. The ancilla is the register of kind
/// kPiteAncilla and must be |0>. Sequence: Hadamard and W on the ancilla,
/// exp(i theta0) exp(-i s1 dtau H) on the ancilla-0 branch and
/// exp(-i theta0) exp(+i s1 dtau H) on the ancilla-1 branch, W^dagger,
/// post-selection of ancilla 0. The returned state keeps the ancilla (in |0>).
PiteStep pite_step_approx(const StateVector& state_with_ancilla,
                          const HamiltonianOperator& h, const PiteParams& params);

/// 1 - |<a|b>|^2 for normalized inputs, clamped to [0, 1].
double infidelity(const StateVector& a, const StateVector& b);
double infidelity(const StateVector& a, const Eigen::VectorXcd& b);

struct PiteTrajectory {
  std::vector<double> step_probability;
  std::vector<double> cumulative_probability;
  /// Per step, present only when a reference ground state was given.
  std::vector<double> infidelity;
  /// m0^j |<phi_j|phi_gs>|^2, the overlap-weighted reporting convention.
  /// Present only with a reference; not equal to the cumulative probability.
  std::vector<double> overlap_weighted_probability;
  std::vector<StateVector> snapshots;  // filled when requested
  /// Final density-register state (any PITE ancilla removed).
  std::optional<StateVector> final_state;
};

struct PiteRunOptions {
  std::optional<Eigen::VectorXcd> reference;
  bool keep_snapshots = false;
  /// Eigendecomposition of h to reuse in exact mode instead of recomputing.
  const DenseSpectrum* spectrum = nullptr;
};

/// Runs params.steps steps with deterministic post-selection. Throws
/// CollapseError when a step succeeds with probability below 1e-300.
PiteTrajectory run_pite(const StateVector& state, const HamiltonianOperator& h,
                        const PiteParams& params,
                        const PiteRunOptions& options = {});

/// CSV with header step,step_probability,cumulative_probability,infidelity.
void write_trajectory_csv(const std::filesystem::path& path,
                          const PiteTrajectory& trajectory);

}  // namespace qofdft
