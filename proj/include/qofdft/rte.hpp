#pragma once

#include <span>
#include <vector>

#include "qofdft/cell.hpp"
#include "qofdft/hamiltonian.hpp"
#include "qofdft/qsim.hpp"

namespace qofdft {

/// Diagonal of U_kin(t) in the CQFT frame: entry k holds
/// (t/2) |sum_l (k_l - N_l/2) b_l|^2, so that
///   exp(-i T t) = CQFT3D diag(exp(-i phase_k)) CQFT3D^dagger.
class KineticPhaseTable {
 public:
  KineticPhaseTable(const SimulationCell& cell, double t);

  std::span<const double> phases() const { return phases_; }
  double time() const { return time_; }

 private:
  std::vector<double> phases_;
  double time_;
};

/// |p|^2 / 2 for every CQFT-frame index, i.e. the kinetic spectrum on the
/// centered momentum grid.
std::vector<double> kinetic_eigenvalues(const SimulationCell& cell);

/// Largest kinetic eigenvalue (the kinetic operator norm).
double kinetic_norm(const SimulationCell& cell);

/// max_i |v_i|.
double potential_norm(std::span<const double> v_loc);

/// exp(-i T t) on the density register.
void apply_kinetic_rte(StateVector& state, const SimulationCell& cell, double t);

/// Maximum phase deviation (mod 2 pi) between U_kin(t) and its factorization
/// into single-axis terms U_kin,l and pairwise cross terms U_kin,ll'.
double kinetic_factor_check(const SimulationCell& cell, double t);

/// exp(-i v_loc(r_i) t) per grid point of the density register.
void apply_potential_rte(StateVector& state, std::span<const double> v_loc,
                         double t);

/// One first-order step, the operator product exp(-i T dt) exp(-i V dt):
/// the potential phase acts on the state first, then the kinetic factor.
void trotter_step(StateVector& state, const OrbitalFreeHamiltonian& h,
                  double dt);

/// Exact adjoint of trotter_step(dt): exp(+i V dt) exp(+i T dt).
void inverse_trotter_step(StateVector& state, const OrbitalFreeHamiltonian& h,
                          double dt);

/// Non-unitary split factor exp(-T dtau) exp(-V dtau). The result is not
/// renormalized.
void imaginary_trotter_step(StateVector& state, const OrbitalFreeHamiltonian& h,
                            double dtau);

/// dt * max|v_loc| < pi, the phase-wrapping guard reported with each run.
bool time_step_within_bound(const OrbitalFreeHamiltonian& h, double dt);

/// Orbital-free Hamiltonian as seen by PITE and QPE. Real-time evolution is
/// Trotterized with `trotter_steps` equal substeps per call.
class OfOperator final : public HamiltonianOperator {
 public:
  explicit OfOperator(OrbitalFreeHamiltonian h, int trotter_steps = 1);

  int num_qubits() const override { return h_.cell.total_qubits(); }
  void evolve(StateVector& state, double t) const override;
  Eigen::MatrixXcd dense_matrix() const override;
  /// [min v, max T + max v], by Weyl's inequality with T >= 0.
  SpectralBounds bounds() const override;

  const OrbitalFreeHamiltonian& hamiltonian() const { return h_; }
  int trotter_steps() const { return trotter_steps_; }

 private:
  OrbitalFreeHamiltonian h_;
  int trotter_steps_;
};

}  // namespace qofdft
