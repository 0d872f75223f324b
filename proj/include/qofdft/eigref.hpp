#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qofdft/cell.hpp"
#include "qofdft/hamiltonian.hpp"

namespace qofdft {

struct GroundState {
  double energy = 0.0;
  Eigen::VectorXcd vector;
};

/// Rotates `v` so that its largest-magnitude component (first one on ties)
/// is real and positive.
void fix_phase(Eigen::VectorXcd& v);

/// Lowest eigenpair of a dense Hermitian matrix, dimension <= 2^13.
GroundState dense_ground_state(const Eigen::MatrixXcd& h);
GroundState dense_ground_state(const HamiltonianOperator& h);

/// Diagonal of an operator in the basis where it is cheapest to invert:
/// the position basis, or the plane-wave basis of `cell`.
struct NaturalDiagonal {
  Eigen::VectorXd values;
  std::optional<SimulationCell> plane_wave_cell;
};

/// Hermitian operator applied to blocks of column vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual Eigen::MatrixXcd apply(const Eigen::MatrixXcd& x) const = 0;
  virtual Eigen::MatrixXcd dense() const = 0;
  virtual NaturalDiagonal natural_diagonal() const = 0;
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {}

  Eigen::Index dimension() const override { return matrix_.rows(); }
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& x) const override {
    return matrix_ * x;
  }
  Eigen::MatrixXcd dense() const override { return matrix_; }
  NaturalDiagonal natural_diagonal() const override {
    return {matrix_.diagonal().real(), std::nullopt};
  }

 private:
  Eigen::MatrixXcd matrix_;
};

/// H x = IFFT(|p|^2/2 FFT(x)) + v_loc x, O(N_g log N_g) per vector without
/// materializing H.
class SparseOfOperator final : public LinearOperator {
 public:
  explicit SparseOfOperator(OrbitalFreeHamiltonian h);

  Eigen::Index dimension() const override;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& x) const override;
  Eigen::MatrixXcd dense() const override;
  /// Plane-wave diagonal |p|^2/2 + mean(v_loc).
  NaturalDiagonal natural_diagonal() const override;

  const OrbitalFreeHamiltonian& hamiltonian() const { return h_; }

 private:
  OrbitalFreeHamiltonian h_;
  std::vector<double> kinetic_;  // FFT bin order
};

enum class PreconditionerKind {
  kIdentity,
  kShiftedInverse,  // (H - mu I)^{-1}, dense LU
  kJacobi,          // (diag(H) - mu)^{-1} in the operator's natural basis
};

class Preconditioner {
 public:
  Preconditioner() = default;  // identity

  PreconditionerKind kind() const { return kind_; }
  /// Shift actually used, after the guard offset and any singularity fix.
  double shift() const { return shift_; }
  bool shift_adjusted() const { return shift_adjusted_; }

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& block) const;

 private:
  friend Preconditioner build_preconditioner(const LinearOperator&, double,
                                             PreconditionerKind,
                                             std::optional<double>, double);

  PreconditionerKind kind_ = PreconditionerKind::kIdentity;
  double shift_ = 0.0;
  bool shift_adjusted_ = false;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  NaturalDiagonal diagonal_;
  Eigen::VectorXd inverse_diagonal_;
};

/// Builds M ~ (H - (mu - delta) I)^{-1}. `delta` keeps the dense inverse
/// finite when mu is the exact ground-state energy and defaults to 1e-6 times
/// the spectral range estimate. `floor` bounds the magnitude of Jacobi
/// denominators and the relative LU pivot size below which the shift is moved
/// again by delta (flagged via shift_adjusted()).
Preconditioner build_preconditioner(const LinearOperator& op, double mu,
                                    PreconditionerKind kind,
                                    std::optional<double> delta = std::nullopt,
                                    double floor = 1e-12);

struct LobpcgOptions {
  double tolerance = 1e-8;  // on ||H x - theta x|| for unit x
  int max_iterations = 1000;
};

struct LobpcgResult {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  int iterations = 0;
  bool converged = false;
  int restarts = 0;
  /// Ritz values after every iteration (row = iteration).
  std::vector<Eigen::VectorXd> ritz_history;
  std::vector<double> max_residual_history;
};

/// Smallest eigenpairs by locally optimal block preconditioned conjugate
/// gradients. Rayleigh-Ritz runs on span{X, T R, P} every iteration, with
/// converged columns soft-locked (no new search directions) and the basis
/// re-orthonormalized; a near-dependent basis drops P and counts a restart.
LobpcgResult lobpcg(const LinearOperator& op, const Preconditioner& precond,
                    const Eigen::MatrixXcd& initial_block,
                    const LobpcgOptions& options = {});

}  // namespace qofdft
