#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qofdft/cell.hpp"
#include "qofdft/qsim.hpp"

namespace qofdft {

/// H = -1/2 nabla^2 + v_loc on the periodic grid of `cell`, where
/// v_loc = (v_KS + v_r) / lambda has already been divided by lambda.
struct OrbitalFreeHamiltonian {
  SimulationCell cell;
  std::vector<double> v_loc;
  double lambda = 1.0;
};

struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

/// Eigenpairs of a Hermitian matrix, ascending.
struct DenseSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

DenseSpectrum diagonalize(const Eigen::MatrixXcd& hermitian);

/// Gershgorin interval of a Hermitian matrix.
SpectralBounds gershgorin_bounds(const Eigen::MatrixXcd& hermitian);

/// A Hermitian operator on qubits [0, num_qubits()) of a statevector, as seen
/// by the quantum subroutines: they only need real-time evolution, plus a
/// dense matrix for exact oracles on small registers.
class HamiltonianOperator {
 public:
  virtual ~HamiltonianOperator() = default;

  virtual int num_qubits() const = 0;
  std::size_t dimension() const { return std::size_t{1} << num_qubits(); }

  /// Applies exp(-i H t) to the low register on every branch of the
  /// remaining qubits. `t` may be negative.
  virtual void evolve(StateVector& state, double t) const = 0;

  virtual Eigen::MatrixXcd dense_matrix() const = 0;

  /// An interval guaranteed to contain the spectrum.
  virtual SpectralBounds bounds() const = 0;
};

/// Arbitrary Hermitian matrix; evolution is exact through its cached
/// eigendecomposition.
class DenseHamiltonian final : public HamiltonianOperator {
 public:
  explicit DenseHamiltonian(Eigen::MatrixXcd matrix);

  int num_qubits() const override { return num_qubits_; }
  void evolve(StateVector& state, double t) const override;
  Eigen::MatrixXcd dense_matrix() const override { return matrix_; }
  SpectralBounds bounds() const override;

  const DenseSpectrum& spectrum() const { return spectrum_; }

 private:
  Eigen::MatrixXcd matrix_;
  DenseSpectrum spectrum_;
  int num_qubits_ = 0;
};

}  // namespace qofdft
