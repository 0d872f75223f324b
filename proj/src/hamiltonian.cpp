#include "qofdft/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qofdft/errors.hpp"

namespace qofdft {

DenseSpectrum diagonalize(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("dense Hermitian eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SpectralBounds gershgorin_bounds(const Eigen::MatrixXcd& h) {
  SpectralBounds b{+INFINITY, -INFINITY};
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    double radius = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      if (j != i) radius += std::abs(h(i, j));
    }
    const double c = h(i, i).real();
    b.lower = std::min(b.lower, c - radius);
    b.upper = std::max(b.upper, c + radius);
  }
  return b;
}

DenseHamiltonian::DenseHamiltonian(Eigen::MatrixXcd matrix)
    : matrix_(std::move(matrix)) {
  const auto n = static_cast<std::size_t>(matrix_.rows());
  if (matrix_.rows() != matrix_.cols() || n < 2 || !std::has_single_bit(n)) {
    throw LayoutError("dense Hamiltonian must be square with a power-of-two "
                      "dimension >= 2");
  }
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * scale) {
    throw ParameterError("dense Hamiltonian is not Hermitian (max |H - H^+| = " +
                         std::to_string(asym) + ")");
  }
  num_qubits_ = std::countr_zero(n);
  spectrum_ = diagonalize(matrix_);
}

void DenseHamiltonian::evolve(StateVector& state, double t) const {
  const Eigen::VectorXcd phases =
      (spectrum_.values.array() * (-t)).unaryExpr([](double x) {
        return std::polar(1.0, x);
      });
  const Eigen::MatrixXcd u =
      spectrum_.vectors * phases.asDiagonal() * spectrum_.vectors.adjoint();
  apply_matrix(state, {0, num_qubits_}, u);
}

SpectralBounds DenseHamiltonian::bounds() const {
  return gershgorin_bounds(matrix_);
}

}  // namespace qofdft
