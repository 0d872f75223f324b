#include "qofdft/dense.hpp"

#include <numbers>
#include <string>
#include <vector>

#include "qofdft/errors.hpp"

namespace qofdft::dense {

namespace {

void check_dimension(std::size_t n) {
  if (n > kMaxDenseDimension) {
    throw LayoutError("dense matrices are limited to dimension " +
                      std::to_string(kMaxDenseDimension) + ", requested " +
                      std::to_string(n));
  }
}

}  // namespace

Eigen::MatrixXcd kinetic_matrix(const SimulationCell& cell) {
  const std::size_t n = cell.num_points();
  check_dimension(n);

  // Roots of unity per axis, indexed by (G k) mod N_l.
  std::array<std::vector<cplx>, 3> roots;
  for (int l = 0; l < 3; ++l) {
    const int nl = cell.points(l);
    roots[l].resize(nl);
    for (int m = 0; m < nl; ++m) {
      roots[l][m] = std::polar(1.0, 2.0 * std::numbers::pi * m / nl);
    }
  }

  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd plane_waves(dim, dim);
  Eigen::VectorXd energies(dim);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    const MomentumIndex g = cell.centered_momentum(c);
    const Vec3 p = cell.momentum_value(g);
    energies[static_cast<Eigen::Index>(c)] = 0.5 * dot(p, p);
    for (std::size_t r = 0; r < n; ++r) {
      const GridIndex k = cell.grid_index(r);
      cplx v = s;
      for (int l = 0; l < 3; ++l) {
        const int nl = cell.points(l);
        const int m = ((g[l] * k.k[l]) % nl + nl) % nl;
        v *= roots[l][m];
      }
      plane_waves(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  Eigen::MatrixXcd t =
      plane_waves * energies.asDiagonal() * plane_waves.adjoint();
  // Exact Hermiticity; the product above is Hermitian only to rounding.
  return 0.5 * (t + t.adjoint());
}

Eigen::MatrixXcd hamiltonian_matrix(const OrbitalFreeHamiltonian& h) {
  if (h.v_loc.size() != h.cell.num_points()) {
    throw LayoutError("potential size does not match the grid");
  }
  Eigen::MatrixXcd m = kinetic_matrix(h.cell);
  for (std::size_t i = 0; i < h.v_loc.size(); ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += h.v_loc[i];
  }
  return m;
}

}  // namespace qofdft::dense
