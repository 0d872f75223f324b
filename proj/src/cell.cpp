#include "qofdft/cell.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "qofdft/errors.hpp"
#include "qofdft/hash.hpp"

namespace qofdft {

namespace {

constexpr int kMaxQubitsPerAxis = 20;

}  // namespace

SimulationCell::SimulationCell(const Vec3& a1, const Vec3& a2, const Vec3& a3,
                               std::array<int, 3> qubits)
    : a_{a1, a2, a3}, nq_(qubits) {
  for (int l = 0; l < 3; ++l) {
    if (nq_[l] < 1 || nq_[l] > kMaxQubitsPerAxis) {
      throw GeometryError("qubits per axis must lie in [1, " +
                          std::to_string(kMaxQubitsPerAxis) + "], got " +
                          std::to_string(nq_[l]) + " on axis " +
                          std::to_string(l + 1));
    }
    n_[l] = 1 << nq_[l];
  }
  num_points_ = static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];

  volume_ = dot(a1, cross(a2, a3));
  const double scale = norm(a1) * norm(a2) * norm(a3);
  if (!(scale > 0.0) || !std::isfinite(volume_) || volume_ <= 1e-12 * scale) {
    throw GeometryError(
        "lattice vectors must be finite, linearly independent and "
        "right-handed (a1 . (a2 x a3) > 0); got volume " +
        std::to_string(volume_));
  }
  const double f = 2.0 * std::numbers::pi / volume_;
  b_[0] = f * cross(a2, a3);
  b_[1] = f * cross(a3, a1);
  b_[2] = f * cross(a1, a2);
}

SimulationCell SimulationCell::cubic(double length, int qubits) {
  return SimulationCell({length, 0, 0}, {0, length, 0}, {0, 0, length},
                        {qubits, qubits, qubits});
}

std::size_t SimulationCell::linear_index(const GridIndex& g) const {
  for (int l = 0; l < 3; ++l) {
    if (g.k[l] < 0 || g.k[l] >= n_[l]) {
      throw LayoutError("grid index component " + std::to_string(g.k[l]) +
                        " out of range [0, " + std::to_string(n_[l]) +
                        ") on axis " + std::to_string(l + 1));
    }
  }
  return (static_cast<std::size_t>(g.k[0]) * n_[1] + g.k[1]) * n_[2] + g.k[2];
}

GridIndex SimulationCell::grid_index(std::size_t i) const {
  if (i >= num_points_) {
    throw LayoutError("linear grid index " + std::to_string(i) +
                      " out of range [0, " + std::to_string(num_points_) + ")");
  }
  GridIndex g;
  g.k[2] = static_cast<int>(i % n_[2]);
  i /= n_[2];
  g.k[1] = static_cast<int>(i % n_[1]);
  g.k[0] = static_cast<int>(i / n_[1]);
  return g;
}

Vec3 SimulationCell::grid_point(const GridIndex& g) const {
  (void)linear_index(g);  // range check
  Vec3 r{0, 0, 0};
  for (int l = 0; l < 3; ++l) {
    r = r + (static_cast<double>(g.k[l]) / n_[l]) * a_[l];
  }
  return r;
}

Vec3 SimulationCell::momentum_value(const MomentumIndex& m) const {
  Vec3 p{0, 0, 0};
  for (int l = 0; l < 3; ++l) {
    if (m[l] < -n_[l] / 2 || m[l] >= n_[l] / 2) {
      throw LayoutError("momentum component " + std::to_string(m[l]) +
                        " outside the centered range [" +
                        std::to_string(-n_[l] / 2) + ", " +
                        std::to_string(n_[l] / 2 - 1) + "] on axis " +
                        std::to_string(l + 1));
    }
    p = p + static_cast<double>(m[l]) * b_[l];
  }
  return p;
}

MomentumIndex SimulationCell::centered_momentum(std::size_t i) const {
  const GridIndex g = grid_index(i);
  return {g.k[0] - n_[0] / 2, g.k[1] - n_[1] / 2, g.k[2] - n_[2] / 2};
}

MomentumIndex SimulationCell::fft_momentum(std::size_t i) const {
  const GridIndex g = grid_index(i);
  MomentumIndex m;
  for (int l = 0; l < 3; ++l) {
    m[l] = g.k[l] < n_[l] / 2 ? g.k[l] : g.k[l] - n_[l];
  }
  return m;
}

std::uint64_t SimulationCell::fingerprint() const {
  std::string text;
  char buf[64];
  for (const auto& a : a_) {
    for (double x : a) {
      std::snprintf(buf, sizeof buf, "%.17g,", x);
      text += buf;
    }
  }
  for (int q : nq_) {
    text += std::to_string(q) + ",";
  }
  return fnv1a(text);
}

std::array<Vec3, 3> reciprocal_vectors(const SimulationCell& cell) {
  return {cell.reciprocal(0), cell.reciprocal(1), cell.reciprocal(2)};
}

}  // namespace qofdft
