#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "qofdft/vec3.hpp"

namespace qofdft {

/// Integer coordinates of a real-space grid point, 0 <= k[l] < N_l.
struct GridIndex {
  std::array<int, 3> k{0, 0, 0};

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Integer coordinates of a centered momentum, -N_l/2 <= G[l] < N_l/2.
using MomentumIndex = std::array<int, 3>;

/// Periodic simulation cell with a power-of-two grid along each primitive
/// vector. Lengths are in bohr.
///
/// The linearized grid index runs with axis 3 fastest:
///   i = (k1 * N2 + k2) * N3 + k3.
/// Qubit significance follows the same order, so the density register of a
/// statevector is addressed by this index directly (axis 3 occupies the
/// least significant qubits).
class SimulationCell {
 public:
  SimulationCell(const Vec3& a1, const Vec3& a2, const Vec3& a3,
                 std::array<int, 3> qubits);

  /// Cubic cell of edge `length` with `qubits` per axis.
  static SimulationCell cubic(double length, int qubits);

  const Vec3& lattice(int axis) const { return a_[axis]; }
  const Vec3& reciprocal(int axis) const { return b_[axis]; }
  int qubits(int axis) const { return nq_[axis]; }
  int points(int axis) const { return n_[axis]; }
  std::array<int, 3> qubit_counts() const { return nq_; }
  int total_qubits() const { return nq_[0] + nq_[1] + nq_[2]; }
  std::size_t num_points() const { return num_points_; }
  double volume() const { return volume_; }
  /// Quadrature weight V_cell / N_g.
  double weight() const { return volume_ / static_cast<double>(num_points_); }

  std::size_t linear_index(const GridIndex& g) const;
  GridIndex grid_index(std::size_t i) const;

  /// r = sum_l k_l a_l / N_l.
  Vec3 grid_point(const GridIndex& g) const;
  Vec3 grid_point(std::size_t i) const { return grid_point(grid_index(i)); }

  /// p = G1 b1 + G2 b2 + G3 b3 for a centered momentum index.
  Vec3 momentum_value(const MomentumIndex& m) const;

  /// Centered momentum carried by linear index `i` after a centered Fourier
  /// transform of every axis: G_l = k_l - N_l/2.
  MomentumIndex centered_momentum(std::size_t i) const;

  /// Momentum of FFT output bin `i` (standard ordering, bins >= N/2 wrap to
  /// negative values).
  MomentumIndex fft_momentum(std::size_t i) const;

  /// Stable 64-bit fingerprint of the lattice vectors and qubit counts.
  std::uint64_t fingerprint() const;

  friend bool operator==(const SimulationCell& a, const SimulationCell& b) {
    return a.a_ == b.a_ && a.nq_ == b.nq_;
  }

 private:
  std::array<Vec3, 3> a_;
  std::array<Vec3, 3> b_;
  std::array<int, 3> nq_;
  std::array<int, 3> n_;
  std::size_t num_points_ = 0;
  double volume_ = 0.0;
};

/// b1 = 2 pi a2 x a3 / V_cell and cyclic.
std::array<Vec3, 3> reciprocal_vectors(const SimulationCell& cell);

}  // namespace qofdft
