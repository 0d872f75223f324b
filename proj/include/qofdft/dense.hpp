#pragma once

#include <Eigen/Dense>

#include "qofdft/cell.hpp"
#include "qofdft/hamiltonian.hpp"

namespace qofdft::dense {

/// Largest grid for which dense matrices are materialized (13 qubits).
inline constexpr std::size_t kMaxDenseDimension = std::size_t{1} << 13;

/// Plane-wave kinetic matrix in the position basis, built directly from the
/// momentum eigenstates: T = sum_G |p_G|^2/2 |G><G| with
/// <r_k|G> = N_g^{-1/2} exp(2 pi i sum_l G_l k_l / N_l), G centered.
Eigen::MatrixXcd kinetic_matrix(const SimulationCell& cell);

/// kinetic_matrix(cell) + diag(v_loc).
Eigen::MatrixXcd hamiltonian_matrix(const OrbitalFreeHamiltonian& h);

}  // namespace qofdft::dense
