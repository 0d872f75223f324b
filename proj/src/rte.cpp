#include "qofdft/rte.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qofdft/dense.hpp"
#include "qofdft/errors.hpp"

namespace qofdft {

namespace {

void check_grid(const StateVector& state, const SimulationCell& cell) {
  if (!state.layout().matches_cell(cell)) {
    throw LayoutError("state layout does not carry the cell's density register");
  }
}

void check_potential(std::span<const double> v, std::size_t n) {
  if (v.size() != n) {
    throw LayoutError("potential has " + std::to_string(v.size()) +
                      " entries, grid has " + std::to_string(n));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("non-finite potential value");
  }
}

/// exp(-T tau) in the CQFT frame, for imaginary time.
void apply_kinetic_decay(StateVector& state, const SimulationCell& cell,
                         double tau) {
  const std::vector<double> ek = kinetic_eigenvalues(cell);
  std::vector<cplx> factors(ek.size());
  for (std::size_t i = 0; i < ek.size(); ++i) factors[i] = std::exp(-tau * ek[i]);
  cqft_3d(state, /*inverse=*/true);
  apply_diagonal(state, state.layout().density_range(), factors);
  cqft_3d(state, /*inverse=*/false);
}

}  // namespace

KineticPhaseTable::KineticPhaseTable(const SimulationCell& cell, double t)
    : phases_(kinetic_eigenvalues(cell)), time_(t) {
  for (double& p : phases_) p *= t;
}

std::vector<double> kinetic_eigenvalues(const SimulationCell& cell) {
  std::vector<double> e(cell.num_points());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Vec3 p = cell.momentum_value(cell.centered_momentum(i));
    e[i] = 0.5 * dot(p, p);
  }
  return e;
}

double kinetic_norm(const SimulationCell& cell) {
  const std::vector<double> e = kinetic_eigenvalues(cell);
  return *std::max_element(e.begin(), e.end());
}

double potential_norm(std::span<const double> v_loc) {
  double m = 0.0;
  for (double x : v_loc) m = std::max(m, std::abs(x));
  return m;
}

void apply_kinetic_rte(StateVector& state, const SimulationCell& cell,
                       double t) {
  check_grid(state, cell);
  if (t == 0.0) return;
  const KineticPhaseTable table(cell, t);
  cqft_3d(state, /*inverse=*/true);
  apply_diagonal_phase(state, state.layout().density_range(), table.phases());
  cqft_3d(state, /*inverse=*/false);
}

double kinetic_factor_check(const SimulationCell& cell, double t) {
  const KineticPhaseTable table(cell, t);
  const auto& b = reciprocal_vectors(cell);
  double worst = 0.0;
  for (std::size_t i = 0; i < cell.num_points(); ++i) {
    const GridIndex g = cell.grid_index(i);
    double x[3];
    for (int l = 0; l < 3; ++l) x[l] = g.k[l] - cell.points(l) / 2;
    // Single-axis factors U_kin,l.
    double phase = 0.0;
    for (int l = 0; l < 3; ++l) phase += 0.5 * t * dot(b[l], b[l]) * x[l] * x[l];
    // Cross factors U_kin,12, U_kin,23, U_kin,31.
    static constexpr int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (const auto& pr : pairs) {
      phase += t * dot(b[pr[0]], b[pr[1]]) * x[pr[0]] * x[pr[1]];
    }
    const double d =
        std::remainder(phase - table.phases()[i], 2.0 * std::numbers::pi);
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

void apply_potential_rte(StateVector& state, std::span<const double> v_loc,
                         double t) {
  const QubitRange density = state.layout().density_range();
  check_potential(v_loc, density.dimension());
  if (t == 0.0) return;
  std::vector<double> phases(v_loc.size());
  for (std::size_t i = 0; i < phases.size(); ++i) phases[i] = v_loc[i] * t;
  apply_diagonal_phase(state, density, phases);
}

void trotter_step(StateVector& state, const OrbitalFreeHamiltonian& h,
                  double dt) {
  if (!(dt > 0.0)) throw ParameterError("Trotter step requires dt > 0");
  check_grid(state, h.cell);
  apply_potential_rte(state, h.v_loc, dt);
  apply_kinetic_rte(state, h.cell, dt);
}

void inverse_trotter_step(StateVector& state, const OrbitalFreeHamiltonian& h,
                          double dt) {
  if (!(dt > 0.0)) throw ParameterError("Trotter step requires dt > 0");
  check_grid(state, h.cell);
  apply_kinetic_rte(state, h.cell, -dt);
  apply_potential_rte(state, h.v_loc, -dt);
}

void imaginary_trotter_step(StateVector& state, const OrbitalFreeHamiltonian& h,
                            double dtau) {
  check_grid(state, h.cell);
  check_potential(h.v_loc, h.cell.num_points());
  std::vector<cplx> decay(h.v_loc.size());
  for (std::size_t i = 0; i < decay.size(); ++i) {
    decay[i] = std::exp(-dtau * h.v_loc[i]);
  }
  apply_diagonal(state, state.layout().density_range(), decay);
  apply_kinetic_decay(state, h.cell, dtau);
}

bool time_step_within_bound(const OrbitalFreeHamiltonian& h, double dt) {
  return std::abs(dt) * potential_norm(h.v_loc) < std::numbers::pi;
}

OfOperator::OfOperator(OrbitalFreeHamiltonian h, int trotter_steps)
    : h_(std::move(h)), trotter_steps_(trotter_steps) {
  if (trotter_steps_ < 1) {
    throw ParameterError("trotter_steps must be at least 1");
  }
  check_potential(h_.v_loc, h_.cell.num_points());
}

void OfOperator::evolve(StateVector& state, double t) const {
  if (t == 0.0) return;
  const double dt = std::abs(t) / trotter_steps_;
  for (int s = 0; s < trotter_steps_; ++s) {
    if (t > 0.0) {
      trotter_step(state, h_, dt);
    } else {
      inverse_trotter_step(state, h_, dt);
    }
  }
}

Eigen::MatrixXcd OfOperator::dense_matrix() const {
  return dense::hamiltonian_matrix(h_);
}

SpectralBounds OfOperator::bounds() const {
  const auto [lo, hi] = std::minmax_element(h_.v_loc.begin(), h_.v_loc.end());
  return {*lo, kinetic_norm(h_.cell) + *hi};
}

}  // namespace qofdft
