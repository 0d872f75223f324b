#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qofdft/dense.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/rte.hpp"

using namespace qofdft;

namespace {

double max_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

std::vector<double> smooth_potential(const SimulationCell& cell) {
  std::vector<double> v(cell.num_points());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec3 r = cell.grid_point(i);
    v[i] = -2.0 * std::cos(2 * oracle::kPi * r[0]) + 0.5 * std::sin(2 * oracle::kPi * r[1]);
  }
  return v;
}

}  // namespace

TEST(Kinetic, PhaseTableHoldsHalfMomentumSquared) {
  const SimulationCell cell = oracle::fcc_cell(3.0, 2);
  const double t = 0.37;
  const KineticPhaseTable table(cell, t);
  for (std::size_t i = 0; i < cell.num_points(); ++i) {
    const Vec3 p = cell.momentum_value(cell.centered_momentum(i));
    EXPECT_NEAR(table.phases()[i], 0.5 * t * dot(p, p), 1e-12);
  }
  const std::vector<double> ev = kinetic_eigenvalues(cell);
  double max_ev = 0.0;
  for (double e : ev) max_ev = std::max(max_ev, e);
  EXPECT_DOUBLE_EQ(kinetic_norm(cell), max_ev);
}

TEST(Kinetic, DenseKineticMatrixMatchesKroneckerOracle) {
  for (const SimulationCell& cell : {SimulationCell::cubic(1.0, 2), oracle::fcc_cell(2.0, 2)}) {
    const Eigen::MatrixXcd t = dense::kinetic_matrix(cell);
    EXPECT_LT((t - oracle::kinetic_oracle(cell)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Kinetic, PropagationMatchesMatrixExponential) {
  std::mt19937_64 rng(8);
  for (const SimulationCell& cell : {SimulationCell::cubic(1.0, 2), oracle::fcc_cell(2.5, 2)}) {
    const Eigen::VectorXcd v = oracle::random_state(int(cell.num_points()), rng);
    const double t = 0.013;
    StateVector s = oracle::to_density_state(cell, v);
    apply_kinetic_rte(s, cell, t);
    const Eigen::VectorXcd expected =
        oracle::expm_real_time(oracle::kinetic_oracle(cell), t) * v;
    EXPECT_LT(max_diff(oracle::to_eigen(s), expected), 1e-10);
  }
}

TEST(Kinetic, FactorizationIntoAxisAndCrossTerms) {
  EXPECT_LT(kinetic_factor_check(oracle::fcc_cell(4.0, 3), 0.2), 1e-12);
  const SimulationCell skew({1.0, 0.0, 0.0}, {0.3, 1.1, 0.0}, {0.2, 0.1, 0.9}, {2, 3, 2});
  EXPECT_LT(kinetic_factor_check(skew, 0.05), 1e-12);
}

TEST(Potential, DiagonalPhase) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 1);
  std::mt19937_64 rng(2);
  const Eigen::VectorXcd v = oracle::random_state(8, rng);
  const std::vector<double> pot{0.1, -0.2, 0.3, 0.0, 1.0, 2.0, -3.0, 0.5};
  StateVector s = oracle::to_density_state(cell, v);
  apply_potential_rte(s, pot, 0.4);
  for (int i = 0; i < 8; ++i) {
    EXPECT_NEAR(std::abs(s[i] - v(i) * std::polar(1.0, -0.4 * pot[i])), 0.0, 1e-15);
  }
  EXPECT_DOUBLE_EQ(potential_norm(pot), 3.0);
}

TEST(Rte, UnitaryOverManyApplications) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const std::vector<double> v = smooth_potential(cell);
  std::mt19937_64 rng(6);
  StateVector s = oracle::to_density_state(cell, oracle::random_state(64, rng));
  const OrbitalFreeHamiltonian h{cell, v, 1.0};
  for (int i = 0; i < 1000; ++i) trotter_step(s, h, 0.01);
  EXPECT_LT(std::abs(s.norm2() - 1.0), 1e-10);
}

TEST(Rte, StepOrderAndInverse) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const std::vector<double> v = smooth_potential(cell);
  const OrbitalFreeHamiltonian h{cell, v, 1.0};
  std::mt19937_64 rng(10);
  const Eigen::VectorXcd psi = oracle::random_state(64, rng);
  const double dt = 0.05;

  // exp(-i T dt) exp(-i V dt): the potential phase acts first.
  Eigen::MatrixXcd vd = Eigen::MatrixXcd::Zero(64, 64);
  for (int i = 0; i < 64; ++i) vd(i, i) = v[i];
  const Eigen::VectorXcd expected = oracle::expm_real_time(oracle::kinetic_oracle(cell), dt) *
                                    (oracle::expm_real_time(vd, dt) * psi);
  StateVector s = oracle::to_density_state(cell, psi);
  trotter_step(s, h, dt);
  EXPECT_LT(max_diff(oracle::to_eigen(s), expected), 1e-12);

  inverse_trotter_step(s, h, dt);
  EXPECT_LT(max_diff(oracle::to_eigen(s), psi), 1e-13);
}

TEST(Rte, FirstOrderTrotterErrorScalesQuadratically) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const std::vector<double> v = smooth_potential(cell);
  const OrbitalFreeHamiltonian h{cell, v, 1.0};
  const Eigen::MatrixXcd hd = oracle::hamiltonian_oracle(cell, v);
  std::mt19937_64 rng(12);
  const Eigen::VectorXcd psi = oracle::random_state(64, rng);
  std::vector<double> dts, errs;
  for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
    StateVector s = oracle::to_density_state(cell, psi);
    trotter_step(s, h, dt);
    dts.push_back(dt);
    errs.push_back((oracle::to_eigen(s) - oracle::expm_real_time(hd, dt) * psi).norm());
  }
  const double slope = oracle::log_log_slope(dts, errs);
  EXPECT_GT(slope, 1.8);
  EXPECT_LT(slope, 2.2);
}

TEST(Rte, OfOperatorEvolveHandlesNegativeTimeAndSubsteps) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const OrbitalFreeHamiltonian h{cell, smooth_potential(cell), 1.0};
  std::mt19937_64 rng(13);
  const Eigen::VectorXcd psi = oracle::random_state(64, rng);
  const OfOperator op(h, 4);
  StateVector s = oracle::to_density_state(cell, psi);
  op.evolve(s, 0.03);
  op.evolve(s, -0.03);
  EXPECT_LT(max_diff(oracle::to_eigen(s), psi), 1e-13);

  StateVector a = oracle::to_density_state(cell, psi);
  op.evolve(a, 0.02);
  StateVector b = oracle::to_density_state(cell, psi);
  for (int i = 0; i < 4; ++i) trotter_step(b, h, 0.005);
  EXPECT_LT(max_diff(oracle::to_eigen(a), oracle::to_eigen(b)), 1e-14);

  const SpectralBounds sb = op.bounds();
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(op.dense_matrix())
                                 .eigenvalues();
  EXPECT_LE(sb.lower, ev(0) + 1e-12);
  EXPECT_GE(sb.upper, ev(63) - 1e-12);
}

TEST(Rte, PhaseWrapGuard) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 1);
  const OrbitalFreeHamiltonian h{cell, std::vector<double>(8, 100.0), 1.0};
  EXPECT_TRUE(time_step_within_bound(h, 0.01));
  EXPECT_FALSE(time_step_within_bound(h, 0.04));
}
