#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/pite.hpp"
#include "qofdft/rte.hpp"

using namespace qofdft;

namespace {

PiteParams params(double dtau, int steps = 1, PiteMode mode = PiteMode::kExact) {
  PiteParams p;
  p.dtau = dtau;
  p.steps = steps;
  p.mode = mode;
  return p;
}

}  // namespace

TEST(PiteParams, DerivedConstants) {
  const PiteParams p;
  EXPECT_EQ(p.m0, 0.99);
  EXPECT_EQ(p.dtau, 0.001);
  EXPECT_EQ(p.steps, 50);
  EXPECT_EQ(p.kappa(), 1);
  EXPECT_NEAR(p.s1(), 0.99 / std::sqrt(1 - 0.99 * 0.99), 1e-14);
  EXPECT_NEAR(p.theta0(), std::acos((0.99 + std::sqrt(1 - 0.99 * 0.99)) / std::sqrt(2.0)), 1e-14);

  PiteParams low;
  low.m0 = 0.5;
  EXPECT_EQ(low.kappa(), -1);
  // (0.5 + sqrt(0.75)) / sqrt2 = cos(pi/12).
  EXPECT_NEAR(low.theta0(), -oracle::kPi / 12, 1e-14);
}

TEST(PiteParams, Validation) {
  PiteParams p;
  p.m0 = 1.0 / std::sqrt(2.0);
  EXPECT_THROW(p.validate(), ParameterError);
  p.m0 = 1.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p.m0 = 0.9;
  p.steps = 0;
  EXPECT_THROW(p.validate(), ParameterError);
  p.steps = 1;
  p.dtau = -1e-3;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Pite, ExactStepMatchesDenseOperator) {
  std::mt19937_64 rng(31);
  const Eigen::MatrixXcd h = oracle::random_nonnegative_hermitian(8, rng);
  const DenseHamiltonian op(h);
  const PiteParams p = params(0.3);
  const Eigen::MatrixXcd m = p.m0 * oracle::expm_imaginary_time(h, p.dtau);
  const Eigen::VectorXcd psi = oracle::random_state(8, rng);
  const PiteStep step = pite_step_exact(oracle::to_state(psi), op, p);
  const Eigen::VectorXcd mpsi = m * psi;
  EXPECT_NEAR(step.probability, mpsi.squaredNorm(), 1e-12);
  EXPECT_LT((oracle::to_eigen(step.state) - mpsi.normalized()).norm(), 1e-12);
}

TEST(Pite, ApproximateStepConvergesQuadratically) {
  std::mt19937_64 rng(32);
  const Eigen::MatrixXcd h = oracle::random_nonnegative_hermitian(8, rng);
  const DenseHamiltonian op(h);
  const Eigen::VectorXcd psi = oracle::random_state(8, rng);
  std::vector<double> dts, errs;
  for (double dtau : {0.1, 0.05, 0.025, 0.0125}) {
    const PiteParams p = params(dtau, 1, PiteMode::kApproximate);
    const StateVector with = add_qubit(oracle::to_state(psi), "pite", RegisterKind::kPiteAncilla);
    const PiteStep approx = pite_step_approx(with, op, p);
    const StateVector a = drop_qubit(approx.state, 3);
    const PiteStep exact = pite_step_exact(oracle::to_state(psi), op, p);
    dts.push_back(dtau);
    errs.push_back((oracle::to_eigen(a) - oracle::to_eigen(exact.state)).norm());
  }
  const double slope = oracle::log_log_slope(dts, errs);
  EXPECT_GT(slope, 1.8);
  EXPECT_LT(slope, 2.2);
}

TEST(Pite, ApproximateStepAtZeroDtauSucceedsWithProbabilityMZeroSquared) {
  std::mt19937_64 rng(33);
  const DenseHamiltonian op(oracle::random_hermitian(4, rng));
  const Eigen::VectorXcd psi = oracle::random_state(4, rng);
  for (double m0 : {0.99, 0.5}) {
    PiteParams p = params(0.0, 1, PiteMode::kApproximate);
    p.m0 = m0;
    const PiteStep s =
        pite_step_approx(add_qubit(oracle::to_state(psi), "pite", RegisterKind::kPiteAncilla), op, p);
    EXPECT_NEAR(s.probability, m0 * m0, 1e-14);
  }
}

TEST(Pite, ApproximateStepNeedsCleanAncilla) {
  std::mt19937_64 rng(34);
  const DenseHamiltonian op(oracle::random_hermitian(4, rng));
  StateVector s = add_qubit(oracle::to_state(oracle::random_state(4, rng)), "pite",
                            RegisterKind::kPiteAncilla);
  apply_single_qubit(s, 2, gates::hadamard());
  EXPECT_THROW(pite_step_approx(s, op, params(0.01, 1, PiteMode::kApproximate)), ParameterError);
  EXPECT_THROW(pite_step_approx(oracle::to_state(oracle::random_state(4, rng)), op,
                                params(0.01, 1, PiteMode::kApproximate)),
               LayoutError);
}

TEST(Pite, CumulativeProbabilityIsNormOfOperatorPower) {
  std::mt19937_64 rng(35);
  const Eigen::MatrixXcd h = oracle::random_nonnegative_hermitian(8, rng);
  const DenseHamiltonian op(h);
  const Eigen::VectorXcd psi = oracle::random_state(8, rng);
  const PiteParams p = params(0.05, 30);
  const PiteTrajectory t = run_pite(oracle::to_state(psi), op, p);
  const Eigen::MatrixXcd m = p.m0 * oracle::expm_imaginary_time(h, p.dtau);
  Eigen::VectorXcd v = psi;
  for (int j = 0; j < p.steps; ++j) {
    v = m * v;
    EXPECT_NEAR(t.cumulative_probability[j], v.squaredNorm(), 1e-12);
  }
  EXPECT_LT((oracle::to_eigen(*t.final_state) - v.normalized()).norm(), 1e-11);
}

TEST(Pite, EigenstateInputDecaysAtItsEnergy) {
  std::mt19937_64 rng(36);
  const Eigen::MatrixXcd h = oracle::random_nonnegative_hermitian(8, rng);
  const DenseHamiltonian op(h);
  const Eigen::VectorXcd gs = op.spectrum().vectors.col(0);
  const double mu = op.spectrum().values(0);
  const PiteParams p = params(0.02, 10);
  const PiteTrajectory t = run_pite(oracle::to_state(gs), op, p, {gs});
  for (int j = 1; j <= p.steps; ++j) {
    EXPECT_NEAR(t.cumulative_probability[j - 1],
                std::pow(p.m0, 2 * j) * std::exp(-2 * j * mu * p.dtau), 1e-12);
    EXPECT_NEAR(t.infidelity[j - 1], 0.0, 1e-12);
    EXPECT_NEAR(t.overlap_weighted_probability[j - 1], std::pow(p.m0, j), 1e-12);
  }
}

TEST(Pite, InfidelityDecreasesTowardGroundState) {
  std::mt19937_64 rng(37);
  const Eigen::MatrixXcd h = oracle::random_nonnegative_hermitian(8, rng);
  const DenseHamiltonian op(h);
  PiteRunOptions opts;
  opts.reference = op.spectrum().vectors.col(0);
  const PiteTrajectory t =
      run_pite(oracle::to_state(oracle::random_state(8, rng)), op, params(0.2, 60), opts);
  for (std::size_t j = 1; j < t.infidelity.size(); ++j) {
    EXPECT_LE(t.infidelity[j], t.infidelity[j - 1] + 1e-14);
  }
  EXPECT_LT(t.infidelity.back(), t.infidelity.front());
}

TEST(Pite, ApproximateModeOnOrbitalFreeOperator) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  std::vector<double> v(cell.num_points());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -std::cos(2 * oracle::kPi * cell.grid_point(i)[0]);
  const OfOperator op(OrbitalFreeHamiltonian{cell, v, 1.0}, 8);
  std::mt19937_64 rng(38);
  const Eigen::VectorXcd psi = oracle::random_state(64, rng);
  const PiteParams pa = params(0.001, 5, PiteMode::kApproximate);
  const PiteTrajectory split = run_pite(oracle::to_density_state(cell, psi), op, pa);
  const DenseHamiltonian dense_op(op.dense_matrix());
  const PiteTrajectory exact_rte = run_pite(oracle::to_density_state(cell, psi), dense_op, pa);
  EXPECT_EQ(split.final_state->num_qubits(), 6);
  // Only the Trotterization of the branch evolutions differs.
  EXPECT_LT((oracle::to_eigen(*split.final_state) - oracle::to_eigen(*exact_rte.final_state)).norm(),
            1e-3);
  EXPECT_NEAR(split.cumulative_probability.back(), exact_rte.cumulative_probability.back(), 1e-3);
}

TEST(Pite, TrajectoryCsv) {
  std::mt19937_64 rng(39);
  const DenseHamiltonian op(oracle::random_hermitian(4, rng));
  PiteRunOptions opts;
  opts.reference = op.spectrum().vectors.col(0);
  const PiteTrajectory t = run_pite(oracle::to_state(oracle::random_state(4, rng)), op,
                                    params(0.1, 3), opts);
  const auto dir = oracle::scratch_dir("pite_csv");
  write_trajectory_csv(dir / "t.csv", t);
  std::ifstream is(dir / "t.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "step,step_probability,cumulative_probability,infidelity");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
