#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/oracle.hpp"
#include "qofdft/scf.hpp"

using namespace qofdft;

namespace {

std::vector<double> well(const SimulationCell& cell, double depth) {
  ExternalPotentialSpec spec;
  spec.wells.push_back({{0.5, 0.5, 0.5}, depth, 0.2});
  return external_potential(spec, cell);
}

}  // namespace

TEST(Encoding, RoundTrip) {
  const SimulationCell cell = oracle::fcc_cell(2.0, 2);
  const DensityGrid rho = oracle::smooth_density(cell, 3.0);
  const StateVector s = encode_density(rho);
  EXPECT_NEAR(s.norm2(), 1.0, 1e-14);
  EXPECT_NEAR(std::norm(s[5]), cell.weight() * rho.values[5] / 3.0, 1e-15);
  const DensityGrid back = decode_density(s, 3.0, cell);
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    EXPECT_NEAR(back.values[i], rho.values[i], 1e-13);
  }
  EXPECT_NEAR(back.integral(), 3.0, 1e-13);
}

TEST(Encoding, RejectsInvalidDensities) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 1);
  DensityGrid rho = DensityGrid::uniform(cell, 2.0);
  rho.values[0] = -0.1;
  EXPECT_THROW(encode_density(rho), DomainError);
  DensityGrid off = DensityGrid::uniform(cell, 2.0);
  off.values[0] *= 2;
  EXPECT_THROW(encode_density(off), ParameterError);
}

TEST(Encoding, DecodeDropsDefiniteAncillasOnly) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 1);
  const DensityGrid rho = oracle::smooth_density(cell, 2.0);
  StateVector s = add_qubit(encode_density(rho), "pite", RegisterKind::kPiteAncilla);
  const DensityGrid back = decode_density(s, 2.0, cell);
  EXPECT_NEAR(back.values[3], rho.values[3], 1e-13);
  apply_controlled(s, 0, 1, DenseUnitary{{3, 1}, gates::pauli_x()});
  EXPECT_THROW(decode_density(s, 2.0, cell), ReadoutError);
}

TEST(Mixing, LinearStep) {
  const std::vector<std::vector<double>> in{{1.0, 2.0}};
  const std::vector<std::vector<double>> out{{3.0, 0.0}};
  const std::vector<double> x = mix_vectors(in, out, {MixingScheme::kLinear, 0.25, 8});
  EXPECT_DOUBLE_EQ(x[0], 1.5);
  EXPECT_DOUBLE_EQ(x[1], 1.5);
}

TEST(Mixing, BroydenSolvesLinearFixedPoint) {
  // g(x) = A x + b with a contraction A; the fixed point solves (I - A) x = b.
  Eigen::Matrix3d a;
  a << 0.5, 0.2, 0.0, 0.1, 0.3, 0.1, 0.0, 0.2, 0.6;
  const Eigen::Vector3d b(1.0, -2.0, 0.5);
  const Eigen::Vector3d fixed = (Eigen::Matrix3d::Identity() - a).lu().solve(b);
  std::vector<std::vector<double>> ins, outs;
  std::vector<double> x{0.0, 0.0, 0.0};
  const MixingConfig cfg{MixingScheme::kBroyden, 0.5, 8};
  for (int it = 0; it < 12; ++it) {
    const Eigen::Vector3d xv(x[0], x[1], x[2]);
    const Eigen::Vector3d g = a * xv + b;
    ins.push_back(x);
    outs.push_back({g(0), g(1), g(2)});
    x = mix_vectors(ins, outs, cfg);
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(x[i], fixed(i), 1e-10);
}

TEST(Mixing, ClipsAndRestoresElectronCount) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 1);
  DensityGrid in = DensityGrid::uniform(cell, 2.0);
  DensityGrid out = in;
  out.values[0] = -0.5;
  out.values[1] = 1.0;
  const std::vector<std::pair<DensityGrid, DensityGrid>> hist{{in, out}};
  const DensityGrid mixed = mix_density(hist, {MixingScheme::kLinear, 1.0, 8});
  for (double v : mixed.values) EXPECT_GE(v, 0.0);
  EXPECT_NEAR(mixed.integral(), 2.0, 1e-13);
  EXPECT_EQ(mixed.values[0], 0.0);
}

TEST(Mixing, ResidualNorm) {
  const SimulationCell cell = SimulationCell::cubic(2.0, 1);
  DensityGrid a = DensityGrid::uniform(cell, 1.0);
  DensityGrid b = a;
  b.values[2] += 0.5;
  EXPECT_NEAR(density_residual(a, b), std::sqrt(cell.weight() * 0.25), 1e-15);
}

TEST(Scf, FreeParticleConvergesImmediately) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const std::vector<double> vext(cell.num_points(), 0.0);
  const ScfTrace t = scf_loop(DensityGrid::uniform(cell, 2.0), FunctionalSet{}, vext, ScfConfig{});
  ASSERT_TRUE(t.converged());
  EXPECT_EQ(t.iterations.size(), 1u);
  EXPECT_LT(t.iterations[0].residual, 1e-12);
  EXPECT_NEAR(*t.iterations[0].infidelity, 0.0, 1e-12);
}

TEST(Scf, HybridMatchesClassicalOracleOnSmallCell) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const std::vector<double> vext = well(cell, 5.0);
  ScfConfig cfg;
  cfg.threshold = 1e-10;
  cfg.max_iterations = 80;
  const DensityGrid rho0 = DensityGrid::uniform(cell, 2.0);
  const ScfTrace hybrid = scf_loop(rho0, FunctionalSet{}, vext, cfg);
  const ScfTrace classical = classical_scf_oracle(rho0, FunctionalSet{}, vext, cfg);
  ASSERT_TRUE(hybrid.converged());
  ASSERT_TRUE(classical.converged());
  for (std::size_t i = 0; i < cell.num_points(); ++i) {
    EXPECT_NEAR(hybrid.final_density->values[i], classical.final_density->values[i], 1e-7);
  }
  EXPECT_NEAR(hybrid.final_energy.total, classical.final_energy.total, 1e-8);
  for (const ScfIteration& it : classical.iterations) {
    EXPECT_EQ(it.cumulative_success_probability, 1.0);
    EXPECT_FALSE(it.infidelity.has_value());
  }
  for (const ScfIteration& it : hybrid.iterations) {
    EXPECT_GT(it.cumulative_success_probability, 0.0);
    EXPECT_LT(it.cumulative_success_probability, 1.0);
  }
}

TEST(Scf, OracleSolversAgree) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const std::vector<double> vext = well(cell, 20.0);
  ScfConfig cfg;
  cfg.threshold = 1e-9;
  const DensityGrid rho0 = DensityGrid::uniform(cell, 2.0);
  const ScfTrace a = classical_scf_oracle(rho0, FunctionalSet{}, vext, cfg, {OracleSolver::kDense});
  const ScfTrace b =
      classical_scf_oracle(rho0, FunctionalSet{}, vext, cfg, {OracleSolver::kLobpcg});
  ASSERT_TRUE(a.converged());
  ASSERT_EQ(a.iterations.size(), b.iterations.size());
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    EXPECT_NEAR(a.iterations[i].energy, b.iterations[i].energy, 1e-8);
    EXPECT_NEAR(a.iterations[i].residual, b.iterations[i].residual, 1e-8);
  }
}

TEST(Scf, StopsAtIterationCap) {
  const SimulationCell cell = SimulationCell::cubic(1.0, 2);
  const std::vector<double> vext = well(cell, 30.0);
  ScfConfig cfg;
  cfg.max_iterations = 1;
  std::vector<int> seen;
  const ScfTrace t = scf_loop(DensityGrid::uniform(cell, 2.0), FunctionalSet{}, vext, cfg,
                              [&](const ScfIteration& it) { seen.push_back(it.iteration); });
  EXPECT_FALSE(t.converged());
  EXPECT_EQ(t.status, ScfStatus::kMaxIterations);
  EXPECT_EQ(seen, std::vector<int>{1});
  EXPECT_TRUE(t.final_density.has_value());
}

TEST(Scf, ConfigValidation) {
  ScfConfig cfg;
  cfg.threshold = 0.0;
  EXPECT_THROW(cfg.validate(), ParameterError);
  ScfConfig mix;
  mix.mixing.alpha = 0.0;
  EXPECT_THROW(mix.validate(), ParameterError);
}
