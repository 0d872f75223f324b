#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/qpe.hpp"

using namespace qofdft;

TEST(Likelihood, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(outcome_probability(0.0, 1, 0.0, 0, 1.0), 1.0);
  EXPECT_NEAR(outcome_probability(0.0, 1, 0.0, 1, 1.0), 0.0, 1e-16);
  EXPECT_NEAR(outcome_probability(0.0, 1, oracle::kPi / 2, 0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(outcome_probability(1.0, 2, 0.0, 1, oracle::kPi / 2), 1.0, 1e-15);
  for (double mu : {-1.3, 0.2, 4.0}) {
    EXPECT_NEAR(outcome_probability(mu, 3, 0.4, 0, 0.1) + outcome_probability(mu, 3, 0.4, 1, 0.1),
                1.0, 1e-15);
  }
  EXPECT_THROW(outcome_probability(0.0, 1, 0.0, 2, 1.0), ParameterError);
}

TEST(Circuit, EigenstateOutcomeMatchesLikelihood) {
  std::mt19937_64 rng(41);
  const DenseHamiltonian h(oracle::random_hermitian(8, rng));
  const double dt = 0.37;
  for (int e : {0, 3, 7}) {
    const Eigen::VectorXcd v = h.spectrum().vectors.col(e);
    const double mu = h.spectrum().values(e);
    for (int k : {1, 2, 8}) {
      for (double beta : {0.0, 0.9, -2.1}) {
        for (int m : {0, 1}) {
          EXPECT_NEAR(circuit_outcome_probability(oracle::to_state(v), h, k, beta, m, dt),
                      outcome_probability(mu, k, beta, m, dt), 1e-10);
        }
      }
    }
  }
}

TEST(Circuit, MixedInputAveragesLikelihoods) {
  std::mt19937_64 rng(42);
  const DenseHamiltonian h(oracle::random_hermitian(4, rng));
  const Eigen::VectorXcd psi = oracle::random_state(4, rng);
  const Eigen::VectorXcd c = h.spectrum().vectors.adjoint() * psi;
  double expected = 0.0;
  for (int j = 0; j < 4; ++j) {
    expected += std::norm(c(j)) * outcome_probability(h.spectrum().values(j), 3, 0.5, 1, 0.2);
  }
  EXPECT_NEAR(circuit_outcome_probability(oracle::to_state(psi), h, 3, 0.5, 1, 0.2), expected,
              1e-12);
}

TEST(Posterior, UniformAndGaussianMoments) {
  const Posterior u = Posterior::uniform(-1.0, 3.0, 4001);
  EXPECT_NEAR(u.mean(), 1.0, 1e-12);
  EXPECT_NEAR(u.stddev(), 4.0 / std::sqrt(12.0), 1e-3);
  const Posterior g = Posterior::gaussian(-10.0, 10.0, 0.5, 0.7, 8001);
  EXPECT_NEAR(g.mean(), 0.5, 1e-10);
  EXPECT_NEAR(g.stddev(), 0.7, 1e-6);
  EXPECT_THROW(Posterior::uniform(1.0, 1.0, 10), ParameterError);
}

TEST(Posterior, UpdateIsBayesRule) {
  const Posterior prior({0.0, 1.0, 2.0}, {1.0, 1.0, 2.0});
  const double dt = 0.5;
  const Posterior post = bayesian_update(prior, 1, 2, 0.3, dt);
  std::vector<double> w(3);
  double z = 0.0;
  for (int i = 0; i < 3; ++i) {
    w[i] = prior.weights()[i] * outcome_probability(i, 2, 0.3, 1, dt);
    z += w[i];
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(post.weights()[i], w[i] / z, 1e-15);
  const Posterior point({0.0}, {1.0});
  EXPECT_THROW(bayesian_update(point, 1, 1, 0.0, 1.0), CollapseError);
}

TEST(Estimate, RecoversGroundEnergy) {
  std::mt19937_64 rng(43);
  const DenseHamiltonian h(oracle::random_hermitian(8, rng));
  const Eigen::VectorXcd gs = h.spectrum().vectors.col(0);
  const SpectralBounds b = gershgorin_bounds(h.dense_matrix());
  std::mt19937_64 sampler(1);
  QpeConfig cfg;
  cfg.samples = 600;
  const QpeResult r = estimate_ground_energy(oracle::to_state(gs), h, cfg, sampler);
  EXPECT_FALSE(r.partial);
  EXPECT_EQ(r.samples_used, 600);
  EXPECT_NEAR(r.mean, h.spectrum().values(0), 1e-3 * b.width());
  EXPECT_LE(r.prior_lower, b.lower);
  EXPECT_GE(r.prior_upper, b.upper);
  EXPECT_NEAR(r.dt, oracle::kPi / (r.prior_upper - r.prior_lower), 1e-15);
  for (const QpeRecord& rec : r.transcript) {
    EXPECT_GE(rec.k, 1);
    EXPECT_LE(rec.k, cfg.max_k);
    EXPECT_EQ(rec.k & (rec.k - 1), 0);
  }
}

TEST(Estimate, DeterministicForSeed) {
  std::mt19937_64 rng(44);
  const DenseHamiltonian h(oracle::random_hermitian(4, rng));
  const StateVector s = oracle::to_state(h.spectrum().vectors.col(0));
  QpeConfig cfg;
  cfg.samples = 50;
  std::mt19937_64 a(9), b(9);
  const QpeResult ra = estimate_ground_energy(s, h, cfg, a);
  const QpeResult rb = estimate_ground_energy(s, h, cfg, b);
  EXPECT_EQ(ra.mean, rb.mean);
  EXPECT_EQ(ra.transcript.size(), rb.transcript.size());
}

TEST(Estimate, TargetStopsEarlyOrFlagsPartial) {
  std::mt19937_64 rng(45);
  const DenseHamiltonian h(oracle::random_hermitian(4, rng));
  const StateVector s = oracle::to_state(h.spectrum().vectors.col(0));
  QpeConfig cfg;
  cfg.samples = 1000;
  cfg.target_stddev = 1e-2;
  std::mt19937_64 sampler(2);
  const QpeResult r = estimate_ground_energy(s, h, cfg, sampler);
  EXPECT_FALSE(r.partial);
  EXPECT_LT(r.samples_used, 1000);
  EXPECT_LT(r.stddev, 1e-2);

  cfg.samples = 2;
  cfg.target_stddev = 1e-9;
  std::mt19937_64 sampler2(2);
  EXPECT_TRUE(estimate_ground_energy(s, h, cfg, sampler2).partial);
}

TEST(Estimate, PriorMustCoverSpectrumBounds) {
  std::mt19937_64 rng(46);
  const DenseHamiltonian h(oracle::random_hermitian(4, rng));
  const StateVector s = oracle::to_state(h.spectrum().vectors.col(0));
  QpeConfig cfg;
  cfg.prior_lower = h.spectrum().values(0) + 0.1;
  cfg.prior_upper = h.spectrum().values(3);
  std::mt19937_64 sampler(3);
  EXPECT_THROW(estimate_ground_energy(s, h, cfg, sampler), ParameterError);

  QpeConfig wide;
  wide.dt = 100.0;
  EXPECT_THROW(estimate_ground_energy(s, h, wide, sampler), ParameterError);
}

TEST(Estimate, TranscriptCsv) {
  std::mt19937_64 rng(47);
  const DenseHamiltonian h(oracle::random_hermitian(4, rng));
  QpeConfig cfg;
  cfg.samples = 5;
  std::mt19937_64 sampler(4);
  const QpeResult r =
      estimate_ground_energy(oracle::to_state(h.spectrum().vectors.col(0)), h, cfg, sampler);
  const auto dir = oracle::scratch_dir("qpe_csv");
  write_transcript_csv(dir / "q.csv", r);
  std::ifstream is(dir / "q.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "sample,k,beta,m,posterior_mean,posterior_std");
}
