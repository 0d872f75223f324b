#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "qofdft/hamiltonian.hpp"
#include "qofdft/qsim.hpp"

namespace qofdft {

/// p(m | mu, k, beta) = (1 + cos(k mu dt + beta - m pi)) / 2.
double outcome_probability(double mu, int k, double beta, int m, double dt);

/// Single-ancilla phase-estimation circuit: Hadamard on a fresh ancilla,
/// exp(i beta) (exp(+i H dt))^k on the ancilla-1 branch, Hadamard. For an
/// eigenstate with eigenvalue mu the ancilla reads 0 with probability
/// outcome_probability(mu, k, beta, 0, dt). The ancilla is the new top qubit.
StateVector qpe_circuit(const StateVector& state, const HamiltonianOperator& h,
                        int k, double beta, double dt);

/// Probability of ancilla outcome m, from the simulated circuit (no sampling).
double circuit_outcome_probability(const StateVector& state,
                                   const HamiltonianOperator& h, int k,
                                   double beta, int m, double dt);

/// Runs the circuit and samples the ancilla.
int sample_outcome(const StateVector& state, const HamiltonianOperator& h, int k,
                   double beta, double dt, std::mt19937_64& rng);

/// Discretized posterior over candidate eigenvalues.
class Posterior {
 public:
  /// Uniform weights on `points` equally spaced candidates in [lower, upper].
  static Posterior uniform(double lower, double upper, int points = 4096);
  /// Gaussian weights on the same kind of grid.
  static Posterior gaussian(double lower, double upper, double mean, double stddev,
                            int points = 4096);
  /// Arbitrary candidates and non-negative weights (renormalized).
  Posterior(std::vector<double> candidates, std::vector<double> weights);

  const std::vector<double>& candidates() const { return mu_; }
  const std::vector<double>& weights() const { return w_; }
  double mean() const;
  double stddev() const;
  double lower() const { return mu_.front(); }
  double upper() const { return mu_.back(); }

 private:
  std::vector<double> mu_;
  std::vector<double> w_;
};

/// Multiplies the weights by the outcome likelihood and renormalizes. Throws
/// CollapseError when the total weight underflows (below 1e-300).
Posterior bayesian_update(const Posterior& prior, int m, int k, double beta,
                          double dt);

struct QpeConfig {
  /// Base time; absent means pi / (prior width).
  std::optional<double> dt;
  /// Prior interval; absent means the padded Gershgorin (or operator) bounds.
  std::optional<double> prior_lower;
  std::optional<double> prior_upper;
  /// Gaussian prior on the interval instead of a uniform one.
  std::optional<double> prior_mean;
  std::optional<double> prior_stddev;
  int samples = 1000;
  /// Stop early once the posterior std drops below this value (0 = never).
  double target_stddev = 0.0;
  int grid_points = 4096;
  /// Upper bound on the repetition count k.
  int max_k = 256;

  void validate() const;
};

struct QpeRecord {
  int sample = 0;
  int k = 1;
  double beta = 0.0;
  int m = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct QpeResult {
  double mean = 0.0;
  double stddev = 0.0;
  int samples_used = 0;
  double dt = 0.0;
  double prior_lower = 0.0;
  double prior_upper = 0.0;
  /// True when the budget ran out with the posterior std above the target,
  /// or when no sample was taken.
  bool partial = false;
  std::vector<QpeRecord> transcript;
};

/// Sequential Bayesian estimate of the lowest eigenvalue seen by `state`.
/// Schedule: k is the largest power of two with k dt sigma <= pi/6 (at least
/// 1, at most max_k), beta = pi/2 - k mean dt.
QpeResult estimate_ground_energy(const StateVector& state,
                                 const HamiltonianOperator& h,
                                 const QpeConfig& config, std::mt19937_64& rng);

/// CSV with header sample,k,beta,m,posterior_mean,posterior_std.
void write_transcript_csv(const std::filesystem::path& path, const QpeResult& result);

}  // namespace qofdft
