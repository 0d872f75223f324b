#include "qofdft/qpe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "qofdft/dense.hpp"
#include "qofdft/errors.hpp"

namespace qofdft {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinPosteriorMass = 1e-300;

void check_outcome(int m) {
  if (m != 0 && m != 1) throw ParameterError("QPE outcome must be 0 or 1");
}

void check_k(int k) {
  if (k < 1) throw ParameterError("QPE repetition count k must be at least 1");
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw ParameterError("posterior grid needs at least two points");
  if (!(hi > lo)) throw ParameterError("posterior interval must have positive width");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * i / (n - 1);
  return x;
}

/// Sums in index order so identical inputs give identical posteriors.
double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

double outcome_probability(double mu, int k, double beta, int m, double dt) {
  check_outcome(m);
  return 0.5 * (1.0 + std::cos(k * mu * dt + beta - m * kPi));
}

StateVector qpe_circuit(const StateVector& state, const HamiltonianOperator& h,
                        int k, double beta, double dt) {
  check_k(k);
  if (h.num_qubits() > state.num_qubits()) {
    throw LayoutError("Hamiltonian acts on more qubits than the state holds");
  }
  StateVector s = add_qubit(state, "qpe_ancilla", RegisterKind::kQpeAncilla);
  const int anc = s.num_qubits() - 1;
  apply_single_qubit(s, anc, gates::hadamard());
  const cplx phase = std::polar(1.0, beta);
  apply_controlled(s, anc, 1, Subroutine{[&](StateVector& branch) {
                     for (int r = 0; r < k; ++r) h.evolve(branch, -dt);
                     for (auto& a : branch.amplitudes()) a *= phase;
                   }});
  apply_single_qubit(s, anc, gates::hadamard());
  return s;
}

double circuit_outcome_probability(const StateVector& state,
                                   const HamiltonianOperator& h, int k,
                                   double beta, int m, double dt) {
  check_outcome(m);
  const StateVector s = qpe_circuit(state, h, k, beta, dt);
  const double p1 = probability_one(s, s.num_qubits() - 1) / s.norm2();
  return m == 1 ? p1 : 1.0 - p1;
}

int sample_outcome(const StateVector& state, const HamiltonianOperator& h, int k,
                   double beta, double dt, std::mt19937_64& rng) {
  StateVector s = qpe_circuit(state, h, k, beta, dt);
  return sample_measurement(s, s.num_qubits() - 1, rng).outcome;
}

Posterior Posterior::uniform(double lower, double upper, int points) {
  std::vector<double> mu = linspace(lower, upper, points);
  std::vector<double> w(mu.size(), 1.0);
  return Posterior(std::move(mu), std::move(w));
}

Posterior Posterior::gaussian(double lower, double upper, double mean,
                              double stddev, int points) {
  if (!(stddev > 0.0)) throw ParameterError("gaussian prior needs a positive std");
  std::vector<double> mu = linspace(lower, upper, points);
  std::vector<double> w(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double z = (mu[i] - mean) / stddev;
    w[i] = std::exp(-0.5 * z * z);
  }
  return Posterior(std::move(mu), std::move(w));
}

Posterior::Posterior(std::vector<double> candidates, std::vector<double> weights)
    : mu_(std::move(candidates)), w_(std::move(weights)) {
  if (mu_.empty() || mu_.size() != w_.size()) {
    throw ParameterError("posterior candidates and weights must match and be non-empty");
  }
  for (double w : w_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ParameterError("posterior weights must be non-negative and finite");
    }
  }
  const double total = ordered_sum(w_);
  if (!(total >= kMinPosteriorMass)) {
    throw CollapseError("posterior has no weight");
  }
  for (double& w : w_) w /= total;
}

double Posterior::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) s += w_[i] * mu_[i];
  return s;
}

double Posterior::stddev() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    const double d = mu_[i] - m;
    s += w_[i] * d * d;
  }
  return std::sqrt(s);
}

Posterior bayesian_update(const Posterior& prior, int m, int k, double beta,
                          double dt) {
  check_outcome(m);
  check_k(k);
  std::vector<double> w = prior.weights();
  const auto& mu = prior.candidates();
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] *= outcome_probability(mu[i], k, beta, m, dt);
  }
  if (!(ordered_sum(w) >= kMinPosteriorMass)) {
    throw CollapseError("posterior weight underflowed; the prior excluded the eigenvalue");
  }
  return Posterior(mu, std::move(w));
}

void QpeConfig::validate() const {
  if (dt && !(*dt > 0.0 && std::isfinite(*dt))) {
    throw ParameterError("QPE dt must be positive");
  }
  if (prior_lower.has_value() != prior_upper.has_value()) {
    throw ParameterError("QPE prior interval needs both bounds");
  }
  if (prior_lower && !(*prior_upper > *prior_lower)) {
    throw ParameterError("QPE prior interval must have positive width");
  }
  if (prior_mean.has_value() != prior_stddev.has_value()) {
    throw ParameterError("gaussian QPE prior needs both mean and stddev");
  }
  if (prior_stddev && !(*prior_stddev > 0.0)) {
    throw ParameterError("gaussian QPE prior stddev must be positive");
  }
  if (samples < 0) throw ParameterError("QPE sample budget must be non-negative");
  if (target_stddev < 0.0) throw ParameterError("QPE target std must be non-negative");
  if (grid_points < 2) throw ParameterError("QPE grid needs at least two points");
  if (max_k < 1) throw ParameterError("QPE max_k must be at least 1");
}

QpeResult estimate_ground_energy(const StateVector& state,
                                 const HamiltonianOperator& h,
                                 const QpeConfig& config, std::mt19937_64& rng) {
  config.validate();
  std::optional<SpectralBounds> gersh;
  if (h.dimension() <= dense::kMaxDenseDimension) {
    gersh = gershgorin_bounds(h.dense_matrix());
  }

  double lo = 0.0;
  double hi = 0.0;
  if (config.prior_lower) {
    lo = *config.prior_lower;
    hi = *config.prior_upper;
    if (gersh && (lo > gersh->lower || hi < gersh->upper)) {
      throw ParameterError("QPE prior interval does not contain the Gershgorin bounds");
    }
  } else {
    const SpectralBounds b = gersh ? *gersh : h.bounds();
    const double pad =
        std::max(1e-3 * b.width(),
                 1e-6 * std::max(1.0, std::max(std::abs(b.lower), std::abs(b.upper))));
    lo = b.lower - pad;
    hi = b.upper + pad;
  }
  const double width = hi - lo;
  const double dt = config.dt ? *config.dt : kPi / width;
  if (dt * width > 2.0 * kPi) {
    throw ParameterError("QPE dt maps the prior interval beyond one 2 pi phase window");
  }

  Posterior post = config.prior_mean
                       ? Posterior::gaussian(lo, hi, *config.prior_mean,
                                             *config.prior_stddev, config.grid_points)
                       : Posterior::uniform(lo, hi, config.grid_points);

  QpeResult result;
  result.dt = dt;
  result.prior_lower = lo;
  result.prior_upper = hi;
  double mean = post.mean();
  double sigma = post.stddev();
  for (int s = 0; s < config.samples; ++s) {
    if (config.target_stddev > 0.0 && sigma < config.target_stddev) break;
    int k = 1;
    while (2 * k <= config.max_k && 2.0 * k * dt * sigma <= kPi / 6.0) k *= 2;
    const double beta = kPi / 2.0 - k * mean * dt;
    const int m = sample_outcome(state, h, k, beta, dt, rng);
    post = bayesian_update(post, m, k, beta, dt);
    mean = post.mean();
    sigma = post.stddev();
    result.transcript.push_back({s + 1, k, beta, m, mean, sigma});
    ++result.samples_used;
  }
  result.mean = mean;
  result.stddev = sigma;
  result.partial = result.samples_used == 0 ||
                   (config.target_stddev > 0.0 && sigma >= config.target_stddev);
  return result;
}

void write_transcript_csv(const std::filesystem::path& path, const QpeResult& result) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "sample,k,beta,m,posterior_mean,posterior_std\n";
  char buf[160];
  for (const QpeRecord& r : result.transcript) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%d,%.17g,%.17g\n", r.sample, r.k,
                  r.beta, r.m, r.mean, r.stddev);
    os << buf;
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace qofdft
