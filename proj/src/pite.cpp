#include "qofdft/pite.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "qofdft/dense.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/rte.hpp"

namespace qofdft {

namespace {

constexpr double kMinStepProbability = 1e-300;
constexpr double kNormTolerance = 1e-10;

void check_normalized(const StateVector& state) {
  const double n2 = state.norm2();
  if (!(std::abs(n2 - 1.0) <= kNormTolerance)) {
    throw ParameterError("PITE input state is not normalized (norm^2 = " +
                         std::to_string(n2) + ")");
  }
}

void check_h_register(const StateVector& state, const HamiltonianOperator& h) {
  if (h.num_qubits() > state.num_qubits()) {
    throw LayoutError("Hamiltonian acts on more qubits than the state holds");
  }
}

PiteStep finish_step(StateVector next) {
  const double p = next.norm2();
  if (!(p >= kMinStepProbability)) {
    throw CollapseError("PITE success probability vanished (" +
                        std::to_string(p) + ")");
  }
  next.normalize();
  return {p, std::move(next)};
}

int ancilla_qubit(const StateVector& state) {
  const Register* anc = state.layout().find_if(RegisterKind::kPiteAncilla);
  if (anc == nullptr || anc->qubits.width != 1) {
    throw LayoutError("state has no single-qubit PITE ancilla register");
  }
  return anc->qubits.offset;
}

StateVector density_part(const StateVector& state) {
  const Register* anc = state.layout().find_if(RegisterKind::kPiteAncilla);
  if (anc == nullptr) return state;
  return drop_qubit(state, anc->qubits.offset);
}

}  // namespace

void PiteParams::validate() const {
  if (!(m0 > 0.0 && m0 < 1.0)) {
    throw ParameterError("PITE m0 must lie in (0, 1), got " + std::to_string(m0));
  }
  // Any spelling of 1/sqrt(2) lands within a few ulps of the constant.
  if (std::abs(m0 - std::numbers::sqrt2 / 2.0) <= 1e-15) {
    throw ParameterError("PITE m0 must differ from 1/sqrt(2)");
  }
  if (!(dtau >= 0.0) || !std::isfinite(dtau)) {
    throw ParameterError("PITE dtau must be a non-negative finite value");
  }
  if (steps < 1) throw ParameterError("PITE steps must be positive");
}

int PiteParams::kappa() const { return m0 > std::numbers::sqrt2 / 2.0 ? 1 : -1; }

double PiteParams::s1() const { return m0 / std::sqrt(1.0 - m0 * m0); }

double PiteParams::theta0() const {
  const double c = (m0 + std::sqrt(1.0 - m0 * m0)) / std::numbers::sqrt2;
  return kappa() * std::acos(std::min(c, 1.0));
}

Eigen::MatrixXcd pite_operator(const DenseSpectrum& spectrum,
                               const PiteParams& params) {
  params.validate();
  const Eigen::VectorXd decay =
      (params.m0 * (-params.dtau * spectrum.values.array()).exp()).matrix();
  if (!decay.allFinite()) throw NumericalError("PITE operator overflowed");
  return spectrum.vectors * decay.asDiagonal() * spectrum.vectors.adjoint();
}

PiteStep pite_step_exact(const StateVector& state, const Eigen::MatrixXcd& m) {
  check_normalized(state);
  const auto rows = static_cast<std::size_t>(m.rows());
  if (!std::has_single_bit(rows) || m.cols() != m.rows()) {
    throw LayoutError("PITE operator must be square with power-of-two size");
  }
  const int n = std::countr_zero(rows);
  if (n > state.num_qubits()) {
    throw LayoutError("PITE operator acts on more qubits than the state holds");
  }
  StateVector next = state;
  apply_matrix(next, QubitRange{0, n}, m);
  return finish_step(std::move(next));
}

PiteStep pite_step_exact(const StateVector& state, const HamiltonianOperator& h,
                         const PiteParams& params) {
  params.validate();
  check_h_register(state, h);
  if (h.dimension() <= dense::kMaxDenseDimension) {
    return pite_step_exact(state, pite_operator(diagonalize(h.dense_matrix()), params));
  }
  const auto* of = dynamic_cast<const OfOperator*>(&h);
  if (of == nullptr) {
    throw ParameterError("exact PITE above dimension 2^13 needs a split Hamiltonian");
  }
  check_normalized(state);
  StateVector next = state;
  imaginary_trotter_step(next, of->hamiltonian(), params.dtau);
  for (auto& a : next.amplitudes()) a *= params.m0;
  return finish_step(std::move(next));
}

PiteStep pite_step_approx(const StateVector& state_with_ancilla,
                          const HamiltonianOperator& h, const PiteParams& params) {
  params.validate();
  check_normalized(state_with_ancilla);
  check_h_register(state_with_ancilla, h);
  const int anc = ancilla_qubit(state_with_ancilla);
  if (anc < h.num_qubits()) {
    throw LayoutError("PITE ancilla overlaps the Hamiltonian register");
  }
  if (probability_one(state_with_ancilla, anc) > kNormTolerance) {
    throw ParameterError("PITE ancilla is not in |0>");
  }

  StateVector s = state_with_ancilla;
  apply_single_qubit(s, anc, gates::hadamard());
  apply_single_qubit(s, anc, gates::pite_w());

  const double t = params.s1() * params.dtau;
  const cplx phase = std::polar(1.0, params.theta0());
  apply_controlled(s, anc, 0, Subroutine{[&](StateVector& branch) {
                     h.evolve(branch, t);
                     for (auto& a : branch.amplitudes()) a *= phase;
                   }});
  apply_controlled(s, anc, 1, Subroutine{[&](StateVector& branch) {
                     h.evolve(branch, -t);
                     for (auto& a : branch.amplitudes()) a *= std::conj(phase);
                   }});
  apply_single_qubit(s, anc, gates::pite_w().adjoint());

  double p = 0.0;
  try {
    p = postselect(s, anc, 0);
  } catch (const PostSelectionError& e) {
    throw CollapseError(std::string("PITE ancilla post-selection failed: ") + e.what());
  }
  return {p, std::move(s)};
}

double infidelity(const StateVector& a, const StateVector& b) {
  const double f = std::norm(overlap(a, b));
  return std::clamp(1.0 - f, 0.0, 1.0);
}

double infidelity(const StateVector& a, const Eigen::VectorXcd& b) {
  if (static_cast<std::size_t>(b.size()) != a.dimension()) {
    throw LayoutError("reference state dimension does not match");
  }
  const double f = std::norm(b.dot(a.as_eigen()));
  return std::clamp(1.0 - f, 0.0, 1.0);
}

PiteTrajectory run_pite(const StateVector& state, const HamiltonianOperator& h,
                        const PiteParams& params, const PiteRunOptions& options) {
  params.validate();
  check_h_register(state, h);
  PiteTrajectory traj;

  std::optional<Eigen::MatrixXcd> m;
  StateVector current = state;
  if (params.mode == PiteMode::kExact) {
    if (options.spectrum != nullptr) {
      m = pite_operator(*options.spectrum, params);
    } else if (h.dimension() <= dense::kMaxDenseDimension) {
      m = pite_operator(diagonalize(h.dense_matrix()), params);
    }
  } else if (state.layout().find_if(RegisterKind::kPiteAncilla) == nullptr) {
    current = add_qubit(state, "pite_ancilla", RegisterKind::kPiteAncilla);
  }

  double cumulative = 1.0;
  double m0_power = 1.0;
  for (int j = 1; j <= params.steps; ++j) {
    PiteStep step = params.mode == PiteMode::kApproximate
                        ? pite_step_approx(current, h, params)
                    : m ? pite_step_exact(current, *m)
                        : pite_step_exact(current, h, params);
    current = std::move(step.state);
    cumulative *= step.probability;
    m0_power *= params.m0;
    traj.step_probability.push_back(step.probability);
    traj.cumulative_probability.push_back(cumulative);
    if (options.reference || options.keep_snapshots) {
      StateVector density = density_part(current);
      if (options.reference) {
        const double inf = infidelity(density, *options.reference);
        traj.infidelity.push_back(inf);
        traj.overlap_weighted_probability.push_back(m0_power * (1.0 - inf));
      }
      if (options.keep_snapshots) traj.snapshots.push_back(std::move(density));
    }
  }
  traj.final_state = density_part(current);
  return traj;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const PiteTrajectory& trajectory) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "step,step_probability,cumulative_probability,infidelity\n";
  char buf[128];
  for (std::size_t j = 0; j < trajectory.step_probability.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,", j + 1,
                  trajectory.step_probability[j],
                  trajectory.cumulative_probability[j]);
    os << buf;
    if (j < trajectory.infidelity.size()) {
      std::snprintf(buf, sizeof buf, "%.17g", trajectory.infidelity[j]);
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace qofdft
