#include "qofdft/scf.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "qofdft/dense.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/parallel.hpp"
#include "qofdft/rte.hpp"

namespace qofdft {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return chunked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

/// y += s x
void axpy(double s, std::span<const double> x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

void check_finite(const EnergyBreakdown& e, int iteration) {
  if (!std::isfinite(e.total)) {
    throw NumericalError("non-finite total energy at SCF iteration " +
                         std::to_string(iteration) + " (kinetic " +
                         std::to_string(e.kinetic) + ", external " +
                         std::to_string(e.external) + ", hartree " +
                         std::to_string(e.hartree) + ", xc " +
                         std::to_string(e.xc) + ")");
  }
}

}  // namespace

StateVector encode_density(const DensityGrid& rho) {
  rho.validate();
  const double scale = rho.cell.weight() / rho.electrons;
  std::vector<cplx> amps(rho.values.size());
  for (std::size_t i = 0; i < amps.size(); ++i) {
    amps[i] = std::sqrt(scale * rho.values[i]);
  }
  StateVector state(Layout::density(rho.cell), std::move(amps));
  const double n2 = state.norm2();
  if (std::abs(n2 - 1.0) > 1e-10) {
    throw ParameterError("encoded density has norm^2 " + std::to_string(n2));
  }
  return state;
}

DensityGrid decode_density(const StateVector& state, double electrons,
                           const SimulationCell& cell) {
  if (!(electrons > 0.0)) throw ParameterError("electron count must be positive");
  StateVector s = state;
  while (s.num_qubits() > cell.total_qubits()) {
    s = drop_qubit(s, s.num_qubits() - 1, 1e-10);
  }
  if (!s.layout().matches_cell(cell)) {
    throw LayoutError("state register does not match the cell grid");
  }
  const double n2 = s.norm2();
  if (!(n2 > 0.0)) throw ReadoutError("cannot decode a zero state");
  DensityGrid rho{cell, std::vector<double>(cell.num_points()), electrons};
  const double scale = electrons / (cell.weight() * n2);
  const auto amps = s.amplitudes();
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    rho.values[i] = std::norm(amps[i]) * scale;
  }
  return rho;
}

void MixingConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ParameterError("mixing alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (history < 1) throw ParameterError("Broyden history depth must be at least 1");
}

std::vector<double> mix_vectors(std::span<const std::vector<double>> inputs,
                                std::span<const std::vector<double>> outputs,
                                const MixingConfig& config) {
  config.validate();
  if (inputs.empty() || inputs.size() != outputs.size()) {
    throw ParameterError("mixing needs a non-empty history of (input, output) pairs");
  }
  const std::size_t n = inputs.back().size();
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != n || outputs[k].size() != n) {
      throw LayoutError("mixing history vectors differ in length");
    }
  }
  const std::size_t last = inputs.size() - 1;
  const std::vector<double> f = difference(outputs[last], inputs[last]);
  std::vector<double> next = inputs[last];
  axpy(config.alpha, f, next);
  if (config.scheme == MixingScheme::kLinear || last == 0) return next;

  // Inverse Jacobian H = -alpha I + sum_j u_j v_j^T, updated by
  // Sherman-Morrison for each good-Broyden Jacobian update
  //   J += (dF - J dx) dx^T / (dx^T dx).
  const std::size_t depth = std::min<std::size_t>(config.history, last);
  std::vector<std::vector<double>> us;
  std::vector<std::vector<double>> vs;
  for (std::size_t i = last - depth; i < last; ++i) {
    const std::vector<double> dx = difference(inputs[i + 1], inputs[i]);
    const std::vector<double> df =
        difference(difference(outputs[i + 1], inputs[i + 1]),
                   difference(outputs[i], inputs[i]));
    std::vector<double> h_df(n);
    std::vector<double> ht_dx(n);
    for (std::size_t r = 0; r < n; ++r) {
      h_df[r] = -config.alpha * df[r];
      ht_dx[r] = -config.alpha * dx[r];
    }
    for (std::size_t j = 0; j < us.size(); ++j) {
      axpy(dot(vs[j], df), us[j], h_df);
      axpy(dot(us[j], dx), vs[j], ht_dx);
    }
    const double denom = dot(dx, h_df);
    const double scale = std::sqrt(dot(dx, dx) * dot(h_df, h_df));
    if (!(std::abs(denom) > 1e-14 * scale)) continue;
    std::vector<double> u = difference(dx, h_df);
    for (double& x : u) x /= denom;
    us.push_back(std::move(u));
    vs.push_back(std::move(ht_dx));
  }
  // next = x - H F = x + alpha F - sum_j u_j (v_j . F)
  for (std::size_t j = 0; j < us.size(); ++j) axpy(-dot(vs[j], f), us[j], next);
  return next;
}

DensityGrid mix_density(std::span<const std::pair<DensityGrid, DensityGrid>> history,
                        const MixingConfig& config) {
  if (history.empty()) throw ParameterError("mixing needs a non-empty history");
  std::vector<std::vector<double>> ins;
  std::vector<std::vector<double>> outs;
  ins.reserve(history.size());
  outs.reserve(history.size());
  for (const auto& [in, out] : history) {
    ins.push_back(in.values);
    outs.push_back(out.values);
  }
  const DensityGrid& ref = history.back().first;
  DensityGrid next{ref.cell, mix_vectors(ins, outs, config), ref.electrons};
  for (double& x : next.values) x = std::max(x, 0.0);
  const double total = next.integral();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("mixed density has no positive mass");
  }
  const double scale = next.electrons / total;
  for (double& x : next.values) x *= scale;
  return next;
}

double density_residual(const DensityGrid& a, const DensityGrid& b) {
  if (a.values.size() != b.values.size()) {
    throw LayoutError("residual between densities on different grids");
  }
  const std::vector<double> d = difference(a.values, b.values);
  return std::sqrt(a.cell.weight() * dot(d, d));
}

void ScfConfig::validate() const {
  if (!(threshold > 0.0)) throw ParameterError("SCF threshold must be positive");
  if (max_iterations < 1) throw ParameterError("SCF max_iterations must be positive");
  mixing.validate();
  pite.validate();
}

ScfTrace run_scf(const DensityGrid& rho0, const FunctionalSet& funcs,
                 std::span<const double> v_ext, const ScfConfig& config,
                 const GroundStateStage& stage, const IterationObserver& observer) {
  config.validate();
  funcs.validate();
  rho0.validate();
  if (v_ext.size() != rho0.cell.num_points()) {
    throw LayoutError("external potential does not match the grid");
  }

  ScfTrace trace;
  std::vector<std::pair<DensityGrid, DensityGrid>> history;
  DensityGrid rho_in = rho0;
  for (int k = 1; k <= config.max_iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const OrbitalFreeHamiltonian h = assemble_hamiltonian(rho_in, funcs, v_ext);
    StageResult out = stage(h, rho_in);

    ScfIteration rec;
    rec.iteration = k;
    rec.residual = density_residual(out.rho_out, rho_in);
    const EnergyBreakdown e = total_energy(
        config.energy == EnergyConvention::kOutputDensity ? out.rho_out : rho_in,
        funcs, v_ext);
    check_finite(e, k);
    if (!std::isfinite(rec.residual)) {
      throw NumericalError("non-finite density residual at SCF iteration " +
                           std::to_string(k));
    }
    rec.energy = e.total;
    rec.cumulative_success_probability = out.cumulative_success_probability;
    rec.infidelity = out.infidelity;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    trace.iterations.push_back(rec);
    trace.final_energy = e;
    if (observer) observer(rec);

    const bool done = rec.residual < config.threshold;
    if (done || k == config.max_iterations) {
      trace.status = done ? ScfStatus::kConverged : ScfStatus::kMaxIterations;
      trace.final_density = std::move(out.rho_out);
      trace.final_input = std::move(rho_in);
      break;
    }
    history.emplace_back(rho_in, std::move(out.rho_out));
    if (history.size() > static_cast<std::size_t>(config.mixing.history) + 1) {
      history.erase(history.begin());
    }
    rho_in = mix_density(history, config.mixing);
  }
  return trace;
}

GroundStateStage pite_stage(const ScfConfig& config) {
  return [config](const OrbitalFreeHamiltonian& h, const DensityGrid& rho_in) {
    const StateVector psi = encode_density(rho_in);
    const OfOperator op(h);
    const bool dense_ok = h.cell.num_points() <= dense::kMaxDenseDimension;
    std::optional<DenseSpectrum> spectrum;
    PiteRunOptions options;
    if (dense_ok && (config.pite.mode == PiteMode::kExact || config.track_infidelity)) {
      spectrum = diagonalize(op.dense_matrix());
      if (config.pite.mode == PiteMode::kExact) options.spectrum = &*spectrum;
      if (config.track_infidelity) options.reference = spectrum->vectors.col(0);
    }
    PiteTrajectory traj;
    try {
      traj = run_pite(psi, op, config.pite, options);
    } catch (const CollapseError& e) {
      throw CollapseError(std::string("PITE collapsed during SCF: ") + e.what());
    }
    StageResult r{decode_density(*traj.final_state, rho_in.electrons, h.cell),
                  traj.cumulative_probability.back(), std::nullopt};
    if (!traj.infidelity.empty()) r.infidelity = traj.infidelity.back();
    return r;
  };
}

ScfTrace scf_loop(const DensityGrid& rho0, const FunctionalSet& funcs,
                  std::span<const double> v_ext, const ScfConfig& config,
                  const IterationObserver& observer) {
  return run_scf(rho0, funcs, v_ext, config, pite_stage(config), observer);
}

}  // namespace qofdft
