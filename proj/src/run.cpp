#include "qofdft/run.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "qofdft/cost.hpp"
#include "qofdft/dense.hpp"
#include "qofdft/eigref.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/parallel.hpp"
#include "qofdft/rte.hpp"

namespace qofdft {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

/// Puts "# config_hash=<hash>" in front of a table written by a module.
void stamp_csv(const fs::path& path, const std::string& hash) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot reopen " + path.string());
  std::ostringstream body;
  body << is.rdbuf();
  is.close();
  write_text(path, "# config_hash=" + hash + "\n" + body.str());
}

/// JSON-lines trace. Records carry no wall-clock data so that identical runs
/// produce identical files.
class TraceWriter {
 public:
  TraceWriter(const fs::path& path, std::string hash)
      : path_(path), os_(path, std::ios::binary), hash_(std::move(hash)) {
    if (!os_) throw IoError("cannot open " + path.string() + " for writing");
  }

  void write(const std::string& type, json fields) {
    json record;
    record["type"] = type;
    record["config_hash"] = hash_;
    for (auto it = fields.begin(); it != fields.end(); ++it) record[it.key()] = it.value();
    os_ << record.dump() << '\n';
    os_.flush();
    if (!os_) throw IoError("failed writing " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream os_;
  std::string hash_;
};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

DensityGrid initial_density(const RunConfig& config, const SimulationCell& cell) {
  if (!config.initial_density) return DensityGrid::uniform(cell, config.electrons);
  DensityGrid rho{cell, read_grid_file(*config.initial_density, cell), config.electrons};
  for (double v : rho.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("initial_density: " + config.initial_density->string() +
                        ": density must be non-negative and finite");
    }
  }
  const double total = rho.integral();
  if (!(total > 0.0) ||
      std::abs(total - config.electrons) > 1e-6 * std::max(1.0, config.electrons)) {
    throw ConfigError("initial_density: " + config.initial_density->string() +
                      ": integrates to " + std::to_string(total) + ", expected " +
                      std::to_string(config.electrons) + " electrons");
  }
  for (double& v : rho.values) v *= config.electrons / total;
  return rho;
}

json energy_json(const EnergyBreakdown& e) {
  return {{"kinetic", e.kinetic}, {"external", e.external}, {"hartree", e.hartree},
          {"xc", e.xc}, {"total", e.total}};
}

json estimate_json(const cost::ResourceEstimate& r) {
  return {{"depth", r.depth}, {"gates", r.gates}, {"qubits", r.qubits}};
}

struct RunContext {
  const RunConfig& config;
  const RunOptions& options;
  fs::path out;
  std::string hash;
  TraceWriter& trace;
  json& metadata;
  SimulationCell cell;
  std::vector<double> v_ext;
  DensityGrid rho0;
};

void operator_norms(RunContext& ctx, const OrbitalFreeHamiltonian& h) {
  ctx.metadata["kinetic_norm"] = kinetic_norm(h.cell);
  ctx.metadata["potential_norm"] = potential_norm(h.v_loc);
  ctx.metadata["pite_dtau_within_phase_bound"] =
      time_step_within_bound(h, ctx.config.scf.pite.dtau);
}

void dump_density(RunContext& ctx, const DensityGrid& rho) {
  write_grid_file(ctx.out / ("density-" + ctx.hash + ".grid"), rho.cell, rho.values);
  write_snapshot(encode_density(rho), ctx.out / ("state-" + ctx.hash + ".qsv"));
}

int run_scf_mode(RunContext& ctx, bool oracle) {
  const RunConfig& c = ctx.config;
  json seconds = json::array();
  auto t_last = Clock::now();
  const IterationObserver observer = [&](const ScfIteration& it) {
    const auto now = Clock::now();
    seconds.push_back(std::chrono::duration<double>(now - t_last).count());
    t_last = now;
    ctx.trace.write("scf_iteration",
                    {{"iteration", it.iteration},
                     {"residual", it.residual},
                     {"energy", it.energy},
                     {"cumulative_success_probability", it.cumulative_success_probability},
                     {"infidelity", optional_json(it.infidelity)}});
    if (ctx.options.log) {
      *ctx.options.log << "iteration " << it.iteration << " residual " << it.residual
                       << " energy " << it.energy << '\n';
    }
  };
  const ScfTrace trace =
      oracle ? classical_scf_oracle(ctx.rho0, c.functionals, ctx.v_ext, c.scf,
                                    OracleOptions{c.oracle_solver, {1e-11, 2000}}, observer)
             : scf_loop(ctx.rho0, c.functionals, ctx.v_ext, c.scf, observer);
  ctx.metadata["iteration_seconds"] = seconds;

  const fs::path csv = ctx.out / (oracle ? "oracle_scf.csv" : "scf.csv");
  {
    std::ofstream os(csv, std::ios::binary);
    if (!os) throw IoError("cannot open " + csv.string() + " for writing");
    os << "# config_hash=" << ctx.hash << '\n'
       << "iteration,residual,energy,cumulative_success_probability,infidelity\n";
    char buf[200];
    for (const ScfIteration& it : trace.iterations) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,", it.iteration, it.residual,
                    it.energy, it.cumulative_success_probability);
      os << buf;
      if (it.infidelity) {
        std::snprintf(buf, sizeof buf, "%.17g", *it.infidelity);
        os << buf;
      }
      os << '\n';
    }
  }
  if (trace.final_input) {
    operator_norms(ctx, assemble_hamiltonian(*trace.final_input, c.functionals, ctx.v_ext));
  }
  ctx.trace.write("summary",
                  {{"mode", to_string(c.mode)},
                   {"status", trace.converged() ? "converged" : "max_iterations"},
                   {"iterations", trace.iterations.size()},
                   {"final_residual",
                    trace.iterations.empty() ? json(nullptr)
                                             : json(trace.iterations.back().residual)},
                   {"final_energy", energy_json(trace.final_energy)}});
  if (ctx.options.dump_state && trace.final_density) dump_density(ctx, *trace.final_density);
  ctx.metadata["status"] = trace.converged() ? "converged" : "max_iterations";
  return trace.converged() ? kExitOk : kExitIncomplete;
}

std::optional<DenseSpectrum> reference_spectrum(const OrbitalFreeHamiltonian& h) {
  if (h.cell.num_points() > dense::kMaxDenseDimension) return std::nullopt;
  return diagonalize(dense::hamiltonian_matrix(h));
}

int run_pite_mode(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  const OrbitalFreeHamiltonian h = assemble_hamiltonian(ctx.rho0, c.functionals, ctx.v_ext);
  operator_norms(ctx, h);
  const OfOperator op(h);
  const std::optional<DenseSpectrum> spectrum = reference_spectrum(h);
  PiteRunOptions opts;
  if (spectrum) {
    opts.reference = spectrum->vectors.col(0);
    opts.spectrum = &*spectrum;
  }
  const auto t0 = Clock::now();
  const PiteTrajectory traj = run_pite(encode_density(ctx.rho0), op, c.scf.pite, opts);
  ctx.metadata["pite_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();

  for (std::size_t j = 0; j < traj.step_probability.size(); ++j) {
    json rec = {{"step", j + 1},
                {"step_probability", traj.step_probability[j]},
                {"cumulative_probability", traj.cumulative_probability[j]},
                {"infidelity", j < traj.infidelity.size() ? json(traj.infidelity[j])
                                                          : json(nullptr)}};
    ctx.trace.write("pite_step", rec);
  }
  const fs::path csv = ctx.out / "pite_trajectory.csv";
  write_trajectory_csv(csv, traj);
  stamp_csv(csv, ctx.hash);

  json summary = {{"mode", to_string(c.mode)},
                  {"status", "complete"},
                  {"steps", traj.step_probability.size()},
                  {"cumulative_probability", traj.cumulative_probability.empty()
                                                 ? 1.0
                                                 : traj.cumulative_probability.back()}};
  if (spectrum) summary["ground_energy"] = spectrum->values(0);
  ctx.trace.write("summary", summary);
  if (ctx.options.dump_state && traj.final_state) {
    write_snapshot(*traj.final_state, ctx.out / ("state-" + ctx.hash + ".qsv"));
    write_grid_file(ctx.out / ("density-" + ctx.hash + ".grid"), ctx.cell,
                    decode_density(*traj.final_state, c.electrons, ctx.cell).values);
  }
  ctx.metadata["status"] = "complete";
  return kExitOk;
}

int run_qpe_mode(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  const OrbitalFreeHamiltonian h = assemble_hamiltonian(ctx.rho0, c.functionals, ctx.v_ext);
  operator_norms(ctx, h);
  const OfOperator op(h, c.qpe.trotter_steps);
  const std::optional<DenseSpectrum> spectrum = reference_spectrum(h);

  StateVector input = encode_density(ctx.rho0);
  if (c.qpe.prepare_with_pite) {
    PiteRunOptions opts;
    if (spectrum) {
      opts.reference = spectrum->vectors.col(0);
      opts.spectrum = &*spectrum;
    }
    input = *run_pite(input, op, c.scf.pite, opts).final_state;
  } else {
    if (!spectrum) {
      throw ConfigError("qpe.prepare_with_pite: the exact ground state needs a grid of at most " +
                        std::to_string(dense::kMaxDenseDimension) + " points");
    }
    const Eigen::VectorXcd gs = spectrum->vectors.col(0);
    for (std::size_t i = 0; i < input.dimension(); ++i) {
      input.amplitudes()[i] = gs(static_cast<Eigen::Index>(i));
    }
  }

  std::mt19937_64 rng(c.seed);
  const auto t0 = Clock::now();
  const QpeResult res = estimate_ground_energy(input, op, c.qpe.config, rng);
  ctx.metadata["qpe_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  for (const QpeRecord& r : res.transcript) {
    ctx.trace.write("qpe_sample", {{"sample", r.sample},
                                   {"k", r.k},
                                   {"beta", r.beta},
                                   {"m", r.m},
                                   {"posterior_mean", r.mean},
                                   {"posterior_std", r.stddev}});
  }
  const fs::path csv = ctx.out / "qpe_transcript.csv";
  write_transcript_csv(csv, res);
  stamp_csv(csv, ctx.hash);

  json summary = {{"mode", to_string(c.mode)},
                  {"status", res.partial ? "partial" : "complete"},
                  {"samples", res.samples_used},
                  {"mean", res.mean},
                  {"stddev", res.stddev},
                  {"dt", res.dt},
                  {"prior", {res.prior_lower, res.prior_upper}}};
  if (spectrum) summary["exact_ground_energy"] = spectrum->values(0);
  ctx.trace.write("summary", summary);
  if (ctx.options.dump_state) {
    write_snapshot(input, ctx.out / ("state-" + ctx.hash + ".qsv"));
  }
  ctx.metadata["status"] = res.partial ? "partial" : "complete";
  return res.partial ? kExitIncomplete : kExitOk;
}

int run_cost_mode(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  const std::vector<cost::SweepRow> rows =
      cost::potential_sweep(c.cost.min_qubits, c.cost.max_qubits, c.cost.groups);
  for (const cost::SweepRow& r : rows) {
    json rec = {{"N_g", r.n_g}};
    const json est = estimate_json(r.estimate);
    for (const auto& [k, v] : est.items()) rec[k] = v;
    ctx.trace.write("cost_row", rec);
  }
  const fs::path csv = ctx.out / "cost_sweep.csv";
  cost::write_sweep_csv(csv, rows);
  stamp_csv(csv, ctx.hash);

  json kinetic = json::object();
  const char* axes[] = {"axis1", "axis2", "axis3"};
  for (int l = 0; l < 3; ++l) {
    kinetic[axes[l]] = estimate_json(cost::kinetic_gate_estimate(c.cell.qubits[l]));
  }
  const cost::SelectorConstants k = cost::selector_depth_constants();
  ctx.trace.write("summary",
                  {{"mode", to_string(c.mode)},
                   {"status", "complete"},
                   {"rows", rows.size()},
                   {"groups", c.cost.groups},
                   {"kinetic_rte", kinetic},
                   {"selector_depth",
                    {{"slope", k.depth_slope},
                     {"offset_even", k.depth_offset_even},
                     {"offset_odd", k.depth_offset_odd}}}});
  ctx.metadata["status"] = "complete";
  return kExitOk;
}

}  // namespace

fs::path resolve_output_dir(const RunConfig& config, const RunOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (config.output_dir) return *config.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "qofdft-out";
}

int run(RunConfig config, const RunOptions& options) {
  std::ostream* log = options.log;
  try {
    if (options.seed) config.seed = *options.seed;
    if (options.threads < 1) throw ConfigError("threads: must be at least 1");
    config.validate();
    set_num_threads(options.threads);

    const fs::path out = resolve_output_dir(config, options);
    fs::create_directories(out);
    const std::string hash = config_hash(config);
    write_text(out / "effective_config.json", effective_config_json(config));

    json metadata;
    metadata["version"] = kVersion;
    metadata["mode"] = to_string(config.mode);
    metadata["seed"] = config.seed;
    metadata["config_hash"] = hash;
    metadata["threads"] = options.threads;
    metadata["started_at"] = utc_timestamp();
    const auto start = Clock::now();

    int code = kExitError;
    {
      TraceWriter trace(out / "trace.jsonl", hash);
      const SimulationCell cell = config.cell.build();
      RunContext ctx{config, options, out, hash, trace, metadata, cell, {},
                     DensityGrid{cell, {}, config.electrons}};
      try {
        if (config.mode != RunMode::kCost) {
          ctx.v_ext = config.external.empty() ? std::vector<double>(cell.num_points(), 0.0)
                                              : external_potential(config.external, cell);
          ctx.rho0 = initial_density(config, cell);
        }
        switch (config.mode) {
          case RunMode::kScf: code = run_scf_mode(ctx, false); break;
          case RunMode::kOracleScf: code = run_scf_mode(ctx, true); break;
          case RunMode::kPiteDemo: code = run_pite_mode(ctx); break;
          case RunMode::kQpe: code = run_qpe_mode(ctx); break;
          case RunMode::kCost: code = run_cost_mode(ctx); break;
        }
      } catch (const Error& e) {
        trace.write("error", {{"message", e.what()}});
        metadata["status"] = "error";
        metadata["error"] = e.what();
        code = kExitError;
        if (log) *log << "error: " << e.what() << '\n';
      }
    }
    metadata["exit_code"] = code;
    metadata["total_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_text(out / "metadata.json", metadata.dump(2) + "\n");
    return code;
  } catch (const std::exception& e) {
    if (log) *log << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace qofdft
