// Command-line front end: one run per invocation.
//
//   qofdft <scf|pite-demo|qpe|cost|oracle-scf> --config run.json
//          [--seed N] [--threads N] [--dump-state] [--out DIR]

#include <CLI11.hpp>
#include <iostream>

#include "qofdft/config.hpp"
#include "qofdft/errors.hpp"
#include "qofdft/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hybrid quantum-classical orbital-free DFT simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qofdft::kVersion);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int threads = 1;
  bool dump_state = false;

  const char* modes[] = {"scf", "pite-demo", "qpe", "cost", "oracle-scf"};
  const char* help[] = {
      "hybrid SCF loop with PITE ground-state preparation",
      "PITE trajectory for the Hamiltonian of the initial density",
      "Bayesian phase estimation of the ground energy",
      "circuit resource sweep for the potential evolution",
      "classical SCF with an eigensolver in place of PITE"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(modes[i], help[i]);
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-state", dump_state, "write the final density and statevector");
    sub->add_option("--out", out_dir, "output directory");
  }
  CLI11_PARSE(app, argc, argv);

  try {
    qofdft::RunConfig config = qofdft::parse_config(config_path);
    config.mode = qofdft::parse_run_mode(app.get_subcommands().front()->get_name());
    qofdft::RunOptions options;
    options.seed = seed;
    options.threads = threads;
    options.dump_state = dump_state;
    if (out_dir) options.out_dir = *out_dir;
    options.log = &std::cerr;
    return qofdft::run(std::move(config), options);
  } catch (const qofdft::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qofdft::kExitError;
  }
}
