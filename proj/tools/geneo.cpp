#include <iostream>

#include "CLI11.hpp"
#include "geneo/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"two-level Schwarz preconditioners with spectral coarse spaces"};
  app.fallthrough(true);
  app.require_subcommand(1);

  std::string config, out, a_path, m_path;
  std::uint64_t seed = 0;
  int workers = 1;
  bool verbose = false;

  auto* seed_opt =
      app.add_option("--seed", seed, "base random seed, overrides the config")->envname("GENEO_SEED");
  app.add_option("--config", config, "experiment config file")->envname("GENEO_CONFIG");
  app.add_option("--out", out, "output directory, overrides output.dir")->envname("GENEO_OUT");
  app.add_option("--workers", workers, "worker thread cap")
      ->envname("GENEO_WORKERS")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "per-cell diagnostics")->envname("GENEO_VERBOSE");

  app.add_subcommand("run", "full sweep: build, solve, analyze, report");
  app.add_subcommand("assemble", "write A.mtx and F.txt");
  app.add_subcommand("decompose", "write decomposition.txt");
  app.add_subcommand("coarse", "write Z.mtx, E.mtx, Etilde.mtx, constants.csv");
  app.add_subcommand("solve", "PCG from the exported stage files");
  auto* spectrum_cmd =
      app.add_subcommand("spectrum", "eigenvalues of the preconditioned operator");
  spectrum_cmd->add_option("--A", a_path, "external system matrix (Matrix Market)");
  spectrum_cmd->add_option("--M", m_path, "external preconditioner matrix (Matrix Market)");
  app.add_subcommand("report", "bound check from constants.csv and spectrum.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  geneo::RunOptions opt;
  opt.out_dir = out;
  opt.has_seed = seed_opt->count() > 0;
  opt.seed = seed;
  opt.workers = workers;
  opt.verbose = verbose;

  try {
    if (sub == "spectrum" && (!a_path.empty() || !m_path.empty())) {
      if (a_path.empty() || m_path.empty()) {
        std::cerr << "error: --A and --M must be given together\n";
        return 2;
      }
      return geneo::spectrum_external(a_path, m_path, out.empty() ? "out" : out);
    }

    if (config.empty()) {
      std::cerr << "error: --config is required (or set GENEO_CONFIG)\n";
      return 2;
    }
    geneo::ExperimentConfig cfg;
    try {
      cfg = geneo::parse_config_file(config);
    } catch (const geneo::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }

    if (sub == "run") return geneo::run_experiment(cfg, opt);
    if (sub == "assemble") return geneo::stage_assemble(cfg, opt);
    if (sub == "decompose") return geneo::stage_decompose(cfg, opt);
    if (sub == "coarse") return geneo::stage_coarse(cfg, opt);
    if (sub == "solve") return geneo::stage_solve(cfg, opt);
    if (sub == "spectrum") return geneo::stage_spectrum(cfg, opt);
    if (sub == "report") return geneo::stage_report(cfg, opt);
    std::cerr << "error: unknown subcommand " << sub << '\n';
    return 2;
  } catch (const geneo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
