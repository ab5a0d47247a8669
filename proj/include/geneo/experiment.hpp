#pragma once

#include "geneo/config.hpp"

namespace geneo {

struct RunOptions {
  std::string out_dir;  // overrides output.dir when nonempty
  bool has_seed = false;
  std::uint64_t seed = 0;
  int workers = 1;
  bool verbose = false;
};

// full sweep: one cell per (method, strategy, contrast), report.csv plus
// per-cell artifacts; exit status 0 iff every enabled check passed
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

// stage pipeline over fixed filenames in the output directory; every stage
// needs the sweep keys pinned to single values
int stage_assemble(const ExperimentConfig& cfg, const RunOptions& opt);
int stage_decompose(const ExperimentConfig& cfg, const RunOptions& opt);
int stage_coarse(const ExperimentConfig& cfg, const RunOptions& opt);
int stage_solve(const ExperimentConfig& cfg, const RunOptions& opt);
int stage_spectrum(const ExperimentConfig& cfg, const RunOptions& opt);
int stage_report(const ExperimentConfig& cfg, const RunOptions& opt);

// externally supplied (A, M) pair straight to spectrum.csv
int spectrum_external(const std::string& a_path, const std::string& m_path,
                      const std::string& out_dir);

void write_decomposition(const std::string& path, const Decomposition& dec,
                         const PartitionOfUnity& pou);
std::pair<Decomposition, PartitionOfUnity> read_decomposition(const std::string& path);

}  // namespace geneo
