#pragma once

#include "geneo/analysis.hpp"
#include "geneo/robin.hpp"

namespace geneo {

// flat dotted-key configuration; sweepable keys (coarse.method,
// inexact.strategy, coefficient.contrast) accept comma lists
struct ExperimentConfig {
  int dimension = 0;  // required
  int cells = 0;      // required
  Boundary boundary = Boundary::dirichlet;

  std::string coefficient_kind = "constant";
  double coefficient_value = 1;
  std::vector<double> contrasts = {1};
  int channel_count = 1;

  std::array<int, 2> grid = {0, 0};  // required
  int overlap = 1;
  int extension_layers = 1;

  std::vector<Method> methods = {Method::geneo};
  double tau = 0.1;
  double gamma = 0.5;
  BKind b_kind = BKind::robin;
  double alpha = 10;

  std::vector<Strategy> strategies = {Strategy::exact};
  double lo = 0.5, hi = 2.0;
  double drop_tol = 1e-2;

  double rel_tol = 1e-8;
  int max_iter = 2000;

  bool spectrum = true, bounds = true, eps_direct = false;
  int size_cap = 3000;

  std::string out_dir = "out";
  bool matrices = false;
  std::uint64_t seed = 0;

  Source source;

  int num_cells() const {
    return int(methods.size() * strategies.size() * contrasts.size());
  }
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace geneo
