#include "geneo/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "geneo/mmio.hpp"

namespace geneo {

namespace fs = std::filesystem;

namespace {

ExperimentConfig effective(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = cfg;
  if (!opt.out_dir.empty()) eff.out_dir = opt.out_dir;
  if (opt.has_seed) eff.seed = opt.seed;
  return eff;
}

void require_single(const ExperimentConfig& cfg) {
  if (cfg.methods.size() != 1)
    fail("stage commands need a single-valued 'coarse.method' (got " +
         std::to_string(cfg.methods.size()) + " values)");
  if (cfg.strategies.size() != 1)
    fail("stage commands need a single-valued 'inexact.strategy' (got " +
         std::to_string(cfg.strategies.size()) + " values)");
  if (cfg.contrasts.size() != 1)
    fail("stage commands need a single-valued 'coefficient.contrast' (got " +
         std::to_string(cfg.contrasts.size()) + " values)");
}

CoefficientField make_coefficient(const ExperimentConfig& cfg, const Mesh& mesh,
                                  double contrast) {
  if (cfg.coefficient_kind == "constant") return coefficient_constant(mesh, cfg.coefficient_value);
  if (cfg.coefficient_kind == "checkerboard") return coefficient_checkerboard(mesh, contrast);
  return coefficient_channels(mesh, contrast, cfg.channel_count);
}

struct Problem {
  Mesh mesh;
  CoefficientField coeff;
  SparseSym A;
  Eigen::VectorXd F;
  Decomposition dec;
  PartitionOfUnity pou;
  int k0 = 0, k1 = 0;
};

Problem build_problem(const ExperimentConfig& cfg, double contrast) {
  Problem P;
  P.mesh = build_structured_mesh(cfg.dimension, cfg.cells, cfg.boundary);
  P.coeff = make_coefficient(cfg, P.mesh, contrast);
  P.A = assemble_global_stiffness(P.mesh, P.coeff);
  P.F = assemble_rhs(P.mesh, cfg.source);
  P.dec = build_overlapping_decomposition(P.mesh, cfg.grid, cfg.overlap);
  P.pou = build_partition_of_unity(P.dec);
  P.k0 = compute_k0(P.dec, P.A);
  P.k1 = compute_k1(P.dec);
  return P;
}

struct CoarseBuild {
  std::vector<EigenPairSet> sets;
  CoarseSpace cs;
  std::vector<SubdomainProjectors> subs;  // geneo2 only
  int k1_eff = 0;
};

CoarseBuild build_coarse(const ExperimentConfig& cfg, const Problem& P, Method method) {
  CoarseBuild cb;
  if (method == Method::geneo) {
    for (int j = 0; j < P.dec.N; ++j) {
      SparseSym Aneu =
          assemble_subdomain_neumann(P.mesh, P.coeff, P.dec.cells[j], P.dec.dofs[j]);
      cb.sets.push_back(solve_geneo_gevp(j, P.A, P.dec, P.pou, Aneu, cfg.tau));
    }
    cb.cs = assemble_coarse_basis(cb.sets, P.dec, P.pou);
    cb.k1_eff = P.k1;
  } else if (method == Method::geneo2) {
    for (int i = 0; i < P.dec.N; ++i) {
      SparseSym B = build_b_matrix(P.mesh, P.coeff, P.dec, i, cfg.b_kind, cfg.alpha);
      SparseSym Aneu =
          assemble_subdomain_neumann(P.mesh, P.coeff, P.dec.cells[i], P.dec.dofs[i]);
      const bool b_spd = B.tag == Definiteness::spd;
      std::optional<EigenPairSet> lower;
      if (b_spd) lower = solve_geneo2_lower_gevp(i, Aneu, B, cfg.tau);
      EigenPairSet upper = solve_geneo2_upper_gevp(i, P.A, P.dec, P.pou, B, cfg.gamma);
      cb.subs.push_back(build_subdomain_projectors(lower ? &*lower : nullptr, upper,
                                                   Eigen::MatrixXd(B.mat), b_spd));
      if (lower) cb.sets.push_back(std::move(*lower));
      cb.sets.push_back(std::move(upper));
    }
    cb.cs = assemble_coarse_basis(cb.sets, P.dec, P.pou);
    cb.k1_eff = P.k1;
  } else {
    Decomposition ext = extend_decomposition(P.mesh, P.dec, cfg.extension_layers);
    PartitionOfUnity inherited = inherit_partition_of_unity(P.dec, P.pou, ext);
    std::vector<SparseSym> Aneu;
    Aneu.reserve(ext.N);
    for (int i = 0; i < ext.N; ++i)
      Aneu.push_back(assemble_subdomain_neumann(P.mesh, P.coeff, ext.cells[i], ext.dofs[i]));
    std::tie(cb.sets, cb.cs) = solve_annex_gevp(P.A, ext, inherited, Aneu, cfg.tau);
    cb.k1_eff = compute_k1(ext);
  }
  return cb;
}

Preconditioner build_preconditioner(const ExperimentConfig& cfg, const Problem& P,
                                    Method method, CoarseBuild& cb,
                                    std::shared_ptr<const InexactCoarseOperator> cop) {
  if (method == Method::geneo2)
    return make_geneo2_acs(P.A, P.dec, P.pou, std::move(cb.subs), cb.cs.Z, std::move(cop),
                           cfg.tau, cfg.gamma);
  return make_geneo_acs(P.A, P.dec, P.pou, cb.cs.Z, std::move(cop), cfg.tau);
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) fail("cannot open " + path + " for writing");
  return out;
}

void write_convergence_csv(const std::string& path, const ConvergenceHistory& h) {
  std::ofstream out = open_csv(path);
  out << "iter,precond_res_norm\n";
  for (size_t k = 0; k < h.residuals.size(); ++k)
    out << k << ',' << format_g17(h.residuals[k]) << '\n';
}

void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& spec) {
  std::ofstream out = open_csv(path);
  out << "index,eigenvalue\n";
  for (Eigen::Index k = 0; k < spec.size(); ++k)
    out << k << ',' << format_g17(spec[k]) << '\n';
}

void write_provenance_csv(const std::string& path, const CoarseSpace& cs) {
  std::ofstream out = open_csv(path);
  out << "column,subdomain,gevp_kind,eigenvalue\n";
  for (size_t k = 0; k < cs.cols.size(); ++k)
    out << k << ',' << cs.cols[k].subdomain << ',' << gevp_kind_name(cs.cols[k].kind) << ','
        << format_g17(cs.cols[k].eigenvalue) << '\n';
}

const char* report_header =
    "method,strategy,k0,k1,tau,gamma,lam_min_EEt,lam_max_EEt,eps_A,c_T,c_R,lam_min,lam_max,"
    "cond,pass";

struct ReportRow {
  Method method;
  Strategy strategy;
  int k0 = 0, k1 = 0;
  double tau = 0, gamma = 0;
  double lam_min_EEt = 1, lam_max_EEt = 1, eps_A = 0;
  double c_T = std::nan(""), c_R = std::nan("");
  double lam_min = std::nan(""), lam_max = std::nan(""), cond = std::nan("");
  bool pass = false;
};

void write_report_row(std::ofstream& out, const ReportRow& r) {
  out << method_name(r.method) << ',' << strategy_name(r.strategy) << ',' << r.k0 << ','
      << r.k1 << ',' << format_g17(r.tau) << ',' << format_g17(r.gamma) << ','
      << format_g17(r.lam_min_EEt) << ',' << format_g17(r.lam_max_EEt) << ','
      << format_g17(r.eps_A) << ',' << format_g17(r.c_T) << ',' << format_g17(r.c_R) << ','
      << format_g17(r.lam_min) << ',' << format_g17(r.lam_max) << ',' << format_g17(r.cond)
      << ',' << (r.pass ? "true" : "false") << '\n';
}

void verbose_coarse_notes(std::ostream& os, const CoarseBuild& cb) {
  for (const auto& set : cb.sets) {
    if (!set.near_threshold.empty())
      os << "  note: subdomain " << set.subdomain << ' ' << gevp_kind_name(set.kind) << ": "
         << set.near_threshold.size() << " eigenvalue(s) within 1e-12 of the threshold\n";
    if (set.degenerate_discarded > 0)
      os << "  note: subdomain " << set.subdomain << ' ' << gevp_kind_name(set.kind) << ": "
         << set.degenerate_discarded << " common-kernel direction(s) discarded\n";
    if (set.kind == GevpKind::annex && set.harmonicity > 0)
      os << "  note: subdomain " << set.subdomain
         << " annex harmonicity residual " << format_g17(set.harmonicity) << '\n';
  }
}

struct CellSpec {
  int index;
  Method method;
  Strategy strategy;
  double contrast;
};

struct CellResult {
  ReportRow row;
  bool pass = false;
  std::string log;
};

CellResult run_cell(const ExperimentConfig& eff, const RunOptions& opt, const CellSpec& cell,
                    int inner_workers) {
  CellResult res;
  std::ostringstream log;

  Problem P = build_problem(eff, cell.contrast);
  CoarseBuild cb = build_coarse(eff, P, cell.method);
  SparseSym Es = assemble_E(cb.cs, P.A);
  StrategyParams sp{cell.strategy, eff.lo, eff.hi, eff.drop_tol, eff.seed + std::uint64_t(cell.index)};
  auto cop = std::make_shared<const InexactCoarseOperator>(
      build_inexact_E(Eigen::MatrixXd(Es.mat), sp));
  const CoarseSpace& cs = cb.cs;

  ReportRow row;
  row.method = cell.method;
  row.strategy = cell.strategy;
  row.k0 = P.k0;
  row.k1 = cb.k1_eff;
  row.tau = eff.tau;
  row.gamma = cell.method == Method::geneo2 ? eff.gamma : 0;
  row.lam_min_EEt = cop->lam_min;
  row.lam_max_EEt = cop->lam_max;
  row.eps_A = epsilon_A_formula(cop->lam_min, cop->lam_max);

  Preconditioner M = build_preconditioner(eff, P, cell.method, cb, cop);
  M.workers = inner_workers;

  auto [x, hist] = pcg_solve(P.A, P.F, M, eff.rel_tol, eff.max_iter);
  const std::string prefix = eff.out_dir + "/";
  const std::string idx = std::to_string(cell.index);
  write_convergence_csv(prefix + "convergence_" + idx + ".csv", hist);

  Eigen::VectorXd spec;
  Eigen::MatrixXd Mdense;
  if (eff.spectrum) {
    if (P.A.rows() > eff.size_cap)
      fail("operator_spectrum: order " + std::to_string(P.A.rows()) +
           " exceeds the size cap " + std::to_string(eff.size_cap) +
           ", use lanczos_extremes for an estimate");
    Mdense = M.densify(inner_workers);
    spec = spectrum_dense(Eigen::MatrixXd(P.A.mat), Mdense);
    write_spectrum_csv(prefix + "spectrum_" + idx + ".csv", spec);
  }

  bool eps_ok = true;
  double eps_dir = 0;
  if (eff.eps_direct) {
    eps_dir = epsilon_A_direct(P.A, cs.Z, *cop);
    eps_ok = std::abs(row.eps_A - eps_dir) <= 1e-8;
  }

  bool bounds_ok = true;
  if (eff.bounds) {
    SpectralBoundReport rep =
        check_bounds(cell.method, P.k0, cb.k1_eff, eff.tau, row.gamma, cop->lam_min,
                     cop->lam_max, spec);
    row.c_T = rep.c_T;
    row.c_R = rep.c_R;
    bounds_ok = rep.pass;
  }
  if (eff.spectrum) {
    row.lam_min = spec.minCoeff();
    row.lam_max = spec.maxCoeff();
    row.cond = row.lam_max / row.lam_min;
  }

  res.pass = hist.converged && bounds_ok && eps_ok;
  row.pass = res.pass;
  res.row = row;

  if (eff.matrices) {
    const std::string stem = prefix + "cell_" + idx + "_";
    write_matrix_market(stem + "A.mtx", P.A);
    write_vector(stem + "F.txt", P.F);
    write_matrix_market_dense(stem + "Z.mtx", cs.Z);
    write_provenance_csv(stem + "Z_provenance.csv", cs);
    write_matrix_market(stem + "E.mtx", Es);
    write_matrix_market_dense(stem + "Etilde.mtx", cop->Etilde);
    write_vector(stem + "solution.txt", x);
    if (eff.spectrum) write_matrix_market_dense(stem + "M.mtx", Mdense);
  }

  log << "cell " << cell.index << ": method=" << method_name(cell.method)
      << " strategy=" << strategy_name(cell.strategy) << " contrast=" << format_g17(cell.contrast)
      << " coarse_dim=" << cs.Z.cols() << " iters=" << hist.iterations
      << " converged=" << (hist.converged ? "true" : "false");
  if (eff.bounds)
    log << " bound=" << (bounds_ok ? "pass" : "fail");
  log << '\n';
  if (opt.verbose) {
    verbose_coarse_notes(log, cb);
    if (eff.eps_direct)
      log << "  eps_A formula " << format_g17(row.eps_A) << ", direct " << format_g17(eps_dir)
          << '\n';
    if (cb.cs.raw_columns != cs.Z.cols())
      log << "  note: basis cleanup kept " << cs.Z.cols() << " of " << cb.cs.raw_columns
          << " columns\n";
    if (cop->kind == Strategy::incomplete_factor && cop->ic_shift > 0)
      log << "  note: incomplete factor restarted with diagonal shift "
          << format_g17(cop->ic_shift) << '\n';
    if (!M.empty_w_subdomains.empty()) {
      log << "  note: empty W_gamma on subdomain(s)";
      for (int i : M.empty_w_subdomains) log << ' ' << i;
      log << ", their local term vanishes\n";
    }
    log << "  wall=" << format_g17(hist.wall_seconds) << "s final_residual="
        << format_g17(hist.final_relative_residual) << '\n';
  }
  res.log = log.str();
  return res;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double parse_csv_double(const std::string& file, const std::string& v) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    fail("malformed number '" + v + "' in " + file);
  }
}

void require_file(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) fail("missing input " + path + ", run the " + producer + " stage first");
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = effective(cfg, opt);
  if (eff.boundary == Boundary::none)
    fail("mesh.boundary = none leaves the global system singular; run needs a Dirichlet boundary");
  fs::create_directories(eff.out_dir);

  std::vector<CellSpec> cells;
  int index = 0;
  for (Method m : eff.methods)
    for (Strategy s : eff.strategies)
      for (double contrast : eff.contrasts) cells.push_back({index++, m, s, contrast});

  const int n = int(cells.size());
  const bool cell_parallel = opt.workers > 1 && n > 1;
  const int inner = cell_parallel ? 1 : opt.workers;
  std::vector<CellResult> results(n);
  parallel_for(n, cell_parallel ? opt.workers : 1,
               [&](int i) { results[i] = run_cell(eff, opt, cells[i], inner); });

  std::ofstream report = open_csv(eff.out_dir + "/report.csv");
  report << report_header << '\n';
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << r.log;
    write_report_row(report, r.row);
    all_pass = all_pass && r.pass;
  }
  report.close();
  std::cout << "report: " << eff.out_dir << "/report.csv\n";
  std::cout << "result: " << (all_pass ? "PASS" : "FAIL") << '\n';
  return all_pass ? 0 : 1;
}

void write_decomposition(const std::string& path, const Decomposition& dec,
                         const PartitionOfUnity& pou) {
  std::ofstream out = open_csv(path);
  out << "N " << dec.N << '\n';
  for (int i = 0; i < dec.N; ++i) {
    out << "cells " << i << ':';
    for (int c : dec.cells[i]) out << ' ' << c;
    out << '\n';
    out << "dofs " << i << ':';
    for (size_t k = 0; k < dec.dofs[i].size(); ++k)
      out << ' ' << dec.dofs[i][k] << ':' << format_g17(pou.w[i][Eigen::Index(k)]);
    out << '\n';
  }
}

std::pair<Decomposition, PartitionOfUnity> read_decomposition(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::string word;
  if (!(in >> word) || word != "N") fail(path + ": expected leading 'N <count>' line");
  Decomposition dec;
  if (!(in >> dec.N) || dec.N < 1) fail(path + ": bad subdomain count");
  dec.cells.resize(dec.N);
  dec.dofs.resize(dec.N);
  PartitionOfUnity pou;
  pou.w.resize(dec.N);
  std::string line;
  std::getline(in, line);
  for (int i = 0; i < dec.N; ++i) {
    for (int part = 0; part < 2; ++part) {
      if (!std::getline(in, line)) fail(path + ": truncated at subdomain " + std::to_string(i));
      std::stringstream ss(line);
      std::string tag;
      int id;
      ss >> tag >> id;
      std::string expect = part == 0 ? "cells" : "dofs";
      if (tag != expect + ":" && tag != expect)
        fail(path + ": expected '" + expect + " " + std::to_string(i) + ":'");
      char colon;
      if (tag == expect) ss >> colon;
      if (id != i) fail(path + ": subdomain lines out of order");
      if (part == 0) {
        int c;
        while (ss >> c) dec.cells[i].push_back(c);
      } else {
        std::vector<double> w;
        std::string pair;
        while (ss >> pair) {
          size_t colon_pos = pair.find(':');
          if (colon_pos == std::string::npos)
            fail(path + ": malformed dof:weight pair '" + pair + "'");
          try {
            dec.dofs[i].push_back(std::stoi(pair.substr(0, colon_pos)));
          } catch (const std::exception&) {
            fail(path + ": malformed DOF index in '" + pair + "'");
          }
          w.push_back(parse_csv_double(path, pair.substr(colon_pos + 1)));
        }
        pou.w[i] = Eigen::Map<Eigen::VectorXd>(w.data(), Eigen::Index(w.size()));
      }
    }
    if (dec.cells[i].empty() || dec.dofs[i].empty())
      fail(path + ": empty subdomain " + std::to_string(i));
  }
  int max_cell = -1, max_dof = -1;
  for (int i = 0; i < dec.N; ++i) {
    for (int c : dec.cells[i]) max_cell = std::max(max_cell, c);
    for (int d : dec.dofs[i]) {
      if (d < 0) fail(path + ": negative DOF index");
      max_dof = std::max(max_dof, d);
    }
  }
  dec.num_cells_total = max_cell + 1;
  dec.num_dofs_total = max_dof + 1;
  return {std::move(dec), std::move(pou)};
}

int stage_assemble(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = effective(cfg, opt);
  require_single(eff);
  fs::create_directories(eff.out_dir);
  Mesh mesh = build_structured_mesh(eff.dimension, eff.cells, eff.boundary);
  CoefficientField coeff = make_coefficient(eff, mesh, eff.contrasts[0]);
  SparseSym A = assemble_global_stiffness(mesh, coeff);
  Eigen::VectorXd F = assemble_rhs(mesh, eff.source);
  write_matrix_market(eff.out_dir + "/A.mtx", A);
  write_vector(eff.out_dir + "/F.txt", F);
  std::cout << "assembled " << A.rows() << " DOFs: " << eff.out_dir << "/A.mtx, "
            << eff.out_dir << "/F.txt\n";
  return 0;
}

int stage_decompose(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = effective(cfg, opt);
  require_single(eff);
  fs::create_directories(eff.out_dir);
  Mesh mesh = build_structured_mesh(eff.dimension, eff.cells, eff.boundary);
  Decomposition dec = build_overlapping_decomposition(mesh, eff.grid, eff.overlap);
  PartitionOfUnity pou = build_partition_of_unity(dec);
  write_decomposition(eff.out_dir + "/decomposition.txt", dec, pou);
  std::cout << "decomposed into " << dec.N << " subdomains: " << eff.out_dir
            << "/decomposition.txt\n";
  return 0;
}

int stage_coarse(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = effective(cfg, opt);
  require_single(eff);
  const std::string dir = eff.out_dir + "/";
  require_file(dir + "A.mtx", "assemble");
  require_file(dir + "decomposition.txt", "decompose");

  Problem P;
  P.mesh = build_structured_mesh(eff.dimension, eff.cells, eff.boundary);
  P.coeff = make_coefficient(eff, P.mesh, eff.contrasts[0]);
  P.A = read_matrix_market_sym(dir + "A.mtx");
  std::tie(P.dec, P.pou) = read_decomposition(dir + "decomposition.txt");
  if (P.A.rows() != P.mesh.num_dofs())
    fail(dir + "A.mtx has order " + std::to_string(P.A.rows()) + " but the mesh has " +
         std::to_string(P.mesh.num_dofs()) + " DOFs");
  if (P.dec.num_dofs_total != P.mesh.num_dofs())
    fail(dir + "decomposition.txt covers " + std::to_string(P.dec.num_dofs_total) +
         " DOFs but the mesh has " + std::to_string(P.mesh.num_dofs()));
  P.k0 = compute_k0(P.dec, P.A);
  P.k1 = compute_k1(P.dec);

  Method method = eff.methods[0];
  CoarseBuild cb = build_coarse(eff, P, method);
  SparseSym Es = assemble_E(cb.cs, P.A);
  StrategyParams sp{eff.strategies[0], eff.lo, eff.hi, eff.drop_tol, eff.seed};
  InexactCoarseOperator cop = build_inexact_E(Eigen::MatrixXd(Es.mat), sp);

  write_matrix_market_dense(dir + "Z.mtx", cb.cs.Z);
  write_provenance_csv(dir + "Z_provenance.csv", cb.cs);
  write_matrix_market(dir + "E.mtx", Es);
  write_matrix_market_dense(dir + "Etilde.mtx", cop.Etilde);
  std::ofstream cst = open_csv(dir + "constants.csv");
  cst << "method,strategy,k0,k1,tau,gamma,lam_min_EEt,lam_max_EEt,eps_A\n";
  cst << method_name(method) << ',' << strategy_name(eff.strategies[0]) << ',' << P.k0 << ','
      << cb.k1_eff << ',' << format_g17(eff.tau) << ','
      << format_g17(method == Method::geneo2 ? eff.gamma : 0) << ','
      << format_g17(cop.lam_min) << ',' << format_g17(cop.lam_max) << ','
      << format_g17(epsilon_A_formula(cop.lam_min, cop.lam_max)) << '\n';
  cst.close();
  if (opt.verbose) verbose_coarse_notes(std::cout, cb);
  std::cout << "coarse space of dimension " << cb.cs.Z.cols() << " (" << cb.cs.raw_columns
            << " raw columns): " << dir << "Z.mtx, E.mtx, Etilde.mtx, constants.csv\n";
  return 0;
}

namespace {

// stage_solve / stage_spectrum: everything exported is read back, only data
// without a file form (local factorizations, geneo2 projectors) is re-derived
Preconditioner rebuild_preconditioner(const ExperimentConfig& eff, const std::string& dir,
                                      std::shared_ptr<const InexactCoarseOperator>* cop_out) {
  require_file(dir + "A.mtx", "assemble");
  require_file(dir + "decomposition.txt", "decompose");
  require_file(dir + "Z.mtx", "coarse");

  Problem P;
  P.mesh = build_structured_mesh(eff.dimension, eff.cells, eff.boundary);
  P.coeff = make_coefficient(eff, P.mesh, eff.contrasts[0]);
  P.A = read_matrix_market_sym(dir + "A.mtx");
  std::tie(P.dec, P.pou) = read_decomposition(dir + "decomposition.txt");
  if (P.A.rows() != P.dec.num_dofs_total)
    fail(dir + "A.mtx and decomposition.txt disagree on the DOF count");

  CoarseSpace cs;
  cs.Z = read_matrix_market_dense(dir + "Z.mtx");
  cs.raw_columns = int(cs.Z.cols());
  if (cs.Z.rows() != P.A.rows())
    fail(dir + "Z.mtx has " + std::to_string(cs.Z.rows()) + " rows but A has order " +
         std::to_string(P.A.rows()));

  SparseSym Es = assemble_E(cs, P.A);
  StrategyParams sp{eff.strategies[0], eff.lo, eff.hi, eff.drop_tol, eff.seed};
  auto cop = std::make_shared<const InexactCoarseOperator>(
      build_inexact_E(Eigen::MatrixXd(Es.mat), sp));
  if (cop_out) *cop_out = cop;

  Method method = eff.methods[0];
  if (method == Method::geneo2) {
    CoarseBuild cb;
    for (int i = 0; i < P.dec.N; ++i) {
      SparseSym B = build_b_matrix(P.mesh, P.coeff, P.dec, i, eff.b_kind, eff.alpha);
      SparseSym Aneu =
          assemble_subdomain_neumann(P.mesh, P.coeff, P.dec.cells[i], P.dec.dofs[i]);
      const bool b_spd = B.tag == Definiteness::spd;
      std::optional<EigenPairSet> lower;
      if (b_spd) lower = solve_geneo2_lower_gevp(i, Aneu, B, eff.tau);
      EigenPairSet upper = solve_geneo2_upper_gevp(i, P.A, P.dec, P.pou, B, eff.gamma);
      cb.subs.push_back(build_subdomain_projectors(lower ? &*lower : nullptr, upper,
                                                   Eigen::MatrixXd(B.mat), b_spd));
    }
    return make_geneo2_acs(P.A, P.dec, P.pou, std::move(cb.subs), cs.Z, std::move(cop),
                           eff.tau, eff.gamma);
  }
  return make_geneo_acs(P.A, P.dec, P.pou, cs.Z, std::move(cop), eff.tau);
}

}  // namespace

int stage_solve(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = effective(cfg, opt);
  require_single(eff);
  if (eff.boundary == Boundary::none)
    fail("mesh.boundary = none leaves the global system singular; solve needs a Dirichlet "
         "boundary");
  const std::string dir = eff.out_dir + "/";
  require_file(dir + "F.txt", "assemble");
  Preconditioner M = rebuild_preconditioner(eff, dir, nullptr);
  M.workers = opt.workers;
  Eigen::VectorXd F = read_vector(dir + "F.txt");
  if (F.size() != M.A.rows()) fail(dir + "F.txt length does not match A");
  auto [x, hist] = pcg_solve(M.A, F, M, eff.rel_tol, eff.max_iter);
  write_vector(dir + "solution.txt", x);
  write_convergence_csv(dir + "convergence.csv", hist);
  std::cout << "solved in " << hist.iterations << " iterations, final residual "
            << format_g17(hist.final_relative_residual) << ": " << dir << "solution.txt, "
            << dir << "convergence.csv\n";
  return hist.converged ? 0 : 1;
}

int stage_spectrum(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = effective(cfg, opt);
  require_single(eff);
  const std::string dir = eff.out_dir + "/";
  std::shared_ptr<const InexactCoarseOperator> cop;
  Preconditioner M = rebuild_preconditioner(eff, dir, &cop);
  if (M.A.rows() > eff.size_cap)
    fail("operator_spectrum: order " + std::to_string(M.A.rows()) + " exceeds the size cap " +
         std::to_string(eff.size_cap) + ", use lanczos_extremes for an estimate");
  Eigen::MatrixXd Mdense = M.densify(opt.workers);
  Eigen::VectorXd spec = spectrum_dense(Eigen::MatrixXd(M.A.mat), Mdense);
  write_spectrum_csv(dir + "spectrum.csv", spec);
  if (eff.matrices) write_matrix_market_dense(dir + "M.mtx", Mdense);
  std::cout << "spectrum of " << spec.size() << " eigenvalues in ["
            << format_g17(spec.minCoeff()) << ", " << format_g17(spec.maxCoeff())
            << "]: " << dir << "spectrum.csv\n";
  return 0;
}

int spectrum_external(const std::string& a_path, const std::string& m_path,
                      const std::string& out_dir) {
  SparseSym A = read_matrix_market_sym(a_path);
  Eigen::MatrixXd M = read_matrix_market_dense(m_path);
  Eigen::VectorXd spec = spectrum_dense(Eigen::MatrixXd(A.mat), M);
  fs::create_directories(out_dir);
  write_spectrum_csv(out_dir + "/spectrum.csv", spec);
  std::cout << "spectrum of " << spec.size() << " eigenvalues in ["
            << format_g17(spec.minCoeff()) << ", " << format_g17(spec.maxCoeff())
            << "]: " << out_dir << "/spectrum.csv\n";
  return 0;
}

int stage_report(const ExperimentConfig& cfg, const RunOptions& opt) {
  ExperimentConfig eff = effective(cfg, opt);
  require_single(eff);
  const std::string dir = eff.out_dir + "/";
  require_file(dir + "constants.csv", "coarse");
  require_file(dir + "spectrum.csv", "spectrum");

  std::ifstream cst(dir + "constants.csv");
  if (!cst) fail("cannot open " + dir + "constants.csv");
  std::string header, line;
  if (!std::getline(cst, header) || !std::getline(cst, line))
    fail(dir + "constants.csv is truncated");
  auto f = split_csv_line(line);
  if (f.size() != 9) fail(dir + "constants.csv has " + std::to_string(f.size()) +
                          " fields, expected 9");
  ReportRow row;
  row.method = method_from_name(f[0]);
  row.strategy = strategy_from_name(f[1]);
  row.k0 = int(parse_csv_double(dir + "constants.csv", f[2]));
  row.k1 = int(parse_csv_double(dir + "constants.csv", f[3]));
  row.tau = parse_csv_double(dir + "constants.csv", f[4]);
  row.gamma = parse_csv_double(dir + "constants.csv", f[5]);
  row.lam_min_EEt = parse_csv_double(dir + "constants.csv", f[6]);
  row.lam_max_EEt = parse_csv_double(dir + "constants.csv", f[7]);
  row.eps_A = parse_csv_double(dir + "constants.csv", f[8]);

  std::ifstream spc(dir + "spectrum.csv");
  if (!spc) fail("cannot open " + dir + "spectrum.csv");
  std::getline(spc, header);
  std::vector<double> eig;
  while (std::getline(spc, line)) {
    if (line.empty()) continue;
    auto parts = split_csv_line(line);
    if (parts.size() != 2) fail(dir + "spectrum.csv: malformed row '" + line + "'");
    eig.push_back(parse_csv_double(dir + "spectrum.csv", parts[1]));
  }
  if (eig.empty()) fail(dir + "spectrum.csv holds no eigenvalues");
  Eigen::VectorXd spec = Eigen::Map<Eigen::VectorXd>(eig.data(), Eigen::Index(eig.size()));

  bool pass = true;
  if (eff.bounds) {
    SpectralBoundReport rep = check_bounds(row.method, row.k0, row.k1, row.tau, row.gamma,
                                           row.lam_min_EEt, row.lam_max_EEt, spec);
    row.c_T = rep.c_T;
    row.c_R = rep.c_R;
    pass = rep.pass;
    if (opt.verbose)
      std::cout << "margins: lam_min - c_T = " << format_g17(rep.margin_low)
                << ", c_R - lam_max = " << format_g17(rep.margin_high) << '\n';
  }
  row.lam_min = spec.minCoeff();
  row.lam_max = spec.maxCoeff();
  row.cond = row.lam_max / row.lam_min;
  row.pass = pass;

  std::ofstream report = open_csv(dir + "report.csv");
  report << report_header << '\n';
  write_report_row(report, row);
  report.close();
  std::cout << "report: " << dir << "report.csv\n";
  std::cout << "result: " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : 1;
}

}  // namespace geneo
