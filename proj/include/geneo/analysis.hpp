#pragma once

#include <cmath>
#include <cstdint>

#include "geneo/preconditioner.hpp"

namespace geneo {

struct ConvergenceHistory {
  int iterations = 0;
  std::vector<double> residuals;  // sqrt(r^T M r) per iteration, entry 0 is the start
  std::vector<double> alpha, beta;
  double final_relative_residual = 0;  // true residual ||F - Ax|| / ||F||
  double wall_seconds = 0;
  bool converged = false;
};

std::pair<Eigen::VectorXd, ConvergenceHistory> pcg_solve(const SparseSym& A,
                                                         const Eigen::VectorXd& F,
                                                         const Preconditioner& M, double rel_tol,
                                                         int max_iter);

// eigenvalues of M A for dense symmetric M and SPD A, ascending
Eigen::VectorXd spectrum_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M);
// densifies the preconditioner; refuses above size_cap, use lanczos_extremes there
Eigen::VectorXd operator_spectrum(const SparseSym& A, const Preconditioner& M,
                                  int size_cap = 3000, int workers = 1);
// estimated extreme eigenvalues of M^{-1}A from the CG tridiagonal on a random
// right-hand side; an estimate, not a verification
std::pair<double, double> lanczos_extremes(const SparseSym& A, const Preconditioner& M,
                                           int iterations, std::uint64_t seed = 0);

// min over delta > 0 of max(c + alpha*delta, d + beta/delta)
template <typename Scalar>
Scalar optannexe_min(Scalar c, Scalar d, Scalar alpha, Scalar beta) {
  if (c < 0 || d < 0 || alpha < 0 || beta < 0) fail("optannexe_min: arguments must be >= 0");
  return (d + c + std::sqrt((d - c) * (d - c) + 4 * alpha * beta)) / 2;
}

struct BoundPair {
  double c_T = 0, c_R = 0;
};

BoundPair bounds_geneo(int k0, int k1, double tau, double lam_min_EEt, double lam_max_EEt);
BoundPair bounds_geneo2(int k0, int k1, double tau, double gamma, double lam_min_EEt,
                        double lam_max_EEt);

enum class Method { geneo, geneo2, annex_geneo };
const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct SpectralBoundReport {
  Method method = Method::geneo;
  int k0 = 0, k1 = 0;
  double tau = 0, gamma = 0;
  double lam_min_EEt = 1, lam_max_EEt = 1, eps_A = 0;
  double c_T = 0, c_R = 0;
  double lam_min = 0, lam_max = 0;  // measured spectrum extremes
  double cond = 0, cond_bound = 0;
  double margin_low = 0, margin_high = 0;
  bool pass = false;
};

// gamma must be 0 for geneo/annex-geneo and positive for geneo2; annex-geneo
// expects the extended decomposition's k1
SpectralBoundReport check_bounds(Method method, int k0, int k1, double tau, double gamma,
                                 double lam_min_EEt, double lam_max_EEt,
                                 const Eigen::VectorXd& spectrum);

int pcg_iteration_bound(double c_T, double c_R, double rel_tol);

}  // namespace geneo
