#pragma once

#include <cstdint>

#include "geneo/coarse_space.hpp"

namespace geneo {

enum class Strategy { exact, spectral_perturbation, incomplete_factor, reduced_precision };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct StrategyParams {
  Strategy kind = Strategy::exact;
  double lo = 0.5, hi = 2.0;   // spectral perturbation eigenvalue range of Etilde vs E
  double drop_tol = 1e-2;      // incomplete factor
  std::uint64_t seed = 0;
};

// E = Z^T A Z together with an SPD approximation Etilde and the extreme
// eigenvalues of E Etilde^{-1} that drive the perturbation bounds
struct InexactCoarseOperator {
  Strategy kind = Strategy::exact;
  Eigen::MatrixXd E;
  Eigen::MatrixXd Etilde;
  Eigen::LLT<Eigen::MatrixXd> E_llt;
  Eigen::LLT<Eigen::MatrixXd> Et_llt;  // exact / reduced-precision application
  Eigen::MatrixXd pert_L;
  Eigen::VectorXd pert_d;              // Etilde = L diag(d) L^T
  Eigen::MatrixXd ic_L;
  double ic_shift = 0;
  double lam_min = 1, lam_max = 1;

  Eigen::Index size() const { return E.rows(); }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;        // Etilde^{-1}
  Eigen::VectorXd solve_exact(const Eigen::VectorXd& rhs) const;  // E^{-1}
};

// Cholesky failure here reports a rank-deficient coarse basis
SparseSym assemble_E(const CoarseSpace& cs, const SparseSym& A);

InexactCoarseOperator build_inexact_E(const Eigen::MatrixXd& E, const StrategyParams& p);

// P0 = Z E^{-1} Z^T A and its inexact counterpart
Eigen::VectorXd apply_P0(const SparseSym& A, const Eigen::MatrixXd& Z,
                         const InexactCoarseOperator& C, const Eigen::VectorXd& x);
Eigen::VectorXd apply_P0_tilde(const SparseSym& A, const Eigen::MatrixXd& Z,
                               const InexactCoarseOperator& C, const Eigen::VectorXd& x);

double epsilon_A_formula(double lam_min, double lam_max);
// ||P0 - P0_tilde||_A by a dense eigensolve of L^{-1}(A Delta)L^{-T}; kept
// independent of the eigenvalue route above on purpose
double epsilon_A_direct(const SparseSym& A, const Eigen::MatrixXd& Z,
                        const InexactCoarseOperator& C, int size_cap = 2000);

}  // namespace geneo
