#pragma once

#include "geneo/decomposition.hpp"
#include "geneo/pencil.hpp"

namespace geneo {

enum class GevpKind { geneo, geneo2_lower, geneo2_upper, annex };

const char* gevp_kind_name(GevpKind k);

// one subdomain's generalized eigenproblem: eigenpairs sorted by descending
// eigenvalue (+inf first), strict-threshold selection mask, tie report
struct EigenPairSet {
  int subdomain = 0;
  GevpKind kind = GevpKind::geneo;
  double threshold = 0;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;   // pencil-orthonormal columns on the subdomain DOFs
  Eigen::MatrixXd rhat_v;    // (R + shift I) * vectors, parallel-projection data
  std::vector<char> selected;
  std::vector<int> near_threshold;  // |lambda - threshold| <= 1e-12 relative
  int degenerate_discarded = 0;
  double shift = 0;
  double harmonicity = 0;  // annex: max interior residual over selected lambda != 1 pairs

  int num_selected() const;
  Eigen::MatrixXd selected_vectors() const;
  Eigen::MatrixXd unselected_vectors() const;
};

// D R A R^T D v = lambda Aneu v, keep lambda > tau; kernel directions of Aneu
// count as +inf and are always kept
EigenPairSet solve_geneo_gevp(int j, const SparseSym& A, const Decomposition& dec,
                              const PartitionOfUnity& pou, const SparseSym& Aneu_j,
                              double tau);

// Aneu v = lambda B v with SPD B, keep lambda < tau
EigenPairSet solve_geneo2_lower_gevp(int j, const SparseSym& Aneu_j, const SparseSym& Bj,
                                     double tau);

// D R A R^T D v = mu B v, keep mu > gamma; B may be the plain Neumann matrix,
// then its kernel directions are kept as +inf
EigenPairSet solve_geneo2_upper_gevp(int i, const SparseSym& A, const Decomposition& dec,
                                     const PartitionOfUnity& pou, const SparseSym& Bi,
                                     double gamma);

// geneo pencil on one extended subdomain with inherited weights; also records
// the interior-harmonicity residual of the selected eigenvectors
EigenPairSet solve_annex_gevp_one(int i, const SparseSym& A, const Decomposition& ext,
                                  const PartitionOfUnity& inherited,
                                  const SparseSym& Aneu_ext, double tau);

// projection onto the selected span along the unselected span
Eigen::VectorXd apply_pi_tilde(const EigenPairSet& set, const Eigen::VectorXd& x);

}  // namespace geneo
