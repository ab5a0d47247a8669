#pragma once

#include <memory>

#include "geneo/coarse_operator.hpp"
#include "geneo/decomposition.hpp"

namespace geneo {

enum class PrecondKind { one_level_as, geneo_acs, geneo2_acs, geneo2_nonrobust };

const char* precond_kind_name(PrecondKind k);

// immutable once built; apply() is reentrant. Local solves are exact Cholesky
// factorizations, only the coarse solve goes through Etilde.
struct Preconditioner {
  PrecondKind kind = PrecondKind::one_level_as;
  SparseSym A;
  Decomposition dec;
  PartitionOfUnity pou;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> local_llt;  // Ri A Ri^T, Schwarz kinds
  std::vector<SubdomainProjectors> subs;               // GenEO-2 kinds
  Eigen::MatrixXd Z;
  std::shared_ptr<const InexactCoarseOperator> coarse;
  double tau = 0, gamma = 0;
  std::vector<int> empty_w_subdomains;  // W_gamma empty, local term vanishes there
  int workers = 1;

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  Eigen::MatrixXd densify(int dense_workers = 1) const;
};

Preconditioner make_one_level_as(const SparseSym& A, const Decomposition& dec);
Preconditioner make_geneo_acs(const SparseSym& A, const Decomposition& dec,
                              const PartitionOfUnity& pou, const Eigen::MatrixXd& Z,
                              std::shared_ptr<const InexactCoarseOperator> coarse, double tau);
Preconditioner make_geneo2_acs(const SparseSym& A, const Decomposition& dec,
                               const PartitionOfUnity& pou,
                               std::vector<SubdomainProjectors> subs, const Eigen::MatrixXd& Z,
                               std::shared_ptr<const InexactCoarseOperator> coarse, double tau,
                               double gamma);
// coarse solves as in geneo2_acs but plain B_i^{-1} local solves; every B_i
// must be SPD
Preconditioner make_geneo2_nonrobust(const SparseSym& A, const Decomposition& dec,
                                     const PartitionOfUnity& pou,
                                     std::vector<SubdomainProjectors> subs,
                                     const Eigen::MatrixXd& Z,
                                     std::shared_ptr<const InexactCoarseOperator> coarse,
                                     double tau, double gamma);

}  // namespace geneo
