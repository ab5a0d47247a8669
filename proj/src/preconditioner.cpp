#include "geneo/preconditioner.hpp"

namespace geneo {

const char* precond_kind_name(PrecondKind k) {
  switch (k) {
    case PrecondKind::one_level_as: return "one-level-AS";
    case PrecondKind::geneo_acs: return "geneo-acs";
    case PrecondKind::geneo2_acs: return "geneo2-acs";
    case PrecondKind::geneo2_nonrobust: return "geneo2-nonrobust";
  }
  fail("precond_kind_name: bad enum value");
}

namespace {

std::vector<Eigen::LLT<Eigen::MatrixXd>> factor_local_blocks(const SparseSym& A,
                                                             const Decomposition& dec) {
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt(dec.N);
  for (int i = 0; i < dec.N; ++i) {
    llt[i].compute(principal_block(A.mat, dec.dofs[i]));
    if (llt[i].info() != Eigen::Success)
      fail("local Dirichlet block on subdomain " + std::to_string(i) +
           " is not positive definite");
  }
  return llt;
}

}  // namespace

Preconditioner make_one_level_as(const SparseSym& A, const Decomposition& dec) {
  Preconditioner M;
  M.kind = PrecondKind::one_level_as;
  M.A = A;
  M.dec = dec;
  M.local_llt = factor_local_blocks(A, dec);
  M.Z.resize(A.rows(), 0);
  return M;
}

Preconditioner make_geneo_acs(const SparseSym& A, const Decomposition& dec,
                              const PartitionOfUnity& pou, const Eigen::MatrixXd& Z,
                              std::shared_ptr<const InexactCoarseOperator> coarse, double tau) {
  Preconditioner M;
  M.kind = PrecondKind::geneo_acs;
  M.A = A;
  M.dec = dec;
  M.pou = pou;
  M.local_llt = factor_local_blocks(A, dec);
  M.Z = Z;
  M.coarse = std::move(coarse);
  M.tau = tau;
  if (M.Z.cols() > 0 && (!M.coarse || M.coarse->size() != M.Z.cols()))
    fail("make_geneo_acs: coarse operator order does not match Z");
  return M;
}

namespace {

Preconditioner make_geneo2(PrecondKind kind, const SparseSym& A, const Decomposition& dec,
                           const PartitionOfUnity& pou, std::vector<SubdomainProjectors> subs,
                           const Eigen::MatrixXd& Z,
                           std::shared_ptr<const InexactCoarseOperator> coarse, double tau,
                           double gamma) {
  if (int(subs.size()) != dec.N) fail("one SubdomainProjectors entry per subdomain required");
  Preconditioner M;
  M.kind = kind;
  M.A = A;
  M.dec = dec;
  M.pou = pou;
  M.subs = std::move(subs);
  M.Z = Z;
  M.coarse = std::move(coarse);
  M.tau = tau;
  M.gamma = gamma;
  if (M.Z.cols() > 0 && (!M.coarse || M.coarse->size() != M.Z.cols()))
    fail("geneo2 preconditioner: coarse operator order does not match Z");
  for (int i = 0; i < dec.N; ++i) {
    if (kind == PrecondKind::geneo2_nonrobust && !M.subs[i].b_spd)
      fail("geneo2-nonrobust needs an SPD B on every subdomain, B on subdomain " +
           std::to_string(i) + " is only semidefinite");
    if (kind == PrecondKind::geneo2_acs && M.subs[i].Wg.cols() == 0)
      M.empty_w_subdomains.push_back(i);
  }
  return M;
}

}  // namespace

Preconditioner make_geneo2_acs(const SparseSym& A, const Decomposition& dec,
                               const PartitionOfUnity& pou,
                               std::vector<SubdomainProjectors> subs, const Eigen::MatrixXd& Z,
                               std::shared_ptr<const InexactCoarseOperator> coarse, double tau,
                               double gamma) {
  return make_geneo2(PrecondKind::geneo2_acs, A, dec, pou, std::move(subs), Z,
                     std::move(coarse), tau, gamma);
}

Preconditioner make_geneo2_nonrobust(const SparseSym& A, const Decomposition& dec,
                                     const PartitionOfUnity& pou,
                                     std::vector<SubdomainProjectors> subs,
                                     const Eigen::MatrixXd& Z,
                                     std::shared_ptr<const InexactCoarseOperator> coarse,
                                     double tau, double gamma) {
  return make_geneo2(PrecondKind::geneo2_nonrobust, A, dec, pou, std::move(subs), Z,
                     std::move(coarse), tau, gamma);
}

namespace {

// parallel per-subdomain compute, fixed-order reduce
Eigen::VectorXd local_sum(const Preconditioner& M, const Eigen::VectorXd& r) {
  std::vector<Eigen::VectorXd> contrib(M.dec.N);
  parallel_for(M.dec.N, M.workers, [&](int i) {
    Eigen::VectorXd ri = restrict_vec(M.dec.dofs[i], r);
    switch (M.kind) {
      case PrecondKind::one_level_as:
      case PrecondKind::geneo_acs:
        contrib[i] = M.local_llt[i].solve(ri);
        break;
      case PrecondKind::geneo2_acs: {
        if (M.subs[i].Wg.cols() == 0) {
          // B_i^dag has an empty domain, the subdomain only acts through Z
          contrib[i] = Eigen::VectorXd::Zero(ri.size());
          break;
        }
        Eigen::VectorXd t = M.pou.w[i].cwiseProduct(ri);
        t = apply_projection(M.subs[i], Projection::q, t);
        t = apply_pseudo_inverse_B(M.subs[i], t);
        t = apply_projection(M.subs[i], Projection::q, t);
        contrib[i] = M.pou.w[i].cwiseProduct(t);
        break;
      }
      case PrecondKind::geneo2_nonrobust: {
        Eigen::VectorXd t = M.pou.w[i].cwiseProduct(ri);
        t = M.subs[i].B_llt.solve(t);
        contrib[i] = M.pou.w[i].cwiseProduct(t);
        break;
      }
    }
  });
  Eigen::VectorXd y = Eigen::VectorXd::Zero(r.size());
  for (int i = 0; i < M.dec.N; ++i) prolong_add(M.dec.dofs[i], contrib[i], y);
  return y;
}

}  // namespace

Eigen::VectorXd Preconditioner::apply(const Eigen::VectorXd& r) const {
  if (r.size() != A.rows()) fail("preconditioner applied to a vector of the wrong size");
  if (kind == PrecondKind::one_level_as || Z.cols() == 0) return local_sum(*this, r);

  Eigen::VectorXd y0 = coarse->solve(Z.transpose() * r);
  Eigen::VectorXd r1 = r - A.mat * (Z * y0);
  Eigen::VectorXd y1 = local_sum(*this, r1);
  Eigen::VectorXd t = coarse->solve(Z.transpose() * (A.mat * y1));
  return Z * y0 + y1 - Z * t;
}

Eigen::MatrixXd Preconditioner::densify(int dense_workers) const {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd M(n, n);
  parallel_for(int(n), dense_workers, [&](int j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1;
    M.col(j) = apply(e);
  });
  return M;
}

}  // namespace geneo
