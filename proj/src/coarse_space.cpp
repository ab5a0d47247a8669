#include "geneo/coarse_space.hpp"

#include <algorithm>
#include <cmath>

namespace geneo {

CoarseSpace assemble_coarse_basis(const std::vector<EigenPairSet>& sets,
                                  const Decomposition& dec, const PartitionOfUnity& pou,
                                  double cleanup_rel_tol) {
  struct Entry {
    int subdomain;
    double eigenvalue;
    GevpKind kind;
    const EigenPairSet* set;
    int col;
  };
  std::vector<Entry> entries;
  for (const auto& set : sets)
    for (size_t k = 0; k < set.selected.size(); ++k)
      if (set.selected[k])
        entries.push_back({set.subdomain, set.eigenvalues[Eigen::Index(k)], set.kind, &set, int(k)});
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.subdomain != b.subdomain) return a.subdomain < b.subdomain;
    if (std::isinf(a.eigenvalue) != std::isinf(b.eigenvalue)) return std::isinf(a.eigenvalue);
    if (a.eigenvalue != b.eigenvalue) return a.eigenvalue > b.eigenvalue;
    return int(a.kind) < int(b.kind);
  });

  const int n = dec.num_dofs_total;
  CoarseSpace cs;
  cs.raw_columns = int(entries.size());
  Eigen::MatrixXd Zraw(n, entries.size());
  std::vector<CoarseColumn> raw_cols;
  raw_cols.reserve(entries.size());
  for (size_t c = 0; c < entries.size(); ++c) {
    const Entry& e = entries[c];
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    const auto& dofs = dec.dofs[e.subdomain];
    const auto& w = pou.w[e.subdomain];
    for (size_t r = 0; r < dofs.size(); ++r)
      full[dofs[r]] = w[r] * e.set->vectors(Eigen::Index(r), e.col);
    Zraw.col(Eigen::Index(c)) = full;
    raw_cols.push_back({e.subdomain, e.kind, e.eigenvalue});
  }

  if (entries.empty()) {
    cs.Z.resize(n, 0);
    return cs;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Zraw);
  Eigen::VectorXd rdiag = qr.matrixQR().diagonal().cwiseAbs();
  int rank = 0;
  for (Eigen::Index k = 0; k < rdiag.size(); ++k)
    if (rdiag[k] > cleanup_rel_tol * rdiag[0]) ++rank;
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> keep(perm.data(), perm.data() + rank);
  std::sort(keep.begin(), keep.end());

  cs.Z.resize(n, rank);
  cs.cols.reserve(rank);
  for (int k = 0; k < rank; ++k) {
    cs.Z.col(k) = Zraw.col(keep[k]);
    cs.cols.push_back(raw_cols[keep[k]]);
  }
  return cs;
}

SubdomainProjectors build_subdomain_projectors(const EigenPairSet* lower,
                                               const EigenPairSet& upper,
                                               const Eigen::MatrixXd& B_dense, bool b_spd) {
  SubdomainProjectors sp;
  sp.subdomain = upper.subdomain;
  sp.b_spd = b_spd;
  sp.B = B_dense;
  const Eigen::Index n = B_dense.rows();

  Eigen::MatrixXd Bproj = B_dense;  // orthogonality matrix behind xi and p
  if (b_spd) {
    sp.B_llt.compute(B_dense);
    if (sp.B_llt.info() != Eigen::Success)
      fail("build_subdomain_projectors: B is not SPD on subdomain " +
           std::to_string(upper.subdomain));
  } else {
    sp.shift = upper.shift;
    Bproj.diagonal().array() += sp.shift;
  }
  sp.b_scale = n > 0 ? Bproj.cwiseAbs().maxCoeff() : 1;
  if (sp.b_scale == 0) sp.b_scale = 1;

  sp.Vg = upper.selected_vectors();
  sp.Wg = upper.unselected_vectors();
  sp.Vt = lower ? lower->selected_vectors() : Eigen::MatrixXd(n, 0);
  sp.BVg = Bproj * sp.Vg;
  if (sp.Vg.cols() > 0) {
    sp.GtG_llt.compute(sp.BVg.transpose() * sp.BVg);
    if (sp.GtG_llt.info() != Eigen::Success)
      fail("build_subdomain_projectors: degenerate V_gamma basis");
  }
  if (sp.Wg.cols() > 0) {
    sp.Wgram_llt.compute(sp.Wg.transpose() * B_dense * sp.Wg);
    if (sp.Wgram_llt.info() != Eigen::Success)
      fail("build_subdomain_projectors: B is not positive on W_gamma");
    if (!b_spd) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(sp.Wg);
      sp.Qw = qr.householderQ() * Eigen::MatrixXd::Identity(n, sp.Wg.cols());
    }
  }

  // B-orthonormalize [Vt Vg] by pivoted QR in the Cholesky metric; the two
  // pencils can nearly intersect and a Gram-matrix route would lose the
  // orthonormality of Cp there
  Eigen::MatrixXd C(n, sp.Vt.cols() + sp.Vg.cols());
  C << sp.Vt, sp.Vg;
  if (C.cols() > 0) {
    Eigen::LLT<Eigen::MatrixXd> proj_llt;
    const Eigen::LLT<Eigen::MatrixXd>* llt = &sp.B_llt;
    if (!b_spd) {
      proj_llt.compute(Bproj);
      if (proj_llt.info() != Eigen::Success)
        fail("build_subdomain_projectors: shifted B is not positive definite");
      llt = &proj_llt;
    }
    Eigen::MatrixXd Chat = llt->matrixL().transpose() * C;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Chat);
    qr.setThreshold(1e-6);
    Eigen::Index r = qr.rank();
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
    sp.Cp = llt->matrixL().transpose().solve(Q);
    sp.BCp = Bproj * sp.Cp;
  } else {
    sp.Cp.resize(n, 0);
    sp.BCp.resize(n, 0);
  }
  return sp;
}

Eigen::VectorXd apply_projection(const SubdomainProjectors& sp, Projection kind,
                                 const Eigen::VectorXd& x) {
  if (x.size() != sp.B.rows()) fail("apply_projection: vector size does not match the subdomain");
  switch (kind) {
    case Projection::pi_tilde:
      fail("apply_projection: pi_tilde lives on the EigenPairSet, use apply_pi_tilde");
    case Projection::xi:
      if (sp.Vg.cols() == 0) return Eigen::VectorXd::Zero(x.size());
      return sp.Vg * (sp.BVg.transpose() * x);
    case Projection::p:
      if (sp.Cp.cols() == 0) return Eigen::VectorXd::Zero(x.size());
      return sp.Cp * (sp.BCp.transpose() * x);
    case Projection::q:
      if (sp.b_spd) {
        if (sp.Vg.cols() == 0) return x;
        return x - sp.BVg * sp.GtG_llt.solve(sp.BVg.transpose() * x);
      }
      if (sp.Wg.cols() == 0) return Eigen::VectorXd::Zero(x.size());
      return sp.Qw * (sp.Qw.transpose() * x);
  }
  fail("apply_projection: unknown kind");
}

Eigen::VectorXd apply_pseudo_inverse_B(const SubdomainProjectors& sp, const Eigen::VectorXd& y) {
  if (y.size() != sp.B.rows())
    fail("apply_pseudo_inverse_B: vector size does not match the subdomain");
  if (sp.Vg.cols() > 0) {
    double yn = y.norm();
    if (yn > 0) {
      double defect = (sp.BVg.transpose() * y).norm() / (sp.b_scale * yn);
      if (defect > 1e-8)
        fail("apply_pseudo_inverse_B: input is not in W_gamma, B-orthogonality defect " +
             format_g17(defect));
    }
  }
  if (sp.b_spd) {
    Eigen::VectorXd z = sp.B_llt.solve(y);
    if (sp.Vg.cols() > 0) z -= sp.Vg * (sp.BVg.transpose() * z);
    return z;
  }
  if (sp.Wg.cols() == 0) return Eigen::VectorXd::Zero(y.size());
  return sp.Wg * sp.Wgram_llt.solve(sp.Wg.transpose() * y);
}

std::pair<std::vector<EigenPairSet>, CoarseSpace> solve_annex_gevp(
    const SparseSym& A, const Decomposition& ext, const PartitionOfUnity& inherited,
    const std::vector<SparseSym>& Aneu_ext, double tau, double cleanup_rel_tol) {
  if (int(Aneu_ext.size()) != ext.N) fail("solve_annex_gevp: Neumann matrix count mismatch");
  std::vector<EigenPairSet> sets;
  sets.reserve(ext.N);
  for (int i = 0; i < ext.N; ++i)
    sets.push_back(solve_annex_gevp_one(i, A, ext, inherited, Aneu_ext[i], tau));
  CoarseSpace cs = assemble_coarse_basis(sets, ext, inherited, cleanup_rel_tol);
  return {std::move(sets), std::move(cs)};
}

}  // namespace geneo
