#include "geneo/gevp.hpp"

#include <algorithm>
#include <cmath>

namespace geneo {

const char* gevp_kind_name(GevpKind k) {
  switch (k) {
    case GevpKind::geneo: return "geneo";
    case GevpKind::geneo2_lower: return "geneo2-lower";
    case GevpKind::geneo2_upper: return "geneo2-upper";
    case GevpKind::annex: return "annex";
  }
  return "?";
}

int EigenPairSet::num_selected() const {
  int c = 0;
  for (char s : selected) c += s != 0;
  return c;
}

Eigen::MatrixXd EigenPairSet::selected_vectors() const {
  Eigen::MatrixXd out(vectors.rows(), num_selected());
  int c = 0;
  for (size_t k = 0; k < selected.size(); ++k)
    if (selected[k]) out.col(c++) = vectors.col(Eigen::Index(k));
  return out;
}

Eigen::MatrixXd EigenPairSet::unselected_vectors() const {
  Eigen::MatrixXd out(vectors.rows(), int(selected.size()) - num_selected());
  int c = 0;
  for (size_t k = 0; k < selected.size(); ++k)
    if (!selected[k]) out.col(c++) = vectors.col(Eigen::Index(k));
  return out;
}

namespace {

Eigen::MatrixXd weighted_block(const SparseSym& A, const Decomposition& dec,
                               const PartitionOfUnity& pou, int i) {
  Eigen::MatrixXd L = principal_block(A.mat, dec.dofs[i]);
  const auto& w = pou.w[i];
  return w.asDiagonal() * L * w.asDiagonal();
}

// assemble the set from a pencil solution: drop degenerate columns, order by
// descending eigenvalue with +inf first, apply the strict selection rule
EigenPairSet finish(int subdomain, GevpKind kind, double threshold,
                    const Eigen::MatrixXd& Rhat, PencilSolution<double>&& sol,
                    bool select_above) {
  const Eigen::Index n = sol.lambda.size();
  std::vector<char> drop(n, 0);
  for (int k : sol.degenerate) drop[k] = 1;

  std::vector<int> order;
  order.reserve(n);
  for (Eigen::Index k = 0; k < n; ++k)
    if (!drop[k]) order.push_back(int(k));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double la = sol.lambda[a], lb = sol.lambda[b];
    if (std::isinf(la) != std::isinf(lb)) return std::isinf(la);
    return la > lb;
  });

  EigenPairSet set;
  set.subdomain = subdomain;
  set.kind = kind;
  set.threshold = threshold;
  set.shift = sol.shift;
  set.degenerate_discarded = int(sol.degenerate.size());
  set.eigenvalues.resize(order.size());
  set.vectors.resize(sol.V.rows(), Eigen::Index(order.size()));
  set.selected.resize(order.size());
  for (size_t k = 0; k < order.size(); ++k) {
    double lam = sol.lambda[order[k]];
    set.eigenvalues[Eigen::Index(k)] = lam;
    set.vectors.col(Eigen::Index(k)) = sol.V.col(order[k]);
    bool sel;
    if (std::isinf(lam))
      sel = select_above;  // kernel directions: always kept in the > pencils
    else
      sel = select_above ? lam > threshold : lam < threshold;
    set.selected[k] = sel;
    if (std::isfinite(lam) &&
        std::abs(lam - threshold) <= 1e-12 * std::max(1.0, std::abs(threshold)))
      set.near_threshold.push_back(int(k));
  }
  set.rhat_v = Rhat * set.vectors;
  return set;
}

}  // namespace

EigenPairSet solve_geneo_gevp(int j, const SparseSym& A, const Decomposition& dec,
                              const PartitionOfUnity& pou, const SparseSym& Aneu_j,
                              double tau) {
  if (tau <= 0) fail("solve_geneo_gevp: tau must be positive");
  Eigen::MatrixXd L = weighted_block(A, dec, pou, j);
  Eigen::MatrixXd R = Eigen::MatrixXd(Aneu_j.mat);
  auto sol = solve_sym_pencil<double>(L, R);
  Eigen::MatrixXd Rhat = R;
  Rhat.diagonal().array() += sol.shift;
  return finish(j, GevpKind::geneo, tau, Rhat, std::move(sol), true);
}

EigenPairSet solve_geneo2_lower_gevp(int j, const SparseSym& Aneu_j, const SparseSym& Bj,
                                     double tau) {
  if (tau <= 0) fail("solve_geneo2_lower_gevp: tau must be positive");
  if (Bj.tag == Definiteness::spsd)
    fail("solve_geneo2_lower_gevp: B is not SPD on subdomain " + std::to_string(j));
  Eigen::MatrixXd L = Eigen::MatrixXd(Aneu_j.mat);
  Eigen::MatrixXd R = Eigen::MatrixXd(Bj.mat);
  PencilOptions opt;
  opt.spd_rhs = true;
  PencilSolution<double> sol;
  try {
    sol = solve_sym_pencil<double>(L, R, opt);
  } catch (const Error&) {
    fail("solve_geneo2_lower_gevp: B is not SPD on subdomain " + std::to_string(j));
  }
  return finish(j, GevpKind::geneo2_lower, tau, R, std::move(sol), false);
}

EigenPairSet solve_geneo2_upper_gevp(int i, const SparseSym& A, const Decomposition& dec,
                                     const PartitionOfUnity& pou, const SparseSym& Bi,
                                     double gamma) {
  if (gamma <= 0) fail("solve_geneo2_upper_gevp: gamma must be positive");
  Eigen::MatrixXd L = weighted_block(A, dec, pou, i);
  Eigen::MatrixXd R = Eigen::MatrixXd(Bi.mat);
  PencilOptions opt;
  opt.spd_rhs = Bi.tag == Definiteness::spd;
  auto sol = solve_sym_pencil<double>(L, R, opt);
  Eigen::MatrixXd Rhat = R;
  Rhat.diagonal().array() += sol.shift;
  return finish(i, GevpKind::geneo2_upper, gamma, Rhat, std::move(sol), true);
}

EigenPairSet solve_annex_gevp_one(int i, const SparseSym& A, const Decomposition& ext,
                                  const PartitionOfUnity& inherited,
                                  const SparseSym& Aneu_ext, double tau) {
  if (tau <= 0) fail("solve_annex_gevp_one: tau must be positive");
  Eigen::MatrixXd L = weighted_block(A, ext, inherited, i);
  Eigen::MatrixXd R = Eigen::MatrixXd(Aneu_ext.mat);
  auto sol = solve_sym_pencil<double>(L, R);
  Eigen::MatrixXd Rhat = R;
  Rhat.diagonal().array() += sol.shift;
  EigenPairSet set = finish(i, GevpKind::annex, tau, Rhat, std::move(sol), true);

  // away from the weighted overlap the pencil rows coincide, so selected
  // eigenvectors with lambda != 1 are harmonic there
  const Eigen::Index n = R.rows();
  std::vector<char> interior(n, 0);
  for (Eigen::Index r = 0; r < n; ++r) {
    double diff = (L.row(r) - R.row(r)).cwiseAbs().maxCoeff();
    double scale = std::max(L.row(r).cwiseAbs().maxCoeff(), R.row(r).cwiseAbs().maxCoeff());
    interior[r] = diff <= 1e-12 * std::max(1.0, scale);
  }
  double rscale = R.cwiseAbs().maxCoeff();
  double worst = 0;
  for (Eigen::Index k = 0; k < set.eigenvalues.size(); ++k) {
    if (!set.selected[k]) continue;
    double lam = set.eigenvalues[k];
    if (std::isfinite(lam)) {
      // the regularizing shift displaces a true unit eigenvalue to exactly
      // 1 - shift*|v|^2 (vectors are normalized against the shifted pencil),
      // so undo that before deciding membership in the lambda = 1 cluster
      double corrected = lam + set.shift * set.vectors.col(k).squaredNorm();
      if (std::min(std::abs(lam - 1.0), std::abs(corrected - 1.0)) < 1e-6) continue;
    }
    Eigen::VectorXd res = R * set.vectors.col(k);
    double vs = set.vectors.col(k).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < n; ++r)
      if (interior[r]) worst = std::max(worst, std::abs(res[r]) / (rscale * vs));
  }
  set.harmonicity = worst;
  return set;
}

Eigen::VectorXd apply_pi_tilde(const EigenPairSet& set, const Eigen::VectorXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (size_t k = 0; k < set.selected.size(); ++k)
    if (set.selected[k])
      out += set.vectors.col(Eigen::Index(k)) * set.rhat_v.col(Eigen::Index(k)).dot(x);
  return out;
}

}  // namespace geneo
