#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "geneo/types.hpp"

namespace geneo {

struct PencilOptions {
  double shift_rel = 1e-12;      // sigma = shift_rel * trace(R)/n
  double kernel_factor = 100.0;  // Rayleigh(R) below kernel_factor*sigma => kernel of R
  double degenerate_rel = 1e-10; // kernel of R with Rayleigh(L) below this * scale(L) too
  bool spd_rhs = false;          // require SPD R and skip the shift
};

template <typename Scalar>
struct PencilSolution {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
  Vec lambda;                   // ascending; +inf on kernel-of-R directions
  Mat V;                        // columns orthonormal against the shifted R
  std::vector<int> infinite;
  std::vector<int> degenerate;  // common-kernel columns, to be discarded by callers
  Scalar shift = 0;
};

// dense symmetric pencil L v = lambda R v; a singular R is handled by a
// trace-scaled diagonal shift and kernel directions come back as +inf
template <typename Scalar>
PencilSolution<Scalar> solve_sym_pencil(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& L,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& R,
    const PencilOptions& opt = {}) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = L.rows();
  if (L.cols() != n || R.rows() != n || R.cols() != n)
    fail("solve_sym_pencil: operand size mismatch");
  if (n == 0) fail("solve_sym_pencil: empty pencil");

  PencilSolution<Scalar> sol;
  Mat Rhat = R;
  if (opt.spd_rhs) {
    Eigen::LLT<Mat> llt(R);
    if (llt.info() != Eigen::Success)
      fail("solve_sym_pencil: right-hand matrix is not SPD");
  } else {
    Scalar sigma = Scalar(opt.shift_rel) * R.trace() / Scalar(n);
    if (!(sigma > 0)) fail("solve_sym_pencil: right-hand matrix has nonpositive trace");
    Rhat.diagonal().array() += sigma;
    sol.shift = sigma;
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(L, Rhat,
                                                   Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) fail("solve_sym_pencil: eigensolver failed");
  sol.lambda = es.eigenvalues();
  sol.V = es.eigenvectors();

  if (!opt.spd_rhs) {
    Scalar lscale = L.cwiseAbs().maxCoeff();
    if (lscale == 0) lscale = 1;
    for (Eigen::Index k = 0; k < n; ++k) {
      auto v = sol.V.col(k);
      Scalar nrm2 = v.squaredNorm();
      Scalar rr = v.dot(R * v) / nrm2;
      if (rr < Scalar(opt.kernel_factor) * sol.shift) {
        Scalar ll = v.dot(L * v) / nrm2;
        if (ll <= Scalar(opt.degenerate_rel) * lscale)
          sol.degenerate.push_back(int(k));
        else {
          sol.infinite.push_back(int(k));
          sol.lambda[k] = std::numeric_limits<Scalar>::infinity();
        }
      }
    }
  }
  return sol;
}

}  // namespace geneo
