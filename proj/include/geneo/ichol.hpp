#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "geneo/types.hpp"

namespace geneo {

template <typename Scalar>
struct IncompleteCholesky {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> L;
  Scalar shift = 0;  // final diagonal shift, 0 when no restart was needed
  int attempts = 1;
};

// dense-storage incomplete Cholesky: computed L(i,j) is dropped when
// |L(i,j)| <= drop_tol * sqrt(E(i,i)); a nonpositive pivot restarts the whole
// factorization with E + shift*diag(E), shift = 1e-3 then x10 per retry.
// drop_tol = 0 reproduces the exact factor.
template <typename Scalar>
IncompleteCholesky<Scalar> incomplete_cholesky(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& E, Scalar drop_tol) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (drop_tol < 0) fail("incomplete_cholesky: negative drop tolerance");
  const Eigen::Index n = E.rows();
  IncompleteCholesky<Scalar> out;
  Scalar shift = 0;
  for (int attempt = 1; attempt <= 40; ++attempt) {
    Mat L = Mat::Zero(n, n);
    bool ok = true;
    for (Eigen::Index j = 0; j < n && ok; ++j) {
      Scalar pivot = E(j, j) + shift * E(j, j);
      if (j > 0) pivot -= L.row(j).head(j).squaredNorm();
      if (!(pivot > 0)) {
        ok = false;
        break;
      }
      L(j, j) = std::sqrt(pivot);
      for (Eigen::Index i = j + 1; i < n; ++i) {
        Scalar v = E(i, j);
        if (j > 0) v -= L.row(i).head(j).dot(L.row(j).head(j));
        v /= L(j, j);
        L(i, j) = std::abs(v) <= drop_tol * std::sqrt(E(i, i)) ? Scalar(0) : v;
      }
    }
    if (ok) {
      out.L = std::move(L);
      out.shift = shift;
      out.attempts = attempt;
      return out;
    }
    shift = shift == 0 ? Scalar(1e-3) : shift * 10;
  }
  fail("incomplete_cholesky: no positive pivot sequence found");
}

}  // namespace geneo
