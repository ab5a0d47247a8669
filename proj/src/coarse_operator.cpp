#include "geneo/coarse_operator.hpp"

#include <cmath>
#include <random>

#include "geneo/ichol.hpp"

namespace geneo {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::exact: return "exact";
    case Strategy::spectral_perturbation: return "spectral-perturbation";
    case Strategy::incomplete_factor: return "incomplete-factor";
    case Strategy::reduced_precision: return "reduced-precision";
  }
  fail("strategy_name: bad enum value");
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "exact") return Strategy::exact;
  if (name == "spectral-perturbation") return Strategy::spectral_perturbation;
  if (name == "incomplete-factor") return Strategy::incomplete_factor;
  if (name == "reduced-precision") return Strategy::reduced_precision;
  fail("unknown inexact strategy '" + name +
       "' (expected exact, spectral-perturbation, incomplete-factor or reduced-precision)");
}

SparseSym assemble_E(const CoarseSpace& cs, const SparseSym& A) {
  const Eigen::Index m = cs.Z.cols();
  Eigen::MatrixXd E;
  if (m == 0) {
    E.resize(0, 0);
  } else {
    Eigen::MatrixXd AZ = A.mat * cs.Z;
    E = cs.Z.transpose() * AZ;
    E = 0.5 * (E + E.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> probe(E);
    if (probe.info() != Eigen::Success)
      fail("assemble_E: Z^T A Z is not positive definite, Z is rank deficient");
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      if (E(i, j) != 0) trip.push_back({int(i), int(j), E(i, j)});
  return make_sparse_sym(trip, int(m), Definiteness::spd);
}

InexactCoarseOperator build_inexact_E(const Eigen::MatrixXd& E, const StrategyParams& p) {
  InexactCoarseOperator op;
  op.kind = p.kind;
  op.E = 0.5 * (E + E.transpose());
  const Eigen::Index m = op.E.rows();
  if (m > 0) {
    op.E_llt.compute(op.E);
    if (op.E_llt.info() != Eigen::Success) fail("build_inexact_E: E is not positive definite");
  }

  switch (p.kind) {
    case Strategy::exact:
      op.Etilde = op.E;
      op.Et_llt = op.E_llt;
      break;
    case Strategy::spectral_perturbation: {
      if (p.lo <= 0 || p.hi < p.lo)
        fail("build_inexact_E: spectral perturbation needs 0 < lo <= hi");
      op.pert_L = op.E_llt.matrixL();
      op.pert_d.resize(m);
      std::mt19937_64 rng(p.seed);
      for (Eigen::Index k = 0; k < m; ++k) {
        double u = std::ldexp(double(rng() >> 11), -53);
        op.pert_d[k] = p.lo + (p.hi - p.lo) * u;
      }
      // force the spectrum of E Etilde^{-1} to reach 1/hi and 1/lo exactly
      if (m >= 1) op.pert_d[0] = p.lo;
      if (m >= 2) op.pert_d[m - 1] = p.hi;
      op.Etilde = op.pert_L * op.pert_d.asDiagonal() * op.pert_L.transpose();
      op.Etilde = 0.5 * (op.Etilde + op.Etilde.transpose()).eval();
      break;
    }
    case Strategy::incomplete_factor: {
      auto ic = incomplete_cholesky<double>(op.E, p.drop_tol);
      op.ic_L = ic.L;
      op.ic_shift = ic.shift;
      op.Etilde = op.ic_L * op.ic_L.transpose();
      break;
    }
    case Strategy::reduced_precision: {
      op.Etilde = op.E.cast<float>().cast<double>();
      op.Etilde = 0.5 * (op.Etilde + op.Etilde.transpose()).eval();
      if (m > 0) {
        op.Et_llt.compute(op.Etilde);
        if (op.Et_llt.info() != Eigen::Success)
          fail("build_inexact_E: reduced-precision rounding destroyed positive definiteness");
      }
      break;
    }
  }

  if (m == 0 || p.kind == Strategy::exact) {
    // Etilde is E itself, the pencil spectrum is {1}; running the solver on an
    // ill-conditioned E would only report its own rounding noise
    op.lam_min = op.lam_max = 1;
    return op;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(op.E, op.Etilde,
                                                               Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail("build_inexact_E: eigensolve of (E, Etilde) failed");
  op.lam_min = es.eigenvalues().minCoeff();
  op.lam_max = es.eigenvalues().maxCoeff();
  if (op.lam_min <= 0) fail("build_inexact_E: Etilde is not positive definite");
  return op;
}

Eigen::VectorXd InexactCoarseOperator::solve(const Eigen::VectorXd& rhs) const {
  switch (kind) {
    case Strategy::exact:
    case Strategy::reduced_precision:
      return Et_llt.solve(rhs);
    case Strategy::spectral_perturbation: {
      Eigen::VectorXd y = pert_L.triangularView<Eigen::Lower>().solve(rhs);
      y.array() /= pert_d.array();
      return pert_L.transpose().triangularView<Eigen::Upper>().solve(y);
    }
    case Strategy::incomplete_factor: {
      Eigen::VectorXd y = ic_L.triangularView<Eigen::Lower>().solve(rhs);
      return ic_L.transpose().triangularView<Eigen::Upper>().solve(y);
    }
  }
  fail("InexactCoarseOperator::solve: bad enum value");
}

Eigen::VectorXd InexactCoarseOperator::solve_exact(const Eigen::VectorXd& rhs) const {
  return E_llt.solve(rhs);
}

Eigen::VectorXd apply_P0(const SparseSym& A, const Eigen::MatrixXd& Z,
                         const InexactCoarseOperator& C, const Eigen::VectorXd& x) {
  if (Z.cols() == 0) return Eigen::VectorXd::Zero(x.size());
  return Z * C.solve_exact(Z.transpose() * (A.mat * x));
}

Eigen::VectorXd apply_P0_tilde(const SparseSym& A, const Eigen::MatrixXd& Z,
                               const InexactCoarseOperator& C, const Eigen::VectorXd& x) {
  if (Z.cols() == 0) return Eigen::VectorXd::Zero(x.size());
  return Z * C.solve(Z.transpose() * (A.mat * x));
}

double epsilon_A_formula(double lam_min, double lam_max) {
  return std::max(std::abs(1 - lam_min), std::abs(1 - lam_max));
}

double epsilon_A_direct(const SparseSym& A, const Eigen::MatrixXd& Z,
                        const InexactCoarseOperator& C, int size_cap) {
  const Eigen::Index n = A.rows();
  if (n > size_cap)
    fail("epsilon_A_direct: problem size " + std::to_string(n) + " exceeds the size cap " +
         std::to_string(size_cap) + ", use formula mode");
  if (Z.cols() == 0) return 0;

  Eigen::MatrixXd Ad(A.mat);
  Eigen::LLT<Eigen::MatrixXd> lltA(Ad);
  if (lltA.info() != Eigen::Success) fail("epsilon_A_direct: A is not positive definite");

  // Delta = P0 - P0_tilde = Z (E^{-1} - Etilde^{-1}) Z^T A, column by column
  Eigen::MatrixXd ZtA = Z.transpose() * Ad;
  Eigen::MatrixXd D(Z.cols(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd r = ZtA.col(j);
    D.col(j) = C.solve_exact(r) - C.solve(r);
  }
  Eigen::MatrixXd Delta = Z * D;

  // ||Delta||_A = spectral radius of L^{-1} (A Delta) L^{-T}, A = L L^T
  Eigen::MatrixXd S = Ad * Delta;
  lltA.matrixL().solveInPlace(S);
  Eigen::MatrixXd St = S.transpose();
  lltA.matrixL().solveInPlace(St);
  S = St.transpose();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail("epsilon_A_direct: eigensolve failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace geneo
