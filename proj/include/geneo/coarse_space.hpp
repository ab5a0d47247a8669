#pragma once

#include "geneo/gevp.hpp"

namespace geneo {

struct CoarseColumn {
  int subdomain = 0;
  GevpKind kind = GevpKind::geneo;
  double eigenvalue = 0;
};

struct CoarseSpace {
  Eigen::MatrixXd Z;  // n x m, columns R^T D v over all selected eigenvectors
  std::vector<CoarseColumn> cols;
  int raw_columns = 0;  // before rank cleanup
};

// deterministic merge ordered by (subdomain, descending eigenvalue); dependent
// columns are removed by column-pivoted QR at a relative tolerance, keeping
// the pivot-selected original columns so provenance survives
CoarseSpace assemble_coarse_basis(const std::vector<EigenPairSet>& sets,
                                  const Decomposition& dec, const PartitionOfUnity& pou,
                                  double cleanup_rel_tol = 1e-10);

// per-subdomain GenEO-2 machinery: xi (B-orthogonal projection onto V_gamma),
// q (Euclidean-orthogonal projection onto W_gamma), p (B-orthogonal projection
// onto V_tau + V_gamma), and the pseudo-inverse of B on W_gamma
struct SubdomainProjectors {
  int subdomain = -1;
  bool b_spd = true;
  double b_scale = 1;  // max |Bproj|, the defect reference
  Eigen::MatrixXd B;
  Eigen::LLT<Eigen::MatrixXd> B_llt;     // SPD branch
  double shift = 0;                      // SPSD branch orthogonality shift
  Eigen::MatrixXd Vt;                    // lower-GEVP selected basis
  Eigen::MatrixXd Vg;                    // upper-GEVP selected basis of V_gamma
  Eigen::MatrixXd BVg;                   // Bproj * Vg
  Eigen::LLT<Eigen::MatrixXd> GtG_llt;   // (BVg)^T BVg
  Eigen::MatrixXd Wg;                    // upper-GEVP unselected basis of W_gamma
  Eigen::LLT<Eigen::MatrixXd> Wgram_llt; // Wg^T B Wg, the Riesz matrix of b on W_gamma
  Eigen::MatrixXd Qw;                    // orthonormal span(Wg), SPSD-branch q
  Eigen::MatrixXd Cp, BCp;               // B-orthonormalized basis of V_tau + V_gamma
};

// lower == nullptr on the plain-Neumann branch where the lower pencil is skipped
SubdomainProjectors build_subdomain_projectors(const EigenPairSet* lower,
                                               const EigenPairSet& upper,
                                               const Eigen::MatrixXd& B_dense, bool b_spd);

enum class Projection { pi_tilde, xi, p, q };

Eigen::VectorXd apply_projection(const SubdomainProjectors& sp, Projection kind,
                                 const Eigen::VectorXd& x);
// (I - xi) B^{-1} on the SPD branch, Riesz solve in the W basis otherwise
Eigen::VectorXd apply_pseudo_inverse_B(const SubdomainProjectors& sp, const Eigen::VectorXd& y);

// all extended-subdomain pencils plus the resulting coarse space
std::pair<std::vector<EigenPairSet>, CoarseSpace> solve_annex_gevp(
    const SparseSym& A, const Decomposition& ext, const PartitionOfUnity& inherited,
    const std::vector<SparseSym>& Aneu_ext, double tau, double cleanup_rel_tol = 1e-10);

}  // namespace geneo
