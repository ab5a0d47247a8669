#pragma once

#include "geneo/mesh.hpp"

namespace geneo {

// overlapping cell decomposition; dofs[i] is the sorted free-DOF set of
// subdomain i and indexes rows of every per-subdomain matrix
struct Decomposition {
  int N = 0;
  int overlap = 0;
  std::array<int, 2> grid = {0, 0};
  std::vector<std::vector<int>> cells;
  std::vector<std::vector<int>> dofs;
  int num_cells_total = 0;
  int num_dofs_total = 0;
};

struct PartitionOfUnity {
  std::vector<Eigen::VectorXd> w;  // aligned with Decomposition::dofs
};

struct MultiplicityConstants {
  int k0 = 0;
  int k1 = 0;
};

Decomposition build_overlapping_decomposition(const Mesh& mesh, std::array<int, 2> grid,
                                              int overlap_layers);

// inverse multiplicity weights
PartitionOfUnity build_partition_of_unity(const Decomposition& dec);

// max over i of #{j : Rj A Ri^T != 0}, threshold 1e-14 * max|A|
int compute_k0(const Decomposition& dec, const SparseSym& A);

// max cell membership multiplicity
int compute_k1(const Decomposition& dec);

// grow each cell set by vertex-adjacency layers; DOF sets follow
Decomposition extend_decomposition(const Mesh& mesh, const Decomposition& dec, int layers);

// weights of the base decomposition carried onto the extension, zero outside
// the base DOF set; deliberately not a partition of unity there
PartitionOfUnity inherit_partition_of_unity(const Decomposition& base,
                                            const PartitionOfUnity& pou,
                                            const Decomposition& ext);

Eigen::VectorXd restrict_vec(const std::vector<int>& dofs, const Eigen::VectorXd& x);
void prolong_add(const std::vector<int>& dofs, const Eigen::VectorXd& local, Eigen::VectorXd& x);
// dense Ri A Ri^T
Eigen::MatrixXd principal_block(const Eigen::SparseMatrix<double>& A, const std::vector<int>& dofs);

}  // namespace geneo
