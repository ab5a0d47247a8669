#include "geneo/decomposition.hpp"

#include <algorithm>

namespace geneo {

namespace {

// cells and free DOFs of a set of grid quads (segments in 1d)
void quads_to_cells_dofs(const Mesh& mesh, const std::vector<char>& inset,
                         std::vector<int>& cells, std::vector<int>& dofs) {
  cells.clear();
  dofs.clear();
  std::vector<char> dofmark(mesh.num_dofs(), 0);
  for (int q = 0; q < mesh.num_quads(); ++q) {
    if (!inset[q]) continue;
    if (mesh.dim == 1)
      cells.push_back(q);
    else {
      cells.push_back(2 * q);
      cells.push_back(2 * q + 1);
    }
  }
  for (int c : cells) {
    auto v = mesh.cell_vertices(c);
    for (int a = 0; a < mesh.cell_num_vertices(); ++a) {
      int d = mesh.vertex_to_dof[v[a]];
      if (d >= 0) dofmark[d] = 1;
    }
  }
  for (int d = 0; d < mesh.num_dofs(); ++d)
    if (dofmark[d]) dofs.push_back(d);
}

}  // namespace

Decomposition build_overlapping_decomposition(const Mesh& mesh, std::array<int, 2> grid,
                                              int overlap_layers) {
  if (mesh.dim == 1) grid[1] = 1;
  if (grid[0] < 1 || grid[1] < 1) fail("build_overlapping_decomposition: bad subdomain grid");
  if (grid[0] > mesh.n || (mesh.dim == 2 && grid[1] > mesh.n))
    fail("build_overlapping_decomposition: more subdomains than cells per direction");
  if (mesh.n % grid[0] != 0 || (mesh.dim == 2 && mesh.n % grid[1] != 0))
    fail("build_overlapping_decomposition: subdomain grid does not divide the cell grid");
  if (overlap_layers < 0) fail("build_overlapping_decomposition: negative overlap");

  Decomposition dec;
  dec.N = grid[0] * grid[1];
  dec.overlap = overlap_layers;
  dec.grid = grid;
  dec.num_cells_total = mesh.num_cells();
  dec.num_dofs_total = mesh.num_dofs();
  dec.cells.resize(dec.N);
  dec.dofs.resize(dec.N);

  int n = mesh.n;
  int ny = mesh.dim == 1 ? 1 : n;
  for (int by = 0; by < grid[1]; ++by)
    for (int bx = 0; bx < grid[0]; ++bx) {
      int xlo = bx * n / grid[0], xhi = (bx + 1) * n / grid[0];
      int ylo = by * ny / grid[1], yhi = (by + 1) * ny / grid[1];
      xlo = std::max(0, xlo - overlap_layers);
      xhi = std::min(n, xhi + overlap_layers);
      if (mesh.dim == 2) {
        ylo = std::max(0, ylo - overlap_layers);
        yhi = std::min(ny, yhi + overlap_layers);
      }
      std::vector<char> inset(mesh.num_quads(), 0);
      for (int iy = ylo; iy < yhi; ++iy)
        for (int ix = xlo; ix < xhi; ++ix) inset[iy * n + ix] = 1;
      int s = by * grid[0] + bx;
      quads_to_cells_dofs(mesh, inset, dec.cells[s], dec.dofs[s]);
      if (dec.cells[s].empty()) fail("build_overlapping_decomposition: empty subdomain");
      if (dec.N > 1 && int(dec.cells[s].size()) == mesh.num_cells())
        fail("build_overlapping_decomposition: overlap swallows the mesh");
    }
  return dec;
}

PartitionOfUnity build_partition_of_unity(const Decomposition& dec) {
  std::vector<int> mult(dec.num_dofs_total, 0);
  for (int s = 0; s < dec.N; ++s)
    for (int d : dec.dofs[s]) ++mult[d];
  for (int d = 0; d < dec.num_dofs_total; ++d)
    if (mult[d] == 0) fail("build_partition_of_unity: DOF covered by no subdomain");
  PartitionOfUnity pou;
  pou.w.resize(dec.N);
  for (int s = 0; s < dec.N; ++s) {
    pou.w[s].resize(dec.dofs[s].size());
    for (size_t i = 0; i < dec.dofs[s].size(); ++i)
      pou.w[s][i] = 1.0 / mult[dec.dofs[s][i]];
  }
  return pou;
}

int compute_k0(const Decomposition& dec, const SparseSym& A) {
  double tol = 1e-14 * max_abs(A.mat);
  std::vector<std::vector<char>> mark(dec.N, std::vector<char>(dec.num_dofs_total, 0));
  for (int s = 0; s < dec.N; ++s)
    for (int d : dec.dofs[s]) mark[s][d] = 1;
  int k0 = 0;
  for (int i = 0; i < dec.N; ++i) {
    int count = 0;
    for (int j = 0; j < dec.N; ++j) {
      bool hit = false;
      for (int c : dec.dofs[i]) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A.mat, c); it && !hit; ++it)
          if (std::abs(it.value()) > tol && mark[j][it.row()]) hit = true;
        if (hit) break;
      }
      if (hit) ++count;
    }
    k0 = std::max(k0, count);
  }
  return k0;
}

int compute_k1(const Decomposition& dec) {
  std::vector<int> mult(dec.num_cells_total, 0);
  for (int s = 0; s < dec.N; ++s)
    for (int c : dec.cells[s]) ++mult[c];
  return *std::max_element(mult.begin(), mult.end());
}

Decomposition extend_decomposition(const Mesh& mesh, const Decomposition& dec, int layers) {
  if (layers < 0) fail("extend_decomposition: negative layer count");
  Decomposition ext = dec;
  int n = mesh.n;
  int ny = mesh.dim == 1 ? 1 : n;
  for (int s = 0; s < dec.N; ++s) {
    std::vector<char> inset(mesh.num_quads(), 0);
    for (int c : dec.cells[s]) inset[mesh.quad_of_cell(c)] = 1;
    for (int l = 0; l < layers; ++l) {
      std::vector<char> grown = inset;
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          if (!inset[iy * n + ix]) continue;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              int jx = ix + dx, jy = iy + dy;
              if (jx >= 0 && jx < n && jy >= 0 && jy < ny) grown[jy * n + jx] = 1;
            }
        }
      inset.swap(grown);
    }
    quads_to_cells_dofs(mesh, inset, ext.cells[s], ext.dofs[s]);
  }
  return ext;
}

PartitionOfUnity inherit_partition_of_unity(const Decomposition& base,
                                            const PartitionOfUnity& pou,
                                            const Decomposition& ext) {
  PartitionOfUnity out;
  out.w.resize(ext.N);
  for (int s = 0; s < ext.N; ++s) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(base.num_dofs_total);
    for (size_t i = 0; i < base.dofs[s].size(); ++i) full[base.dofs[s][i]] = pou.w[s][i];
    out.w[s].resize(ext.dofs[s].size());
    for (size_t i = 0; i < ext.dofs[s].size(); ++i) out.w[s][i] = full[ext.dofs[s][i]];
  }
  return out;
}

Eigen::VectorXd restrict_vec(const std::vector<int>& dofs, const Eigen::VectorXd& x) {
  Eigen::VectorXd r(dofs.size());
  for (size_t i = 0; i < dofs.size(); ++i) r[i] = x[dofs[i]];
  return r;
}

void prolong_add(const std::vector<int>& dofs, const Eigen::VectorXd& local, Eigen::VectorXd& x) {
  for (size_t i = 0; i < dofs.size(); ++i) x[dofs[i]] += local[i];
}

Eigen::MatrixXd principal_block(const Eigen::SparseMatrix<double>& A, const std::vector<int>& dofs) {
  std::vector<int> lookup(A.rows(), -1);
  for (size_t i = 0; i < dofs.size(); ++i) lookup[dofs[i]] = int(i);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dofs.size(), dofs.size());
  for (size_t j = 0; j < dofs.size(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, dofs[j]); it; ++it) {
      int r = lookup[it.row()];
      if (r >= 0) B(r, j) = it.value();
    }
  return B;
}

}  // namespace geneo
