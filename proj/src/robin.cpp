#include "geneo/robin.hpp"

#include <map>

namespace geneo {

namespace {

using Edge = std::pair<int, int>;

Edge edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// count e -> number of triangles containing e
std::map<Edge, int> edge_counts_2d(const Mesh& mesh, const std::vector<int>& cells) {
  std::map<Edge, int> count;
  for (int c : cells) {
    auto v = mesh.tri[c];
    for (int a = 0; a < 3; ++a) ++count[edge_key(v[a], v[(a + 1) % 3])];
  }
  return count;
}

}  // namespace

SparseSym build_robin_matrix(const Mesh& mesh, const CoefficientField& coeff,
                             const Decomposition& dec, int i, double alpha) {
  if (alpha <= 0) fail("build_robin_matrix: alpha must be positive");
  const auto& cells = dec.cells[i];
  const auto& dofs = dec.dofs[i];
  SparseSym neu = assemble_subdomain_neumann(mesh, coeff, cells, dofs);

  std::vector<int> lookup(mesh.num_dofs(), -1);
  for (size_t k = 0; k < dofs.size(); ++k) lookup[dofs[k]] = int(k);
  std::vector<Eigen::Triplet<double>> trip;

  if (mesh.dim == 1) {
    // facets are vertices; interface = subdomain-boundary vertex away from {0,1}
    std::vector<int> vcount(mesh.num_vertices, 0);
    for (int c : cells) {
      ++vcount[c];
      ++vcount[c + 1];
    }
    for (int v = 0; v < mesh.num_vertices; ++v) {
      if (vcount[v] != 1) continue;
      if (v == 0 || v == mesh.n) continue;  // domain boundary
      int d = mesh.vertex_to_dof[v];
      if (d < 0) continue;
      int l = lookup[d];
      if (l >= 0) trip.emplace_back(l, l, alpha);
    }
  } else {
    auto sub = edge_counts_2d(mesh, cells);
    std::map<Edge, int> global;
    {
      std::vector<int> all(mesh.num_cells());
      for (int c = 0; c < mesh.num_cells(); ++c) all[c] = c;
      global = edge_counts_2d(mesh, all);
    }
    for (const auto& [e, cnt] : sub) {
      if (cnt != 1) continue;           // interior edge of the patch
      if (global.at(e) != 2) continue;  // domain-boundary edge
      double dx = mesh.vx[e.first] - mesh.vx[e.second];
      double dy = mesh.vy[e.first] - mesh.vy[e.second];
      double len = std::sqrt(dx * dx + dy * dy);
      int d0 = mesh.vertex_to_dof[e.first], d1 = mesh.vertex_to_dof[e.second];
      int l0 = d0 < 0 ? -1 : lookup[d0], l1 = d1 < 0 ? -1 : lookup[d1];
      // P1 edge mass (len/6) [[2,1],[1,2]]
      if (l0 >= 0) trip.emplace_back(l0, l0, alpha * len / 3.0);
      if (l1 >= 0) trip.emplace_back(l1, l1, alpha * len / 3.0);
      if (l0 >= 0 && l1 >= 0) {
        trip.emplace_back(l0, l1, alpha * len / 6.0);
        trip.emplace_back(l1, l0, alpha * len / 6.0);
      }
    }
  }

  Eigen::SparseMatrix<double> mass(dofs.size(), dofs.size());
  mass.setFromTriplets(trip.begin(), trip.end());
  SparseSym b;
  b.mat = neu.mat + mass;
  b.mat.makeCompressed();
  b.tag = Definiteness::spd;
  return b;
}

SparseSym build_b_matrix(const Mesh& mesh, const CoefficientField& coeff,
                         const Decomposition& dec, int i, BKind kind, double alpha) {
  if (kind == BKind::robin) return build_robin_matrix(mesh, coeff, dec, i, alpha);
  return assemble_subdomain_neumann(mesh, coeff, dec.cells[i], dec.dofs[i]);
}

}  // namespace geneo
