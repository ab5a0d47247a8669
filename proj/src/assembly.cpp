#include "geneo/assembly.hpp"

namespace geneo {

Eigen::Matrix2d element_stiffness_1d(const Mesh& mesh, double K, int cell) {
  double h = mesh.vx[cell + 1] - mesh.vx[cell];
  Eigen::Matrix2d e;
  double a = K / h;
  e << a, -a, -a, a;
  return e;
}

Eigen::Matrix3d element_stiffness_2d(const Mesh& mesh, double K, int cell) {
  auto v = mesh.tri[cell];
  double d1x = mesh.vx[v[1]] - mesh.vx[v[0]], d1y = mesh.vy[v[1]] - mesh.vy[v[0]];
  double d2x = mesh.vx[v[2]] - mesh.vx[v[0]], d2y = mesh.vy[v[2]] - mesh.vy[v[0]];
  double det = d1x * d2y - d1y * d2x;  // 2*area, positive by construction
  Eigen::Matrix<double, 2, 3> g;
  g.col(1) << d2y / det, -d2x / det;
  g.col(2) << -d1y / det, d1x / det;
  g.col(0) = -g.col(1) - g.col(2);
  return (0.5 * det * K) * g.transpose() * g;
}

namespace {

// scatter one cell into the triplet list; lookup maps global dof -> row, -1 skips
template <typename EMat>
void scatter(const Mesh& mesh, int cell, const EMat& e, const std::vector<int>& lookup,
             std::vector<Eigen::Triplet<double>>& trip, bool must_cover) {
  auto v = mesh.cell_vertices(cell);
  int nv = mesh.cell_num_vertices();
  int loc[3];
  for (int a = 0; a < nv; ++a) {
    int d = mesh.vertex_to_dof[v[a]];
    loc[a] = d < 0 ? -1 : lookup[d];
    if (must_cover && d >= 0 && loc[a] < 0)
      fail("assemble_subdomain_neumann: cell touches a free DOF outside the DOF set");
  }
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b)
      if (loc[a] >= 0 && loc[b] >= 0) trip.emplace_back(loc[a], loc[b], e(a, b));
}

}  // namespace

SparseSym assemble_global_stiffness(const Mesh& mesh, const CoefficientField& coeff) {
  if (int(coeff.value.size()) != mesh.num_cells())
    fail("assemble_global_stiffness: coefficient size mismatch");
  std::vector<int> identity(mesh.num_dofs());
  for (int i = 0; i < mesh.num_dofs(); ++i) identity[i] = i;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size_t(mesh.num_cells()) * 9);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (mesh.dim == 1)
      scatter(mesh, c, element_stiffness_1d(mesh, coeff.value[c], c), identity, trip, false);
    else
      scatter(mesh, c, element_stiffness_2d(mesh, coeff.value[c], c), identity, trip, false);
  }
  bool has_dirichlet = mesh.num_dofs() < mesh.num_vertices;
  return make_sparse_sym(trip, mesh.num_dofs(),
                         has_dirichlet ? Definiteness::spd : Definiteness::spsd);
}

SparseSym assemble_subdomain_neumann(const Mesh& mesh, const CoefficientField& coeff,
                                     const std::vector<int>& cells,
                                     const std::vector<int>& dofs) {
  std::vector<int> lookup(mesh.num_dofs(), -1);
  for (size_t i = 0; i < dofs.size(); ++i) lookup[dofs[i]] = int(i);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(cells.size() * 9);
  for (int c : cells) {
    if (mesh.dim == 1)
      scatter(mesh, c, element_stiffness_1d(mesh, coeff.value[c], c), lookup, trip, true);
    else
      scatter(mesh, c, element_stiffness_2d(mesh, coeff.value[c], c), lookup, trip, true);
  }
  return make_sparse_sym(trip, Eigen::Index(dofs.size()), Definiteness::spsd);
}

Eigen::VectorXd assemble_rhs(const Mesh& mesh, const Source& source) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.num_dofs());
  switch (source.kind) {
    case Source::zero:
      break;
    case Source::point:
      if (source.dof < 0 || source.dof >= mesh.num_dofs())
        fail("assemble_rhs: point load DOF out of range");
      f[source.dof] = 1.0;
      break;
    case Source::constant:
      for (int c = 0; c < mesh.num_cells(); ++c) {
        double cellmass;
        if (mesh.dim == 1)
          cellmass = (mesh.vx[c + 1] - mesh.vx[c]) / 2.0;
        else {
          auto v = mesh.tri[c];
          double d1x = mesh.vx[v[1]] - mesh.vx[v[0]], d1y = mesh.vy[v[1]] - mesh.vy[v[0]];
          double d2x = mesh.vx[v[2]] - mesh.vx[v[0]], d2y = mesh.vy[v[2]] - mesh.vy[v[0]];
          cellmass = (d1x * d2y - d1y * d2x) / 6.0;  // area/3
        }
        auto v = mesh.cell_vertices(c);
        for (int a = 0; a < mesh.cell_num_vertices(); ++a) {
          int d = mesh.vertex_to_dof[v[a]];
          if (d >= 0) f[d] += source.value * cellmass;
        }
      }
      break;
  }
  return f;
}

}  // namespace geneo
