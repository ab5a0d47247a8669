#include "geneo/mesh.hpp"

namespace geneo {

Mesh build_structured_mesh(int dimension, int cells_per_direction, Boundary bc) {
  if (dimension != 1 && dimension != 2) fail("build_structured_mesh: dimension must be 1 or 2");
  if (cells_per_direction < 2) fail("build_structured_mesh: need at least 2 cells per direction");

  Mesh m;
  m.dim = dimension;
  m.n = cells_per_direction;
  const int n = m.n;

  if (m.dim == 1) {
    m.num_vertices = n + 1;
    m.vx.resize(m.num_vertices);
    m.vy.assign(m.num_vertices, 0.0);
    for (int i = 0; i <= n; ++i) m.vx[i] = double(i) / n;
    m.dirichlet.assign(m.num_vertices, false);
    if (bc == Boundary::dirichlet) {
      m.dirichlet[0] = true;
      m.dirichlet[n] = true;
    }
  } else {
    m.num_vertices = (n + 1) * (n + 1);
    m.vx.resize(m.num_vertices);
    m.vy.resize(m.num_vertices);
    for (int iy = 0; iy <= n; ++iy)
      for (int ix = 0; ix <= n; ++ix) {
        int v = m.vertex_id(ix, iy);
        m.vx[v] = double(ix) / n;
        m.vy[v] = double(iy) / n;
      }
    m.tri.reserve(2 * n * n);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        int v00 = m.vertex_id(ix, iy);
        int v10 = m.vertex_id(ix + 1, iy);
        int v01 = m.vertex_id(ix, iy + 1);
        int v11 = m.vertex_id(ix + 1, iy + 1);
        m.tri.push_back({v00, v10, v11});
        m.tri.push_back({v00, v11, v01});
      }
    m.dirichlet.assign(m.num_vertices, false);
    if (bc == Boundary::dirichlet)
      for (int iy = 0; iy <= n; ++iy)
        for (int ix = 0; ix <= n; ++ix)
          if (ix == 0 || ix == n || iy == 0 || iy == n)
            m.dirichlet[m.vertex_id(ix, iy)] = true;
  }

  m.vertex_to_dof.assign(m.num_vertices, -1);
  for (int v = 0; v < m.num_vertices; ++v)
    if (!m.dirichlet[v]) {
      m.vertex_to_dof[v] = int(m.dof_to_vertex.size());
      m.dof_to_vertex.push_back(v);
    }
  return m;
}

CoefficientField coefficient_constant(const Mesh& mesh, double c) {
  if (c <= 0) fail("coefficient_constant: coefficient must be positive");
  return {std::vector<double>(mesh.num_cells(), c)};
}

CoefficientField coefficient_checkerboard(const Mesh& mesh, double contrast) {
  if (contrast <= 0) fail("coefficient_checkerboard: contrast must be positive");
  CoefficientField k;
  k.value.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    int q = mesh.quad_of_cell(c);
    int ix = q % mesh.n;
    int iy = mesh.dim == 1 ? 0 : q / mesh.n;
    k.value[c] = ((ix + iy) % 2 == 0) ? contrast : 1.0;
  }
  return k;
}

CoefficientField coefficient_channels(const Mesh& mesh, double contrast, int count) {
  if (contrast <= 0) fail("coefficient_channels: contrast must be positive");
  if (count < 1 || 2 * count > mesh.n)
    fail("coefficient_channels: need 1 <= 2*count <= cells per direction");
  CoefficientField k;
  k.value.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    int q = mesh.quad_of_cell(c);
    // stripes run along x; in 1d they alternate along the only axis
    int row = mesh.dim == 1 ? q : q / mesh.n;
    int band = (row * 2 * count) / mesh.n;
    k.value[c] = (band % 2 == 1) ? contrast : 1.0;
  }
  return k;
}

}  // namespace geneo
