#pragma once

#include <array>

#include "geneo/types.hpp"

namespace geneo {

enum class Boundary { dirichlet, none };

// structured P1 mesh of the unit interval / unit square, h = 1/n exactly;
// in 2d each grid quad is split along its (i,j)->(i+1,j+1) diagonal
struct Mesh {
  int dim = 1;
  int n = 0;  // cells per direction
  int num_vertices = 0;
  std::vector<double> vx, vy;
  std::vector<std::array<int, 3>> tri;  // 2d triangles, {-1} padded in 1d
  std::vector<bool> dirichlet;          // per vertex
  std::vector<int> vertex_to_dof;       // -1 when eliminated
  std::vector<int> dof_to_vertex;

  int num_cells() const { return dim == 1 ? n : 2 * n * n; }
  int num_dofs() const { return int(dof_to_vertex.size()); }
  double h() const { return 1.0 / n; }
  int vertex_id(int ix, int iy = 0) const { return dim == 1 ? ix : iy * (n + 1) + ix; }
  // grid quad owning a cell (the cell itself in 1d)
  int quad_of_cell(int c) const { return dim == 1 ? c : c / 2; }
  int num_quads() const { return dim == 1 ? n : n * n; }
  std::array<int, 3> cell_vertices(int c) const {
    if (dim == 1) return {c, c + 1, -1};
    return tri[c];
  }
  int cell_num_vertices() const { return dim == 1 ? 2 : 3; }
};

Mesh build_structured_mesh(int dimension, int cells_per_direction, Boundary bc);

// piecewise constant diffusion coefficient, one value per cell
struct CoefficientField {
  std::vector<double> value;
};

CoefficientField coefficient_constant(const Mesh& mesh, double c);
// contrast on quads with even ix+iy, 1 elsewhere
CoefficientField coefficient_checkerboard(const Mesh& mesh, double contrast);
// `count` stripes of contrast across the domain, background 1
CoefficientField coefficient_channels(const Mesh& mesh, double contrast, int count);

}  // namespace geneo
