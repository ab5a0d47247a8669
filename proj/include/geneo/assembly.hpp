#pragma once

#include "geneo/mesh.hpp"

namespace geneo {

struct LinearSystem {
  SparseSym A;
  Eigen::VectorXd F;
};

struct Source {
  enum Kind { zero, constant, point } kind = constant;
  double value = 1.0;  // constant source density
  int dof = 0;         // point load location
};

// exact P1 element stiffness, piecewise constant coefficient
Eigen::Matrix2d element_stiffness_1d(const Mesh& mesh, double K, int cell);
Eigen::Matrix3d element_stiffness_2d(const Mesh& mesh, double K, int cell);

// Dirichlet DOFs are eliminated; SPD whenever a Dirichlet boundary is present
SparseSym assemble_global_stiffness(const Mesh& mesh, const CoefficientField& coeff);

// Neumann matrix of the patch: element contributions of `cells` only, indexed
// by position in the sorted free-DOF set
SparseSym assemble_subdomain_neumann(const Mesh& mesh, const CoefficientField& coeff,
                                     const std::vector<int>& cells,
                                     const std::vector<int>& dofs);

Eigen::VectorXd assemble_rhs(const Mesh& mesh, const Source& source);

}  // namespace geneo
