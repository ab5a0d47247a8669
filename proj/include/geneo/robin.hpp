#pragma once

#include "geneo/assembly.hpp"
#include "geneo/decomposition.hpp"

namespace geneo {

enum class BKind { robin, neumann };

// Bi = Neumann matrix + alpha * boundary mass on the interface (the part of
// the subdomain boundary away from the domain boundary); SPD since constants
// are penalized on the interface
SparseSym build_robin_matrix(const Mesh& mesh, const CoefficientField& coeff,
                             const Decomposition& dec, int i, double alpha);

// Robin or plain Neumann choice for the GenEO-2 pencils
SparseSym build_b_matrix(const Mesh& mesh, const CoefficientField& coeff,
                         const Decomposition& dec, int i, BKind kind, double alpha);

}  // namespace geneo
