#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geneo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

enum class Definiteness { spd, spsd, unknown };

// symmetric sparse carrier; both triangles are stored so products need no
// special casing, writers emit the lower triangle only
struct SparseSym {
  Eigen::SparseMatrix<double> mat;
  Definiteness tag = Definiteness::unknown;

  Eigen::Index rows() const { return mat.rows(); }
};

SparseSym make_sparse_sym(const std::vector<Eigen::Triplet<double>>& trip,
                          Eigen::Index n, Definiteness tag);

double max_abs(const Eigen::SparseMatrix<double>& m);
// max |M - M^T| entry
double symmetry_defect(const Eigen::SparseMatrix<double>& m);

// round-trip exact decimal formatting, shared by every writer
std::string format_g17(double x);

// static partition over [0, n); body must only touch its own index
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace geneo
