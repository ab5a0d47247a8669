#pragma once

#include <string>

#include "geneo/types.hpp"

namespace geneo {

// coordinate real symmetric, lower triangle, 1-based, column then row order
void write_matrix_market(const std::string& path, const SparseSym& m);
SparseSym read_matrix_market_sym(const std::string& path);

// array real general, column major
void write_matrix_market_dense(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_market_dense(const std::string& path);

// one value per line
void write_vector(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector(const std::string& path);

}  // namespace geneo
