#include "geneo/mmio.hpp"

#include <fstream>
#include <sstream>

namespace geneo {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) fail("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail("cannot open for reading: " + path);
  return f;
}

// next non-comment, non-empty line
bool data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    size_t p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos) continue;
    if (line[p] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace

void write_matrix_market(const std::string& path, const SparseSym& m) {
  auto f = open_out(path);
  const auto& a = m.mat;
  Eigen::Index nnz = 0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      if (it.row() >= it.col()) ++nnz;
  f << "%%MatrixMarket matrix coordinate real symmetric\n";
  f << a.rows() << " " << a.cols() << " " << nnz << "\n";
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      if (it.row() >= it.col())
        f << (it.row() + 1) << " " << (it.col() + 1) << " " << format_g17(it.value()) << "\n";
}

SparseSym read_matrix_market_sym(const std::string& path) {
  auto f = open_in(path);
  std::string banner;
  if (!std::getline(f, banner) || banner.rfind("%%MatrixMarket", 0) != 0)
    fail("not a Matrix Market file: " + path);
  std::istringstream bs(banner);
  std::string mm, obj, fmt, field, sym;
  bs >> mm >> obj >> fmt >> field >> sym;
  if (obj != "matrix" || fmt != "coordinate" || field != "real")
    fail("unsupported Matrix Market header in " + path + ": " + banner);
  bool symmetric = sym == "symmetric";
  if (!symmetric && sym != "general")
    fail("unsupported Matrix Market symmetry in " + path + ": " + sym);

  std::string line;
  if (!data_line(f, line)) fail("missing size line in " + path);
  Eigen::Index rows, cols, nnz;
  {
    std::istringstream ls(line);
    if (!(ls >> rows >> cols >> nnz)) fail("bad size line in " + path);
  }
  if (rows != cols) fail("matrix in " + path + " is not square");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size_t(symmetric ? 2 * nnz : nnz));
  for (Eigen::Index k = 0; k < nnz; ++k) {
    if (!data_line(f, line)) fail("truncated entries in " + path);
    std::istringstream ls(line);
    Eigen::Index i, j;
    double v;
    if (!(ls >> i >> j >> v)) fail("bad entry line in " + path);
    trip.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) trip.emplace_back(j - 1, i - 1, v);
  }
  SparseSym s = make_sparse_sym(trip, rows, Definiteness::unknown);
  double scale = max_abs(s.mat);
  if (symmetry_defect(s.mat) > 1e-14 * std::max(1.0, scale))
    fail("matrix in " + path + " is not symmetric");
  return s;
}

void write_matrix_market_dense(const std::string& path, const Eigen::MatrixXd& m) {
  auto f = open_out(path);
  f << "%%MatrixMarket matrix array real general\n";
  f << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) f << format_g17(m(i, j)) << "\n";
}

Eigen::MatrixXd read_matrix_market_dense(const std::string& path) {
  auto f = open_in(path);
  std::string banner;
  if (!std::getline(f, banner) || banner.rfind("%%MatrixMarket", 0) != 0)
    fail("not a Matrix Market file: " + path);
  std::istringstream bs(banner);
  std::string mm, obj, fmt, field, sym;
  bs >> mm >> obj >> fmt >> field >> sym;
  if (obj != "matrix" || field != "real")
    fail("unsupported Matrix Market header in " + path + ": " + banner);

  std::string line;
  if (!data_line(f, line)) fail("missing size line in " + path);
  if (fmt == "array") {
    if (sym != "general") fail("unsupported array symmetry in " + path + ": " + sym);
    Eigen::Index rows, cols;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols)) fail("bad size line in " + path);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (!data_line(f, line)) fail("truncated entries in " + path);
        m(i, j) = std::stod(line);
      }
    return m;
  }
  if (fmt == "coordinate") {
    bool symmetric = sym == "symmetric";
    if (!symmetric && sym != "general")
      fail("unsupported Matrix Market symmetry in " + path + ": " + sym);
    Eigen::Index rows, cols, nnz;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols >> nnz)) fail("bad size line in " + path);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index k = 0; k < nnz; ++k) {
      if (!data_line(f, line)) fail("truncated entries in " + path);
      std::istringstream es(line);
      Eigen::Index i, j;
      double v;
      if (!(es >> i >> j >> v)) fail("bad entry line in " + path);
      m(i - 1, j - 1) = v;
      if (symmetric && i != j) m(j - 1, i - 1) = v;
    }
    return m;
  }
  fail("unsupported Matrix Market format in " + path + ": " + fmt);
}

void write_vector(const std::string& path, const Eigen::VectorXd& v) {
  auto f = open_out(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) f << format_g17(v[i]) << "\n";
}

Eigen::VectorXd read_vector(const std::string& path) {
  auto f = open_in(path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(f, line)) {
    size_t p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos) continue;
    vals.push_back(std::stod(line));
  }
  Eigen::VectorXd v(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

}  // namespace geneo
