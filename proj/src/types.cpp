#include "geneo/types.hpp"

#include <cstdio>
#include <mutex>
#include <thread>

namespace geneo {

SparseSym make_sparse_sym(const std::vector<Eigen::Triplet<double>>& trip,
                          Eigen::Index n, Definiteness tag) {
  SparseSym s;
  s.mat.resize(n, n);
  s.mat.setFromTriplets(trip.begin(), trip.end());
  s.mat.makeCompressed();
  s.tag = tag;
  return s;
}

double max_abs(const Eigen::SparseMatrix<double>& m) {
  double v = 0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      v = std::max(v, std::abs(it.value()));
  return v;
}

double symmetry_defect(const Eigen::SparseMatrix<double>& m) {
  Eigen::SparseMatrix<double> d = m - Eigen::SparseMatrix<double>(m.transpose());
  return max_abs(d);
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  int w = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::mutex mx;
  std::exception_ptr first;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([=, &body, &mx, &first] {
      try {
        for (int i = t; i < n; i += w) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mx);
        if (!first) first = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace geneo
