#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "geneo/assembly.hpp"
#include "geneo/decomposition.hpp"
#include "oracles.hpp"

using geneo::Boundary;
using geneo::CoefficientField;
using geneo::Mesh;
using geneo::Source;

namespace {

Eigen::MatrixXd dense(const geneo::SparseSym& s) { return Eigen::MatrixXd(s.mat); }

std::vector<int> all_cells(const Mesh& m) {
  std::vector<int> c(m.num_cells());
  for (int i = 0; i < int(c.size()); ++i) c[i] = i;
  return c;
}

std::vector<int> all_dofs(const Mesh& m) {
  std::vector<int> d(m.num_dofs());
  for (int i = 0; i < int(d.size()); ++i) d[i] = i;
  return d;
}

}  // namespace

TEST_CASE("structured mesh: sizes, boundary handling, cell geometry") {
  Mesh m1 = geneo::build_structured_mesh(1, 4, Boundary::dirichlet);
  CHECK(m1.num_dofs() == 3);
  CHECK(m1.num_cells() == 4);
  CHECK(m1.h() == 0.25);

  Mesh m1n = geneo::build_structured_mesh(1, 4, Boundary::none);
  CHECK(m1n.num_dofs() == 5);

  Mesh m2 = geneo::build_structured_mesh(2, 4, Boundary::dirichlet);
  CHECK(m2.num_dofs() == 9);
  CHECK(m2.num_cells() == 32);

  Mesh m2n = geneo::build_structured_mesh(2, 3, Boundary::none);
  CHECK(m2n.num_dofs() == 16);

  // quads split along the (i,j)->(i+1,j+1) diagonal
  auto t0 = m2.cell_vertices(0);
  auto t1 = m2.cell_vertices(1);
  CHECK(t0[0] == m2.vertex_id(0, 0));
  CHECK(t0[1] == m2.vertex_id(1, 0));
  CHECK(t0[2] == m2.vertex_id(1, 1));
  CHECK(t1[0] == m2.vertex_id(0, 0));
  CHECK(t1[1] == m2.vertex_id(1, 1));
  CHECK(t1[2] == m2.vertex_id(0, 1));

  CHECK_THROWS_AS(geneo::build_structured_mesh(3, 4, Boundary::dirichlet), geneo::Error);
  CHECK_THROWS_AS(geneo::build_structured_mesh(1, 1, Boundary::dirichlet), geneo::Error);
}

TEST_CASE("coefficient fields: constant, checkerboard, channels") {
  Mesh m = geneo::build_structured_mesh(2, 4, Boundary::dirichlet);

  CoefficientField c = geneo::coefficient_constant(m, 3.5);
  REQUIRE(int(c.value.size()) == m.num_cells());
  for (double v : c.value) CHECK(v == 3.5);

  CoefficientField cb = geneo::coefficient_checkerboard(m, 1e3);
  for (int cell = 0; cell < m.num_cells(); ++cell) {
    int q = m.quad_of_cell(cell);
    int ix = q % m.n, iy = q / m.n;
    CHECK(cb.value[cell] == ((ix + iy) % 2 == 0 ? 1e3 : 1.0));
  }

  CoefficientField ch = geneo::coefficient_channels(m, 50.0, 2);
  // two stripes: rows alternate background / contrast in 4 bands
  bool saw_bg = false, saw_hi = false;
  for (double v : ch.value) {
    if (v == 1.0) saw_bg = true;
    if (v == 50.0) saw_hi = true;
  }
  CHECK(saw_bg);
  CHECK(saw_hi);

  CHECK_THROWS_AS(geneo::coefficient_constant(m, 0.0), geneo::Error);
  CHECK_THROWS_AS(geneo::coefficient_checkerboard(m, -1.0), geneo::Error);
  CHECK_THROWS_AS(geneo::coefficient_channels(m, 0.0, 2), geneo::Error);
}

TEST_CASE("1d unit-coefficient stiffness is the classic tridiagonal") {
  Mesh m = geneo::build_structured_mesh(1, 4, Boundary::dirichlet);
  Eigen::MatrixXd A = dense(geneo::assemble_global_stiffness(m, geneo::coefficient_constant(m, 1.0)));
  REQUIRE(A.rows() == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double want = i == j ? 8.0 : (std::abs(i - j) == 1 ? -4.0 : 0.0);
      CHECK(A(i, j) == doctest::Approx(want).epsilon(1e-15));
    }
}

TEST_CASE("assembled stiffness agrees with an independent fitted-gradient assembly") {
  struct Case {
    int dim, n;
    Boundary bc;
    int coeff;  // 0 constant, 1 checkerboard, 2 channels
  };
  for (Case c : {Case{1, 16, Boundary::dirichlet, 1}, Case{1, 12, Boundary::none, 0},
                 Case{2, 8, Boundary::dirichlet, 1}, Case{2, 6, Boundary::none, 2}}) {
    Mesh m = geneo::build_structured_mesh(c.dim, c.n, c.bc);
    CoefficientField K = c.coeff == 0   ? geneo::coefficient_constant(m, 2.0)
                         : c.coeff == 1 ? geneo::coefficient_checkerboard(m, 1e3)
                                        : geneo::coefficient_channels(m, 50.0, 2);
    REQUIRE(m.num_dofs() <= 200);
    Eigen::MatrixXd A = dense(geneo::assemble_global_stiffness(m, K));
    Eigen::MatrixXd B = oracle::stiffness_by_fitting(m, K);
    CHECK((A - B).cwiseAbs().maxCoeff() <= 1e-13 * A.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("stiffness without dirichlet elimination kills constants") {
  for (int dim : {1, 2}) {
    Mesh m = geneo::build_structured_mesh(dim, dim == 1 ? 12 : 6, Boundary::none);
    Eigen::MatrixXd A = dense(geneo::assemble_global_stiffness(m, geneo::coefficient_constant(m, 1.0)));
    CHECK((A * Eigen::VectorXd::Ones(A.rows())).cwiseAbs().maxCoeff() <= 1e-12);

    Eigen::MatrixXd Ac =
        dense(geneo::assemble_global_stiffness(m, geneo::coefficient_checkerboard(m, 1e6)));
    CHECK((Ac * Eigen::VectorXd::Ones(Ac.rows())).cwiseAbs().maxCoeff() <=
          1e-12 * Ac.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("stiffness is linear in the coefficient") {
  Mesh m = geneo::build_structured_mesh(2, 5, Boundary::dirichlet);
  Eigen::MatrixXd A1 = dense(geneo::assemble_global_stiffness(m, geneo::coefficient_constant(m, 1.0)));
  Eigen::MatrixXd A2 = dense(geneo::assemble_global_stiffness(m, geneo::coefficient_constant(m, 2.0)));
  CHECK((A2 - 2.0 * A1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stiffness with a dirichlet boundary is positive definite") {
  Mesh m = geneo::build_structured_mesh(2, 6, Boundary::dirichlet);
  Eigen::MatrixXd A = dense(geneo::assemble_global_stiffness(m, geneo::coefficient_checkerboard(m, 1e4)));
  CHECK(Eigen::LLT<Eigen::MatrixXd>(A).info() == Eigen::Success);
  CHECK(geneo::symmetry_defect(geneo::assemble_global_stiffness(m, geneo::coefficient_constant(m, 1.0)).mat) ==
        0.0);
}

TEST_CASE("subdomain neumann matrix of the whole domain is the full matrix") {
  Mesh m = geneo::build_structured_mesh(2, 5, Boundary::none);
  CoefficientField K = geneo::coefficient_checkerboard(m, 1e3);
  Eigen::MatrixXd A = dense(geneo::assemble_global_stiffness(m, K));
  Eigen::MatrixXd An = dense(geneo::assemble_subdomain_neumann(m, K, all_cells(m), all_dofs(m)));
  CHECK((A - An).cwiseAbs().maxCoeff() <= 1e-13 * A.cwiseAbs().maxCoeff());
}

TEST_CASE("interior subdomain neumann matrix kills constants and is nearly spsd") {
  Mesh m = geneo::build_structured_mesh(1, 8, Boundary::dirichlet);
  CoefficientField K = geneo::coefficient_checkerboard(m, 1e3);
  geneo::Decomposition dec = geneo::build_overlapping_decomposition(m, {4, 1}, 0);
  // subdomain 1 sits strictly inside, so no eliminated vertex breaks the kernel
  geneo::SparseSym At = geneo::assemble_subdomain_neumann(m, K, dec.cells[1], dec.dofs[1]);
  Eigen::MatrixXd Atd = dense(At);
  CHECK((Atd * Eigen::VectorXd::Ones(Atd.rows())).cwiseAbs().maxCoeff() <= 1e-12 * Atd.cwiseAbs().maxCoeff());
  CHECK(At.tag == geneo::Definiteness::spsd);

  Mesh m2 = geneo::build_structured_mesh(2, 8, Boundary::dirichlet);
  CoefficientField K2 = geneo::coefficient_checkerboard(m2, 1e3);
  geneo::Decomposition dec2 = geneo::build_overlapping_decomposition(m2, {2, 2}, 1);
  for (int j = 0; j < dec2.N; ++j) {
    Eigen::MatrixXd Aj = dense(geneo::assemble_subdomain_neumann(m2, K2, dec2.cells[j], dec2.dofs[j]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Aj, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * Aj.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("summed neumann energies stay below the k1 multiple of the global energy") {
  Mesh m = geneo::build_structured_mesh(2, 8, Boundary::dirichlet);
  CoefficientField K = geneo::coefficient_checkerboard(m, 1e3);
  geneo::SparseSym A = geneo::assemble_global_stiffness(m, K);
  geneo::Decomposition dec = geneo::build_overlapping_decomposition(m, {2, 2}, 1);
  int k1 = geneo::compute_k1(dec);

  std::vector<Eigen::MatrixXd> neu;
  for (int j = 0; j < dec.N; ++j)
    neu.push_back(dense(geneo::assemble_subdomain_neumann(m, K, dec.cells[j], dec.dofs[j])));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd U = oracle::random_vector(rng, m.num_dofs());
    double rhs = k1 * U.dot(A.mat * U);
    double lhs = 0;
    for (int j = 0; j < dec.N; ++j) {
      Eigen::VectorXd Uj = geneo::restrict_vec(dec.dofs[j], U);
      lhs += Uj.dot(neu[j] * Uj);
    }
    CHECK(lhs <= rhs * (1 + 1e-10));
  }
}

TEST_CASE("subdomain neumann rejects a dof set that misses touched dofs") {
  Mesh m = geneo::build_structured_mesh(1, 8, Boundary::dirichlet);
  CoefficientField K = geneo::coefficient_constant(m, 1.0);
  CHECK_THROWS_AS(geneo::assemble_subdomain_neumann(m, K, {3, 4}, {2}), geneo::Error);
}

TEST_CASE("right-hand sides: zero, unit density, point load") {
  Mesh m = geneo::build_structured_mesh(1, 4, Boundary::dirichlet);

  Eigen::VectorXd z = geneo::assemble_rhs(m, Source{Source::zero, 0.0, 0});
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd f = geneo::assemble_rhs(m, Source{Source::constant, 1.0, 0});
  REQUIRE(f.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(f[i] == doctest::Approx(0.25).epsilon(1e-15));

  Eigen::VectorXd p = geneo::assemble_rhs(m, Source{Source::point, 1.0, 1});
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 1.0);
  CHECK(p[2] == 0.0);
  CHECK_THROWS_AS(geneo::assemble_rhs(m, Source{Source::point, 1.0, 99}), geneo::Error);
}

TEST_CASE("unit-density rhs agrees with the quadrature oracle in both dimensions") {
  for (int dim : {1, 2}) {
    Mesh m = geneo::build_structured_mesh(dim, dim == 1 ? 9 : 5, Boundary::dirichlet);
    Eigen::VectorXd f = geneo::assemble_rhs(m, Source{Source::constant, 1.0, 0});
    Eigen::VectorXd g = oracle::rhs_by_quadrature(m);
    CHECK((f - g).cwiseAbs().maxCoeff() <= 1e-13 * g.cwiseAbs().maxCoeff());

    Eigen::VectorXd f3 = geneo::assemble_rhs(m, Source{Source::constant, 3.0, 0});
    CHECK((f3 - 3.0 * f).cwiseAbs().maxCoeff() <= 1e-15 * f3.cwiseAbs().maxCoeff());
  }
}
