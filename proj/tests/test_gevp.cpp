#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "geneo/assembly.hpp"
#include "geneo/gevp.hpp"
#include "geneo/robin.hpp"
#include "oracles.hpp"
#include "testbeds.hpp"

using geneo::Boundary;
using geneo::EigenPairSet;
using geneo::Mesh;
using geneo::SparseSym;

namespace {

SparseSym sparse_from_dense(const Eigen::MatrixXd& M, geneo::Definiteness tag) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < M.cols(); ++j)
    for (int i = 0; i < M.rows(); ++i)
      if (M(i, j) != 0.0) trip.emplace_back(i, j, M(i, j));
  return geneo::make_sparse_sym(trip, M.rows(), tag);
}

// dense left-hand matrix D Rj A Rj^T D of the subdomain pencil
Eigen::MatrixXd geneo_lhs(const bed::Bed& b, int j) {
  Eigen::MatrixXd M = geneo::principal_block(b.A.mat, b.dec.dofs[j]);
  const Eigen::VectorXd& w = b.pou.w[j];
  return w.asDiagonal() * M * w.asDiagonal();
}

// descending set eigenvalues (skipping +inf) against the ascending qz list
void compare_with_qz(const EigenPairSet& set, const oracle::QzResult& qz) {
  int inf_count = 0;
  std::vector<double> finite;
  for (int k = 0; k < set.eigenvalues.size(); ++k) {
    if (std::isinf(set.eigenvalues[k]))
      ++inf_count;
    else
      finite.push_back(set.eigenvalues[k]);
  }
  CHECK(inf_count == qz.infinite);
  REQUIRE(finite.size() + set.degenerate_discarded == qz.finite.size() + 0u);
  std::sort(finite.begin(), finite.end());
  // discarded common-kernel directions come back from qz as noise at either
  // end; match the reliable ones pairwise from the top
  for (size_t k = 0; k < finite.size(); ++k) {
    double a = finite[finite.size() - 1 - k];
    double bqz = qz.finite[qz.finite.size() - 1 - k];
    CHECK(std::abs(a - bqz) <= 1e-8 * std::max(1.0, std::abs(bqz)));
  }
}

}  // namespace

TEST_CASE("dense pencil solver: spd pencils, kernels, shared kernels") {
  std::mt19937_64 rng(101);
  Eigen::MatrixXd L = oracle::random_spd(rng, 7);
  Eigen::MatrixXd R = oracle::random_spd(rng, 7);

  geneo::PencilOptions spd;
  spd.spd_rhs = true;
  auto sol = geneo::solve_sym_pencil<double>(L, R, spd);
  oracle::QzResult qz = oracle::pencil_by_qz(L, R);
  REQUIRE(int(qz.finite.size()) == 7);
  for (int k = 0; k < 7; ++k) {
    CHECK(std::abs(sol.lambda[k] - qz.finite[k]) <= 1e-8 * std::max(1.0, std::abs(qz.finite[k])));
    Eigen::VectorXd v = sol.V.col(k);
    double res = (L * v - sol.lambda[k] * (R * v)).norm();
    CHECK(res <= 1e-8 * (L.norm() + std::abs(sol.lambda[k]) * R.norm()) * v.norm());
  }

  // rank-deficient right side: its kernel turns into +inf directions
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(7, 5);
  for (int j = 0; j < 5; ++j) G.col(j) = oracle::random_vector(rng, 7);
  Eigen::MatrixXd Rsing = G * G.transpose();
  auto sing = geneo::solve_sym_pencil<double>(L, Rsing);
  CHECK(int(sing.infinite.size()) == 2);
  CHECK(sing.degenerate.empty());

  // shared kernel direction is reported degenerate, not infinite
  Eigen::VectorXd null = oracle::random_vector(rng, 7).normalized();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(7, 7) - null * null.transpose();
  Eigen::MatrixXd Lc = P * L * P;
  Eigen::MatrixXd Rc = P * R * P;
  auto deg = geneo::solve_sym_pencil<double>(Lc, Rc);
  CHECK(int(deg.degenerate.size()) == 1);

  // identical pencil: every eigenvalue is 1
  auto ident = geneo::solve_sym_pencil<double>(R, R, spd);
  for (int k = 0; k < 7; ++k) CHECK(ident.lambda[k] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(geneo::solve_sym_pencil<double>(L, Eigen::MatrixXd::Zero(3, 3)), geneo::Error);
  CHECK_THROWS_AS(geneo::solve_sym_pencil<double>(L, Eigen::MatrixXd::Identity(3, 3)), geneo::Error);
  CHECK_THROWS_AS(geneo::solve_sym_pencil<double>(Eigen::MatrixXd(), Eigen::MatrixXd()), geneo::Error);
  Eigen::MatrixXd notspd = -Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(geneo::solve_sym_pencil<double>(notspd, notspd, spd), geneo::Error);
}

TEST_CASE("geneo gevp with identical matrices: unit spectrum, one degenerate direction") {
  // single subdomain on a pure Neumann mesh: D = I and both pencil sides equal
  // the Neumann matrix, whose kernel (constants) is common to both
  bed::Bed b = bed::make(1, 8, {1, 1}, 0, "constant", 1.0, Boundary::none);
  SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, b.dec.cells[0], b.dec.dofs[0]);

  EigenPairSet low = geneo::solve_geneo_gevp(0, b.A, b.dec, b.pou, Aneu, 0.5);
  CHECK(low.degenerate_discarded == 1);
  REQUIRE(low.eigenvalues.size() == 8);
  for (int k = 0; k < low.eigenvalues.size(); ++k) {
    CHECK(std::isfinite(low.eigenvalues[k]));
    CHECK(low.eigenvalues[k] == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(low.num_selected() == 8);  // tau < 1 keeps everything

  EigenPairSet high = geneo::solve_geneo_gevp(0, b.A, b.dec, b.pou, Aneu, 2.0);
  CHECK(high.num_selected() == 0);  // tau > 1 keeps nothing
}

TEST_CASE("geneo gevp with zero weights: zero spectrum, empty selection") {
  bed::Bed b = bed::make(1, 24, {3, 1}, 1);
  geneo::PartitionOfUnity broken = b.pou;
  broken.w[1].setZero();
  SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, b.dec.cells[1], b.dec.dofs[1]);
  EigenPairSet set = geneo::solve_geneo_gevp(1, b.A, b.dec, broken, Aneu, 0.1);
  CHECK(set.degenerate_discarded == 1);  // the Neumann kernel is now shared
  for (int k = 0; k < set.eigenvalues.size(); ++k)
    CHECK(std::abs(set.eigenvalues[k]) <= 1e-12);
  CHECK(set.num_selected() == 0);
}

TEST_CASE("geneo gevp matches the qz oracle on 1d and 2d instances") {
  bed::Bed b1 = bed::make(1, 16, {2, 1}, 1);
  for (int j = 0; j < 2; ++j) {
    SparseSym Aneu = geneo::assemble_subdomain_neumann(b1.mesh, b1.coeff, b1.dec.cells[j], b1.dec.dofs[j]);
    EigenPairSet set = geneo::solve_geneo_gevp(j, b1.A, b1.dec, b1.pou, Aneu, 0.5);
    oracle::QzResult qz = oracle::pencil_by_qz(geneo_lhs(b1, j), Eigen::MatrixXd(Aneu.mat));
    compare_with_qz(set, qz);
    int want = qz.infinite;
    for (double lam : qz.finite)
      if (lam > 0.5) ++want;
    CHECK(set.num_selected() == want);
  }

  bed::Bed b2 = bed::make(2, 8, {2, 2}, 1, "checkerboard", 1e3);
  for (int j : {0, 3}) {
    SparseSym Aneu = geneo::assemble_subdomain_neumann(b2.mesh, b2.coeff, b2.dec.cells[j], b2.dec.dofs[j]);
    EigenPairSet set = geneo::solve_geneo_gevp(j, b2.A, b2.dec, b2.pou, Aneu, 0.1);
    oracle::QzResult qz = oracle::pencil_by_qz(geneo_lhs(b2, j), Eigen::MatrixXd(Aneu.mat));
    compare_with_qz(set, qz);
  }
}

TEST_CASE("stored eigenpairs satisfy their pencil equation") {
  bed::Bed b = bed::make(2, 8, {2, 2}, 1, "checkerboard", 1e3);
  for (int j = 0; j < b.dec.N; ++j) {
    SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, b.dec.cells[j], b.dec.dofs[j]);
    EigenPairSet set = geneo::solve_geneo_gevp(j, b.A, b.dec, b.pou, Aneu, 0.1);
    Eigen::MatrixXd L = geneo_lhs(b, j);
    Eigen::MatrixXd R(Aneu.mat);
    double ln = L.norm(), rn = R.norm();
    for (int k = 0; k < set.eigenvalues.size(); ++k) {
      double lam = set.eigenvalues[k];
      Eigen::VectorXd v = set.vectors.col(k);
      if (std::isinf(lam)) {
        // kernel direction of the right-hand side
        CHECK((R * v).norm() <= 1e-6 * rn * v.norm());
        continue;
      }
      CHECK((L * v - lam * (R * v)).norm() <= 1e-8 * (ln + std::abs(lam) * rn) * v.norm());
    }
  }
}

TEST_CASE("geneo2 lower gevp: spectrum of a unit-shifted pencil, spd guard") {
  // boundary subdomain: the Neumann patch matrix is SPD there
  bed::Bed b = bed::make(1, 16, {2, 1}, 1);
  SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, b.dec.cells[0], b.dec.dofs[0]);
  Eigen::MatrixXd Ad(Aneu.mat);
  Eigen::LLT<Eigen::MatrixXd> llt(Ad);
  REQUIRE(llt.info() == Eigen::Success);

  SparseSym B = sparse_from_dense(Ad + Eigen::MatrixXd::Identity(Ad.rows(), Ad.cols()),
                                  geneo::Definiteness::spd);
  EigenPairSet set = geneo::solve_geneo2_lower_gevp(0, Aneu, B, 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Eigen::EigenvaluesOnly);
  REQUIRE(set.eigenvalues.size() == es.eigenvalues().size());
  for (int k = 0; k < set.eigenvalues.size(); ++k) {
    double mu = es.eigenvalues()[es.eigenvalues().size() - 1 - k];  // descending
    CHECK(set.eigenvalues[k] == doctest::Approx(mu / (mu + 1.0)).epsilon(1e-10));
    CHECK(set.eigenvalues[k] < 1.0);
  }
  CHECK(set.num_selected() == set.eigenvalues.size());  // tau = 1 keeps all

  double lam_min = set.eigenvalues[set.eigenvalues.size() - 1];
  EigenPairSet none = geneo::solve_geneo2_lower_gevp(0, Aneu, B, 0.5 * lam_min);
  CHECK(none.num_selected() == 0);

  // an SPSD B is not admissible on this branch
  bed::Bed c = bed::make(1, 24, {3, 1}, 1);
  SparseSym Amid = geneo::assemble_subdomain_neumann(c.mesh, c.coeff, c.dec.cells[1], c.dec.dofs[1]);
  CHECK_THROWS_AS(geneo::solve_geneo2_lower_gevp(1, Amid, Amid, 0.5), geneo::Error);
}

TEST_CASE("geneo2 lower gevp against the qz oracle with a robin right side") {
  bed::Bed b = bed::make(1, 16, {2, 1}, 1, "checkerboard", 1e3);
  for (int j = 0; j < 2; ++j) {
    SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, b.dec.cells[j], b.dec.dofs[j]);
    SparseSym B = geneo::build_robin_matrix(b.mesh, b.coeff, b.dec, j, 10.0);
    EigenPairSet set = geneo::solve_geneo2_lower_gevp(j, Aneu, B, 2.0);
    oracle::QzResult qz = oracle::pencil_by_qz(Eigen::MatrixXd(Aneu.mat), Eigen::MatrixXd(B.mat));
    compare_with_qz(set, qz);
    int want = 0;
    for (double lam : qz.finite)
      if (lam < 2.0) ++want;
    CHECK(set.num_selected() == want);
  }
}

TEST_CASE("geneo2 upper gevp: shifted identity case, large gamma, neumann kernels") {
  bed::Bed b = bed::make(1, 16, {2, 1}, 1);
  Eigen::MatrixXd L = geneo_lhs(b, 0);
  REQUIRE(Eigen::LLT<Eigen::MatrixXd>(L).info() == Eigen::Success);

  double eps = 0.5;
  SparseSym B = sparse_from_dense(L + eps * Eigen::MatrixXd::Identity(L.rows(), L.cols()),
                                  geneo::Definiteness::spd);
  EigenPairSet set = geneo::solve_geneo2_upper_gevp(0, b.A, b.dec, b.pou, B, 0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
  for (int k = 0; k < set.eigenvalues.size(); ++k) {
    double lam = es.eigenvalues()[es.eigenvalues().size() - 1 - k];
    CHECK(set.eigenvalues[k] == doctest::Approx(lam / (lam + eps)).epsilon(1e-10));
    CHECK(set.eigenvalues[k] < 1.0);
  }

  double mu_max = set.eigenvalues[0];
  EigenPairSet none = geneo::solve_geneo2_upper_gevp(0, b.A, b.dec, b.pou, B, 2.0 * mu_max);
  CHECK(none.num_selected() == 0);
  CHECK(none.unselected_vectors().cols() == none.eigenvalues.size());

  // plain Neumann B on an interior subdomain: its kernel shows up as +inf and
  // is always kept
  bed::Bed c = bed::make(1, 24, {3, 1}, 1);
  SparseSym Amid = geneo::assemble_subdomain_neumann(c.mesh, c.coeff, c.dec.cells[1], c.dec.dofs[1]);
  EigenPairSet kset = geneo::solve_geneo2_upper_gevp(1, c.A, c.dec, c.pou, Amid, 1e9);
  REQUIRE(kset.eigenvalues.size() >= 1);
  CHECK(std::isinf(kset.eigenvalues[0]));
  CHECK(kset.selected[0] == 1);
  CHECK(kset.num_selected() == 1);
}

TEST_CASE("geneo2 upper gevp against the qz oracle") {
  bed::Bed b = bed::make(1, 16, {2, 1}, 1, "checkerboard", 1e3);
  for (int j = 0; j < 2; ++j) {
    SparseSym B = geneo::build_robin_matrix(b.mesh, b.coeff, b.dec, j, 10.0);
    EigenPairSet set = geneo::solve_geneo2_upper_gevp(j, b.A, b.dec, b.pou, B, 0.5);
    oracle::QzResult qz = oracle::pencil_by_qz(geneo_lhs(b, j), Eigen::MatrixXd(B.mat));
    compare_with_qz(set, qz);
    int want = qz.infinite;
    for (double lam : qz.finite)
      if (lam > 0.5) ++want;
    CHECK(set.num_selected() == want);
  }
}

TEST_CASE("eigenvalues sitting exactly on the threshold are reported, not selected") {
  bed::Bed b = bed::make(1, 16, {2, 1}, 1);
  SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, b.dec.cells[0], b.dec.dofs[0]);
  Eigen::MatrixXd Ad(Aneu.mat);
  SparseSym twice = sparse_from_dense(2.0 * Ad, geneo::Definiteness::spd);
  // pencil (A, 2A) has the exact constant spectrum 1/2: every eigenvalue is a
  // tie, flagged as such, and the mask still applies the strict rule to the
  // computed values
  EigenPairSet set = geneo::solve_geneo2_lower_gevp(0, Aneu, twice, 0.5);
  CHECK(int(set.near_threshold.size()) == set.eigenvalues.size());
  int below = 0;
  for (int k = 0; k < set.eigenvalues.size(); ++k) {
    CHECK(set.eigenvalues[k] == doctest::Approx(0.5).epsilon(1e-12));
    if (set.eigenvalues[k] < 0.5) ++below;
  }
  CHECK(set.num_selected() == below);
}

TEST_CASE("pi tilde is the projection onto the selected span") {
  bed::Bed b = bed::make(2, 8, {2, 2}, 1, "checkerboard", 1e3);
  SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, b.dec.cells[0], b.dec.dofs[0]);
  EigenPairSet set = geneo::solve_geneo_gevp(0, b.A, b.dec, b.pou, Aneu, 0.1);
  REQUIRE(set.num_selected() >= 1);
  REQUIRE(set.num_selected() < set.eigenvalues.size());

  std::mt19937_64 rng(23);
  int n = int(b.dec.dofs[0].size());
  Eigen::VectorXd x = oracle::random_vector(rng, n);
  Eigen::VectorXd px = geneo::apply_pi_tilde(set, x);
  CHECK((geneo::apply_pi_tilde(set, px) - px).norm() <= 1e-10 * std::max(1.0, px.norm()));

  Eigen::MatrixXd sel = set.selected_vectors();
  Eigen::VectorXd fixed = sel * oracle::random_vector(rng, int(sel.cols()));
  CHECK((geneo::apply_pi_tilde(set, fixed) - fixed).norm() <= 1e-10 * fixed.norm());

  Eigen::MatrixXd uns = set.unselected_vectors();
  Eigen::VectorXd dead = uns * oracle::random_vector(rng, int(uns.cols()));
  CHECK(geneo::apply_pi_tilde(set, dead).norm() <= 1e-10 * dead.norm());
}

TEST_CASE("annex gevp with a zero-layer extension reduces to the plain one") {
  bed::Bed b = bed::make(1, 16, {2, 1}, 1, "checkerboard", 1e3);
  geneo::Decomposition ext = geneo::extend_decomposition(b.mesh, b.dec, 0);
  geneo::PartitionOfUnity inh = geneo::inherit_partition_of_unity(b.dec, b.pou, ext);
  for (int j = 0; j < b.dec.N; ++j) {
    REQUIRE(ext.dofs[j] == b.dec.dofs[j]);
    SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, ext.cells[j], ext.dofs[j]);
    EigenPairSet plain = geneo::solve_geneo_gevp(j, b.A, b.dec, b.pou, Aneu, 0.1);
    EigenPairSet annex = geneo::solve_annex_gevp_one(j, b.A, ext, inh, Aneu, 0.1);
    REQUIRE(annex.eigenvalues.size() == plain.eigenvalues.size());
    CHECK(annex.num_selected() == plain.num_selected());
    for (int k = 0; k < plain.eigenvalues.size(); ++k) {
      if (std::isinf(plain.eigenvalues[k])) {
        CHECK(std::isinf(annex.eigenvalues[k]));
        continue;
      }
      CHECK(annex.eigenvalues[k] ==
            doctest::Approx(plain.eigenvalues[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("annex eigenvectors are discrete-harmonic inside the original subdomain") {
  bed::Bed b = bed::make(1, 64, {4, 1}, 1, "checkerboard", 1e6);
  geneo::Decomposition ext = geneo::extend_decomposition(b.mesh, b.dec, 1);
  geneo::PartitionOfUnity inh = geneo::inherit_partition_of_unity(b.dec, b.pou, ext);
  for (int j = 0; j < b.dec.N; ++j) {
    SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, ext.cells[j], ext.dofs[j]);
    EigenPairSet set = geneo::solve_annex_gevp_one(j, b.A, ext, inh, Aneu, 0.1);
    CHECK(set.harmonicity <= 1e-8);
  }
}

TEST_CASE("the unit-eigenvalue cluster is exempt from the harmonicity check") {
  // identical pencil: every selected eigenvalue is 1, so nothing is measured
  bed::Bed b = bed::make(1, 8, {1, 1}, 0, "constant", 1.0, Boundary::none);
  geneo::Decomposition ext = geneo::extend_decomposition(b.mesh, b.dec, 0);
  geneo::PartitionOfUnity inh = geneo::inherit_partition_of_unity(b.dec, b.pou, ext);
  SparseSym Aneu = geneo::assemble_subdomain_neumann(b.mesh, b.coeff, ext.cells[0], ext.dofs[0]);
  EigenPairSet set = geneo::solve_annex_gevp_one(0, b.A, ext, inh, Aneu, 0.5);
  CHECK(set.num_selected() == set.eigenvalues.size());
  CHECK(set.harmonicity == 0.0);
}
