#include <doctest.h>

#include <cmath>

#include "pipekrylov/errors.hpp"
#include "pipekrylov/preconditioner.hpp"
#include "pipekrylov/problems.hpp"
#include "test_support.hpp"

using namespace pipekrylov;
using pipekrylov::testing::dense;
using pipekrylov::testing::random_vector;

TEST_CASE("identity and jacobi") {
  const ProblemInstance p = make_poisson(2, 5, 0);
  const Vector r = random_vector(25, 1);
  auto I = make_identity();
  CHECK(I->apply(r) == r);
  CHECK(I->is_linear());

  auto J = make_jacobi(p.A);
  const Vector z = J->apply(r);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(z[i] == doctest::Approx(r[i] / 4.0));

  const SparseMatrix bad = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}}, Symmetry::general);
  CHECK_THROWS_AS(make_jacobi(bad), SetupError);
}

TEST_CASE("jacobi_pcg_fixed converges to the dense solve") {
  const ProblemInstance p = make_poisson(2, 4, 0);
  Vector inv(16);
  for (std::size_t i = 0; i < 16; ++i) inv[i] = 1.0 / p.A.at(i, i);
  const Vector r = random_vector(16, 5);
  const Vector z = jacobi_pcg_fixed(p.A, inv, r, 40);
  const Eigen::VectorXd oracle = dense(p.A).llt().solve(dense(r));
  CHECK((dense(z) - oracle).norm() < 1e-10 * oracle.norm());
}

TEST_CASE("block jacobi with many inner steps approaches the block solve") {
  const ProblemInstance p = make_poisson(2, 6, 0);
  auto B = make_block_jacobi(p.A, 3, 60);
  const Vector r = random_vector(36, 9);
  const Vector z = B->apply(r);
  const Eigen::MatrixXd M = dense(p.A);
  Eigen::VectorXd oracle(36);
  const Eigen::VectorXd rd = dense(r);
  for (int b = 0; b < 3; ++b) {
    oracle.segment(12 * b, 12) = M.block(12 * b, 12 * b, 12, 12).llt().solve(rd.segment(12 * b, 12));
  }
  CHECK((dense(z) - oracle).norm() < 1e-10 * oracle.norm());
  CHECK_FALSE(B->is_linear());
}

TEST_CASE("nested krylov is positive on the residual and nonlinear") {
  const ProblemInstance p = make_poisson(2, 6, 0);
  auto B = make_nested_krylov(p.A, 3);
  CHECK_FALSE(B->is_linear());
  const Vector r1 = random_vector(36, 1);
  const Vector r2 = random_vector(36, 2);
  CHECK(dot(B->apply(r1), r1) > 0.0);
  const Vector sum = axpy(r1, 1.0, r2);
  const Vector lin = axpy(B->apply(r1), 1.0, B->apply(r2));
  CHECK(norm2(axpy(B->apply(sum), -1.0, lin)) > 1e-8);
}

TEST_CASE("noisy perturbation has the requested relative size") {
  auto B = make_noisy(1e-3, 42);
  const Vector r = random_vector(50, 3);
  const Vector z = B->apply(r);
  CHECK(norm2(axpy(z, -1.0, r)) == doctest::Approx(1e-3 * norm2(r)).epsilon(1e-10));
  CHECK(B->apply(Vector(50)) == Vector(50));
}

TEST_CASE("noisy streams replay from the seed and through clone") {
  auto a = make_noisy(1e-2, 7);
  auto b = make_noisy(1e-2, 7);
  const Vector r = random_vector(10, 1);
  const Vector first = a->apply(r);
  CHECK(first == b->apply(r));
  auto c = a->clone();
  CHECK(a->apply(r) == c->apply(r));
  CHECK_FALSE(a->apply(r) == first);
}

TEST_CASE("make_preconditioner validates parameters") {
  const ProblemInstance p = make_poisson(2, 4, 0);
  CHECK_THROWS_AS(make_preconditioner(PcKind::noisy, p.A, -1.0), SetupError);
  CHECK_THROWS_AS(make_preconditioner(PcKind::block_jacobi, p.A, 0.0, 0, 0), SetupError);
  CHECK(make_preconditioner(PcKind::jacobi, p.A)->name() == "jacobi");
}

TEST_CASE("faithfulness probe against dense oracle") {
  const ProblemInstance p = make_poisson(2, 5, 0);
  auto J = make_jacobi(p.A);
  const FaithfulnessEstimate est = probe_faithfulness(*J, p.A, 30, 4);
  CHECK(est.samples == 30);
  CHECK(est.ratios.size() == 30);
  // ||(D^{-1} A - I) v|| / ||v|| is bounded by the spectral norm of D^{-1} A - I
  const Eigen::MatrixXd M = dense(p.A);
  const Eigen::MatrixXd E = M.diagonal().cwiseInverse().asDiagonal() * M - Eigen::MatrixXd::Identity(25, 25);
  const double bound = Eigen::JacobiSVD<Eigen::MatrixXd>(E).singularValues()(0);
  for (double r : est.ratios) CHECK(r <= bound * (1.0 + 1e-12));
  CHECK(est.c_hat == doctest::Approx(*std::max_element(est.ratios.begin(), est.ratios.end())));

  auto noisy = make_noisy(1e-3, 1);
  const SparseMatrix I = SparseMatrix::identity(25);
  CHECK(probe_faithfulness(*noisy, I, 10, 2).c_hat == doctest::Approx(1e-3).epsilon(1e-10));
}
