#include <doctest.h>

#include "support.hpp"

using namespace testing;

namespace {

struct Toy {
  DenseMatrix h0d;
  SparseMatrix h0, h1;
  DenseMatrix vectors;
  Eigen::VectorXd energies;
};

Toy toy(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Toy t;
  t.h0 = random_sparse_hermitian(n, rng, 4.0, 0.5, 1);
  t.h1 = random_sparse_hermitian(n, rng, 0.3, 0.2, 1);
  t.h0d = DenseMatrix(t.h0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t.h0d);
  t.vectors = es.eigenvectors();
  t.energies = es.eigenvalues();
  return t;
}

}  // namespace

TEST_CASE("implicit mode matches explicit mode on a small problem") {
  const Toy t = toy(6, 21);
  const Index ne = 2;
  const ExtendedProblem ext =
      build_extended_problem(t.h0, {{OrderIndex{1}, t.h1}}, t.vectors.leftCols(ne), t.energies.head(ne));
  const auto implicit = block_diagonalize(ext.problem);
  const auto dense = block_diagonalize(PerturbationProblem::from_eigenvectors(
      t.h0d, {{OrderIndex{1}, DenseMatrix(t.h1)}}, {t.vectors.leftCols(ne), t.vectors.rightCols(6 - ne)}));
  for (unsigned n = 0; n <= 3; ++n)
    CHECK(max_abs_diff(implicit.H_tilde().get(0, 0, OrderIndex{n}).to_dense(),
                       dense.H_tilde().get(0, 0, OrderIndex{n}).to_dense()) <= 1e-10);
}

TEST_CASE("implicit mode validates its input") {
  const Toy t = toy(6, 22);
  CHECK_THROWS_AS(build_extended_problem(t.h0, {}, t.vectors, t.energies), ConfigurationError);
  DenseMatrix not_eigen = DenseMatrix::Zero(6, 1);
  not_eigen(0, 0) = 1;
  CHECK_THROWS_AS(build_extended_problem(t.h0, {}, not_eigen, Eigen::VectorXd::Zero(1)), ConfigurationError);
  CHECK_THROWS_AS(build_extended_problem(t.h0, {}, t.vectors.leftCols(2), t.energies.head(1)), DimensionError);
}

TEST_CASE("one factorization per explicit state") {
  const Toy t = toy(400, 23);
  const ExtendedProblem ext = build_extended_problem(t.h0, {{OrderIndex{1}, t.h1}}, t.vectors.leftCols(4), t.energies.head(4));
  CHECK(ext.shifted->factorization_count() == 4);
}

TEST_CASE("deflated shifted solve") {
  SparseMatrix h0(3, 3);
  h0.insert(0, 0) = 0.0;
  h0.insert(1, 1) = 2.0;
  h0.insert(2, 2) = 3.0;
  DenseMatrix psi = DenseMatrix::Zero(3, 1);
  psi(0, 0) = 1;
  const ExtendedProblem ext = build_extended_problem(h0, {}, psi, Eigen::VectorXd::Zero(1));

  CHECK(max_abs(solve_shifted_deflated(ext, 0, DenseMatrix::Zero(1, 3))) == 0.0);
  DenseMatrix rhs(1, 3);
  rhs << 0.0, Scalar(1, 1), 2.0;
  const DenseMatrix x = solve_shifted_deflated(ext, 0, rhs);
  CHECK(std::abs(x(0, 0)) < 1e-14);
  CHECK(std::abs(x(0, 1) - Scalar(-0.5, -0.5)) < 1e-14);
  CHECK(std::abs(x(0, 2) - Scalar(-2.0 / 3.0)) < 1e-14);

  DenseMatrix leaking(1, 3);
  leaking << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(solve_shifted_deflated(ext, 0, leaking), DeflationError);
}

TEST_CASE("generator rows solve the shifted equation and avoid the explicit subspace") {
  const Toy t = toy(60, 24);
  const Index ne = 3;
  const DenseMatrix psi = t.vectors.leftCols(ne);
  const ExtendedProblem ext = build_extended_problem(t.h0, {{OrderIndex{1}, t.h1}}, psi, t.energies.head(ne));
  const auto r = block_diagonalize(ext.problem);
  const DenseMatrix v = r.intermediate("V").get(0, 1, OrderIndex{1}).to_dense();
  CHECK(max_abs(v * psi) <= 1e-10);
  // [V, H0] = -H_R at first order: V_i (E_i - H0) = -(H1)_{i, complement}.
  const DenseMatrix h1_row = ext.problem.perturbation(0, 1, OrderIndex{1}).to_dense();
  for (Index i = 0; i < ne; ++i) {
    const DenseMatrix lhs = v.row(i) * (t.energies(i) * DenseMatrix::Identity(60, 60) - t.h0d);
    CHECK(max_abs_diff(lhs, -h1_row.row(i)) <= 1e-9);
  }
}
