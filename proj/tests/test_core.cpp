#include <doctest.h>

#include "blockdiag/linear_map.hpp"
#include "blockdiag/separation.hpp"
#include "support.hpp"

using namespace testing;

namespace {

DenseMatrix mat(std::initializer_list<std::initializer_list<Scalar>> rows) {
  DenseMatrix m(rows.size(), rows.begin()->size());
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (Scalar v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST_CASE("order index arithmetic and enumeration") {
  const OrderIndex a{1, 2}, b{0, 1};
  CHECK((a + b) == OrderIndex{1, 3});
  CHECK((a - b) == OrderIndex{1, 1});
  CHECK(a.total() == 3);
  CHECK(b.dominated_by(a));
  CHECK_FALSE(a.dominated_by(b));
  CHECK(OrderIndex::unit(3, 1) == OrderIndex{0, 1, 0});
  CHECK(OrderIndex(2).is_zero());

  std::vector<OrderIndex> seen;
  for_each_order_below(OrderIndex{1, 1}, [&](const OrderIndex& m) { seen.push_back(m); });
  CHECK(seen == std::vector<OrderIndex>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});

  const auto by_total = orders_up_to_total(2, 2);
  REQUIRE(by_total.size() == 6);
  CHECK(by_total.front() == OrderIndex{0, 0});
  for (std::size_t k = 1; k < by_total.size(); ++k) CHECK(by_total[k - 1].total() <= by_total[k].total());
}

TEST_CASE("matmul special cases and counting") {
  OperationCounter counter;
  const DenseMatrix a = mat({{1, 2}, {3, 4}});
  const Operator id = Operator::identity(2);
  CHECK(matmul(id, Operator::dense(a), &counter).to_dense() == a);
  const Operator z = matmul(Operator::zero(2, 2), Operator::dense(a), &counter);
  CHECK(z.is_structural_zero());
  CHECK(counter.matmul_count() == 0);

  const Operator p = matmul(Operator::dense(mat({{0, 1}, {0, 0}})), Operator::dense(mat({{0, 0}, {1, 0}})), &counter);
  CHECK(p.to_dense() == mat({{1, 0}, {0, 0}}));
  CHECK(counter.matmul_count() == 1);
  CHECK_THROWS_AS(matmul(Operator::dense(DenseMatrix::Ones(2, 3)), Operator::dense(DenseMatrix::Ones(2, 3))),
                  DimensionError);
}

TEST_CASE("adjoint, add, scale and zero detection") {
  CHECK(adjoint(Operator::dense(mat({{Scalar(0, 1)}}))).to_dense()(0, 0) == Scalar(0, -1));
  std::mt19937_64 rng(3);
  const DenseMatrix h = random_hermitian(3, rng);
  CHECK(max_abs_diff(adjoint(Operator::dense(h)).to_dense(), h) == 0.0);
  const DenseMatrix r = random_matrix(3, 2, rng);
  const Operator ra = adjoint(Operator::dense(r));
  CHECK(ra.rows() == 2);
  CHECK(max_abs_diff(ra.to_dense(), r.adjoint()) == 0.0);
  CHECK(adjoint(Operator::zero(2, 3)).is_structural_zero());

  const Operator a = Operator::dense(r);
  CHECK((a + Operator::zero(3, 2)).same_object(a));
  CHECK(max_abs_diff(scale(a, 1.0).to_dense(), r) == 0.0);
  CHECK(scale(Operator::dense(mat({{2}})), 0.5).to_dense()(0, 0) == Scalar(1));
  CHECK_THROWS_AS(add(a, Operator::dense(DenseMatrix::Ones(2, 2))), DimensionError);

  CHECK(is_zero(Operator::zero()));
  CHECK(is_zero(Operator::dense(mat({{1e-16}})), 1e-12));
  CHECK_FALSE(is_zero(Operator::dense(mat({{1e-6}})), 1e-12));
}

TEST_CASE("ring identities on random operators") {
  std::mt19937_64 rng(4);
  const Operator a = Operator::dense(random_matrix(3, 4, rng));
  const Operator b = Operator::dense(random_matrix(4, 2, rng));
  const Operator c = Operator::dense(random_matrix(2, 5, rng));
  const Operator d = Operator::dense(random_matrix(4, 2, rng));
  const DenseMatrix left = matmul(matmul(a, b), c).to_dense(), right = matmul(a, matmul(b, c)).to_dense();
  CHECK(max_abs_diff(left, right) <= 1e-12 * max_abs(left));
  const DenseMatrix dist = matmul(a, b + d).to_dense(), sum = (matmul(a, b) + matmul(a, d)).to_dense();
  CHECK(max_abs_diff(dist, sum) <= 1e-12 * max_abs(sum));
  CHECK(max_abs_diff(adjoint(matmul(a, b)).to_dense(), matmul(adjoint(b), adjoint(a)).to_dense()) <= 1e-12);
}

TEST_CASE("trap operators refuse products") {
  const Operator t = Operator::dense(DenseMatrix::Identity(2, 2)).as_trap();
  CHECK(t.trapped());
  CHECK_THROWS_AS(matmul(t, Operator::dense(DenseMatrix::Ones(2, 2))), TrapError);
}

TEST_CASE("matrix-free operators") {
  std::mt19937_64 rng(5);
  const DenseMatrix m = random_matrix(6, 6, rng);
  auto op = std::make_shared<MatrixFreeOperator>(
      6, [m](const DenseMatrix& x) { return DenseMatrix(m * x); },
      [m](const DenseMatrix& x) { return DenseMatrix(m.adjoint() * x); });
  const DenseMatrix x = random_matrix(6, 1, rng), y = random_matrix(6, 1, rng);
  const Scalar al(0.3, -1.2), be(2.0, 0.5);
  CHECK(max_abs_diff(op->apply(al * x + be * y), al * op->apply(x) + be * op->apply(y)) <= 1e-12 * max_abs(m) * 10);
  const Scalar lhs = (op->apply(x).adjoint() * y)(0, 0), rhs = (x.adjoint() * op->apply_adjoint(y))(0, 0);
  CHECK(std::abs(lhs - rhs) <= 1e-10);
  CHECK_THROWS_AS(op->apply(DenseMatrix::Ones(5, 1)), DimensionError);

  auto ident = std::make_shared<MatrixFreeOperator>(
      3, [](const DenseMatrix& v) { return v; }, [](const DenseMatrix& v) { return v; });
  const DenseMatrix v = random_matrix(3, 2, rng);
  CHECK(max_abs_diff(apply_block(Operator::linear(ident), v), v) == 0.0);
}

TEST_CASE("projector and projected sparse map") {
  std::mt19937_64 rng(6);
  const Index n = 50;
  Eigen::HouseholderQR<DenseMatrix> qr(random_matrix(n, 3, rng));
  const DenseMatrix psi = qr.householderQ() * DenseMatrix::Identity(n, 3);
  auto proj = std::make_shared<ComplementProjector>(psi);
  const DenseMatrix x = random_matrix(n, 2, rng);
  CHECK(max_abs_diff(proj->apply(proj->apply(x)), proj->apply(x)) <= 1e-12);
  CHECK(max_abs(proj->apply(psi)) <= 1e-12);

  const SparseMatrix h = random_sparse_hermitian(n, rng, 2.0, 1.0, 2);
  ProjectedSparseMap map(h, proj);
  const DenseMatrix p = DenseMatrix::Identity(n, n) - psi * psi.adjoint();
  const DenseMatrix oracle = p * DenseMatrix(h) * p;
  CHECK(max_abs_diff(map.apply(x), oracle * x) <= 1e-10);
  CHECK(max_abs_diff(map.apply_adjoint(x), oracle.adjoint() * x) <= 1e-10);
  CHECK(max_abs(map.apply(psi)) <= 1e-10);
}

TEST_CASE("low-rank products replace large dense products") {
  std::mt19937_64 rng(7);
  const DenseMatrix tall = random_matrix(300, 4, rng), wide = random_matrix(4, 300, rng);
  dense_audit::reset();
  OperationCounter counter;
  const Operator p = matmul(Operator::dense(tall), Operator::dense(wide), &counter);
  CHECK(p.is_linear());
  CHECK(counter.matmul_count() == 1);
  CHECK(dense_audit::max_short_side() == 4);
  const DenseMatrix x = random_matrix(300, 1, rng);
  CHECK(max_abs_diff(p.map().apply(x), tall * (wide * x)) <= 1e-10);
  CHECK(max_abs_diff(adjoint(p).map().apply(x), wide.adjoint() * (tall.adjoint() * x)) <= 1e-10);
}

TEST_CASE("series get: zeroth order, memoization, structural zeros") {
  OperationCounter counter;
  auto ctx = std::make_shared<SeriesContext>(&counter);
  const DenseMatrix h0 = mat({{0, 0}, {0, 1}});
  BlockSeries h = constant_series("H", {2}, 1, {{OrderIndex{0}, {{Operator::dense(h0)}}}}, ctx);
  CHECK(h.get(0, 0, OrderIndex{0}).to_dense() == h0);
  CHECK(h.get(0, 0, OrderIndex{3}).is_structural_zero());

  int calls = 0;
  BlockSeries s("S", {2}, {2}, 1,
                [&](std::size_t, std::size_t, const OrderIndex& n) {
                  ++calls;
                  return Operator::dense(DenseMatrix::Constant(2, 2, Scalar(n[0])));
                },
                1, ctx);
  CHECK(s.get(0, 0, OrderIndex{0}).is_structural_zero());
  CHECK(calls == 0);
  const Operator first = s.get(0, 0, OrderIndex{2});
  const Operator again = s.get(0, 0, OrderIndex{2});
  CHECK(calls == 1);
  CHECK(first.same_object(again));
  CHECK(s.is_computed(0, 0, OrderIndex{2}));
  CHECK(s.memo_size() == 1);
}

TEST_CASE("series cycle detection names the chain") {
  auto ctx = std::make_shared<SeriesContext>();
  BlockSeries* self = nullptr;
  BlockSeries s("loop", {1}, {1}, 1,
                [&](std::size_t i, std::size_t j, const OrderIndex& n) { return self->get(i, j, n); }, 0, ctx);
  self = &s;
  try {
    s.get(0, 0, OrderIndex{1});
    FAIL("expected a cycle error");
  } catch (const CycleError& e) {
    CHECK(std::string(e.what()).find("loop[0,0]") != std::string::npos);
  }
}

TEST_CASE("cauchy product of scalar series") {
  auto ctx = std::make_shared<SeriesContext>();
  auto scalar = [](double v) { return Operator::dense(DenseMatrix::Constant(1, 1, v)); };
  BlockSeries a = constant_series("a", {1}, 1, {{OrderIndex{0}, {{scalar(1)}}}, {OrderIndex{1}, {{scalar(1)}}}}, ctx);
  BlockSeries b = constant_series("b", {1}, 1, {{OrderIndex{0}, {{scalar(1)}}}, {OrderIndex{1}, {{scalar(-1)}}}}, ctx);
  BlockSeries c = cauchy_product(a, b);
  CHECK(c.get(0, 0, OrderIndex{1}).to_dense()(0, 0) == Scalar(0));
  CHECK(c.get(0, 0, OrderIndex{2}).to_dense()(0, 0) == Scalar(-1));
  CHECK(c.get(0, 0, OrderIndex{3}).is_structural_zero());
}

TEST_CASE("cauchy product: single terms, associativity, degree bound") {
  std::mt19937_64 rng(8);
  auto ctx = std::make_shared<SeriesContext>();
  const std::vector<Index> sizes = {2, 3};
  auto random_terms = [&](const std::vector<OrderIndex>& orders) {
    std::map<OrderIndex, BlockOperator> t;
    for (const auto& o : orders) t[o] = split_blocks(random_matrix(5, 5, rng), sizes);
    return t;
  };
  BlockSeries a = constant_series("a", sizes, 1, random_terms({OrderIndex{1}}), ctx);
  BlockSeries b = constant_series("b", sizes, 1, random_terms({OrderIndex{1}}), ctx);
  const BlockSeries ab = cauchy_product(a, b);
  const DenseMatrix expect = assemble_dense(a, OrderIndex{1}) * assemble_dense(b, OrderIndex{1});
  CHECK(max_abs_diff(assemble_dense(ab, OrderIndex{2}), expect) <= 1e-12);
  CHECK(ab.get(0, 0, OrderIndex{1}).is_structural_zero());

  const std::vector<OrderIndex> mixed = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  BlockSeries x = constant_series("x", sizes, 2, random_terms(mixed), ctx);
  BlockSeries y = constant_series("y", sizes, 2, random_terms(mixed), ctx);
  BlockSeries z = constant_series("z", sizes, 2, random_terms(mixed), ctx);
  const DenseMatrix l = assemble_dense(cauchy_product(cauchy_product(x, y), z), OrderIndex{1, 1});
  const DenseMatrix r = assemble_dense(cauchy_product(x, cauchy_product(y, z)), OrderIndex{1, 1});
  CHECK(max_abs_diff(l, r) <= 1e-12 * max_abs(l));

  // Orders above n must never be queried for C_n.
  BlockSeries poisoned("poisoned", sizes, sizes, 1,
                       [&](std::size_t i, std::size_t j, const OrderIndex& n) -> Operator {
                         if (n[0] > 2) throw std::logic_error("queried beyond the degree bound");
                         return Operator::dense(DenseMatrix::Ones(sizes[i], sizes[j]));
                       },
                       1, ctx);
  const BlockSeries pp = cauchy_product(poisoned, poisoned);
  CHECK_NOTHROW(pp.get(0, 1, OrderIndex{3}));
}

TEST_CASE("series adjoint delegates to the transposed block") {
  std::mt19937_64 rng(9);
  OperationCounter counter;
  auto ctx = std::make_shared<SeriesContext>(&counter);
  const std::vector<Index> sizes = {2, 2};
  std::map<OrderIndex, BlockOperator> t = {{OrderIndex{1}, split_blocks(random_matrix(4, 4, rng), sizes)}};
  BlockSeries a = constant_series("a", sizes, 1, t, ctx);
  BlockSeries ad = series_adjoint(a);
  CHECK(max_abs_diff(ad.get(1, 0, OrderIndex{1}).to_dense(), a.get(0, 1, OrderIndex{1}).to_dense().adjoint()) == 0);
  BlockSeries add = series_adjoint(ad);
  CHECK(max_abs_diff(assemble_dense(add, OrderIndex{1}), assemble_dense(a, OrderIndex{1})) == 0);
  CHECK(counter.matmul_count() == 0);
}

TEST_CASE("slices flag structural zeros") {
  auto ctx = std::make_shared<SeriesContext>();
  const Operator one = Operator::dense(DenseMatrix::Ones(1, 1));
  BlockSeries h = constant_series("H", {1}, 1, {{OrderIndex{0}, {{one}}}, {OrderIndex{1}, {{one}}}}, ctx);
  const MaskedSlice s = h.slice(0, 0, OrderIndex{3});
  CHECK(s.orders.size() == 4);
  CHECK(s.unmasked_count() == 2);
  CHECK(s.is_masked(OrderIndex{2}));
  CHECK_FALSE(s.is_masked(OrderIndex{1}));

  BlockSeries u("U'", {1}, {1}, 1, [&](std::size_t, std::size_t, const OrderIndex&) { return one; }, 1, ctx);
  CHECK(u.slice(0, 0, OrderIndex{0}).unmasked_count() == 0);
}

TEST_CASE("select and remain") {
  std::mt19937_64 rng(10);
  SeparationRule whole = SeparationRule::block_diagonal({2, 3});
  const Operator diag = Operator::dense(random_matrix(2, 2, rng));
  const Operator off = Operator::dense(random_matrix(2, 3, rng));
  CHECK(select(diag, whole, 0, 0).same_object(diag));
  CHECK(select(off, whole, 0, 1).is_structural_zero());
  CHECK(remain(off, whole, 0, 1).same_object(off));

  SeparationRule masked = SeparationRule::block_diagonal({2});
  Mask m(2, 2);
  m << true, false, false, true;
  masked.set_mask(0, m);
  const DenseMatrix a = random_matrix(2, 2, rng);
  const DenseMatrix s = select(Operator::dense(a), masked, 0, 0).to_dense();
  CHECK(s(0, 1) == Scalar(0));
  CHECK(s(0, 0) == a(0, 0));
  const DenseMatrix r = remain(Operator::dense(a), masked, 0, 0).to_dense();
  CHECK(max_abs_diff(s + r, a) == 0.0);
  CHECK(max_abs_diff(remain(Operator::dense(r), masked, 0, 0).to_dense(), r) == 0.0);
  CHECK(max_abs_diff(remain(Operator::dense(a), masked, 0, 0).to_dense().adjoint(),
                     remain(Operator::dense(DenseMatrix(a.adjoint())), masked, 0, 0).to_dense()) == 0.0);
}

TEST_CASE("masks must be symmetric with a true diagonal") {
  SeparationRule rule = SeparationRule::block_diagonal({2});
  Mask asym(2, 2);
  asym << true, true, false, true;
  CHECK_THROWS_AS(rule.set_mask(0, asym), ConfigurationError);
  Mask hole(2, 2);
  hole << false, true, true, true;
  CHECK_THROWS_AS(rule.set_mask(0, hole), ConfigurationError);
  Mask wrong(3, 3);
  wrong.setConstant(true);
  CHECK_THROWS(rule.set_mask(0, wrong));
}

TEST_CASE("rule validation against degeneracies") {
  SeparationRule two = SeparationRule::block_diagonal({1, 1});
  EigenstructureInfo ok{{Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)}};
  CHECK(validate_rule(two, ok).ok);
  EigenstructureInfo degenerate{{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0)}};
  const ValidationReport bad = validate_rule(two, degenerate);
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].first == 0);
  CHECK(bad.violations[0].second == 1);
  CHECK_THROWS_AS(require_valid(two, degenerate), RuleViolation);

  SeparationRule masked = SeparationRule::block_diagonal({3});
  Mask m(3, 3);
  m << true, false, true, false, true, true, true, true, true;
  masked.set_mask(0, m);
  Eigen::VectorXd e(3);
  e << 2, 2, 3;
  const ValidationReport r = validate_rule(masked, {{e}});
  CHECK_FALSE(r.ok);
  CHECK(r.violations.size() == 1);
}
