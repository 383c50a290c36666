#include "blockdiag/linear_map.hpp"

#include "blockdiag/errors.hpp"

namespace blockdiag {

namespace {
void check_rows(Index expected, const DenseMatrix& x, const char* who) {
  if (x.rows() != expected)
    throw DimensionError(std::string(who) + ": expected " + std::to_string(expected) +
                         " rows, got " + std::to_string(x.rows()));
}
}  // namespace

LinearMapPtr LinearMap::adjoint() const { return std::make_shared<AdjointMap>(shared_from_this()); }

MatrixFreeOperator::MatrixFreeOperator(Index dimension, Action apply, Action apply_adjoint)
    : MatrixFreeOperator(dimension, dimension, std::move(apply), std::move(apply_adjoint)) {}

MatrixFreeOperator::MatrixFreeOperator(Index rows, Index cols, Action apply, Action apply_adjoint)
    : rows_(rows), cols_(cols), apply_(std::move(apply)), apply_adjoint_(std::move(apply_adjoint)) {
  if (rows <= 0 || cols <= 0) throw DimensionError("matrix-free operator needs a positive size");
  if (!apply_ || !apply_adjoint_) throw ConfigurationError("matrix-free operator needs both actions");
}

DenseMatrix MatrixFreeOperator::apply(const DenseMatrix& x) const {
  check_rows(cols_, x, "MatrixFreeOperator::apply");
  DenseMatrix y = apply_(x);
  if (y.rows() != rows_ || y.cols() != x.cols()) throw DimensionError("matrix-free action returned wrong shape");
  return y;
}

DenseMatrix MatrixFreeOperator::apply_adjoint(const DenseMatrix& x) const {
  check_rows(rows_, x, "MatrixFreeOperator::apply_adjoint");
  DenseMatrix y = apply_adjoint_(x);
  if (y.rows() != cols_ || y.cols() != x.cols()) throw DimensionError("matrix-free action returned wrong shape");
  return y;
}

ComplementProjector::ComplementProjector(DenseMatrix psi) : psi_(std::move(psi)) {}

DenseMatrix ComplementProjector::apply(const DenseMatrix& x) const {
  check_rows(psi_.rows(), x, "ComplementProjector");
  return x - psi_ * (psi_.adjoint() * x);
}

ProjectedSparseMap::ProjectedSparseMap(SparseMatrix matrix,
                                       std::shared_ptr<const ComplementProjector> projector)
    : matrix_(std::move(matrix)), projector_(std::move(projector)) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionError("projected map needs a square matrix");
  if (projector_ && projector_->rows() != matrix_.rows())
    throw DimensionError("projector and matrix sizes differ");
  matrix_.makeCompressed();
  matrix_adjoint_ = matrix_.adjoint();
}

DenseMatrix ProjectedSparseMap::apply(const DenseMatrix& x) const {
  check_rows(matrix_.cols(), x, "ProjectedSparseMap");
  if (!projector_) return matrix_ * x;
  return projector_->apply(matrix_ * projector_->apply(x));
}

DenseMatrix ProjectedSparseMap::apply_adjoint(const DenseMatrix& x) const {
  check_rows(matrix_.rows(), x, "ProjectedSparseMap");
  if (!projector_) return matrix_adjoint_ * x;
  return projector_->apply(matrix_adjoint_ * projector_->apply(x));
}

LowRankMap::LowRankMap(DenseMatrix left, DenseMatrix right) : left_(std::move(left)), right_(std::move(right)) {
  if (left_.cols() != right_.rows()) throw DimensionError("low-rank factors do not chain");
  dense_audit::record(left_.rows(), left_.cols());
  dense_audit::record(right_.rows(), right_.cols());
}

DenseMatrix LowRankMap::apply(const DenseMatrix& x) const {
  check_rows(right_.cols(), x, "LowRankMap");
  return left_ * (right_ * x);
}

DenseMatrix LowRankMap::apply_adjoint(const DenseMatrix& x) const {
  check_rows(left_.rows(), x, "LowRankMap");
  return right_.adjoint() * (left_.adjoint() * x);
}

LinearMapPtr LowRankMap::adjoint() const {
  return std::make_shared<LowRankMap>(right_.adjoint(), left_.adjoint());
}

SumMap::SumMap(std::vector<std::pair<Scalar, LinearMapPtr>> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw ConfigurationError("empty map sum");
  for (const auto& t : terms_)
    if (t.second->rows() != terms_.front().second->rows() || t.second->cols() != terms_.front().second->cols())
      throw DimensionError("map sum: shape mismatch");
}

Index SumMap::rows() const { return terms_.front().second->rows(); }
Index SumMap::cols() const { return terms_.front().second->cols(); }

DenseMatrix SumMap::apply(const DenseMatrix& x) const {
  DenseMatrix y = terms_.front().first * terms_.front().second->apply(x);
  for (std::size_t i = 1; i < terms_.size(); ++i) y += terms_[i].first * terms_[i].second->apply(x);
  return y;
}

DenseMatrix SumMap::apply_adjoint(const DenseMatrix& x) const {
  DenseMatrix y = std::conj(terms_.front().first) * terms_.front().second->apply_adjoint(x);
  for (std::size_t i = 1; i < terms_.size(); ++i)
    y += std::conj(terms_[i].first) * terms_[i].second->apply_adjoint(x);
  return y;
}

ProductMap::ProductMap(LinearMapPtr first, LinearMapPtr second)
    : first_(std::move(first)), second_(std::move(second)) {
  if (first_->cols() != second_->rows()) throw DimensionError("map product: inner dimensions differ");
}

DenseMatrix ProductMap::apply(const DenseMatrix& x) const { return first_->apply(second_->apply(x)); }

DenseMatrix ProductMap::apply_adjoint(const DenseMatrix& x) const {
  return second_->apply_adjoint(first_->apply_adjoint(x));
}

DenseMatrix DenseMap::apply(const DenseMatrix& x) const {
  check_rows(matrix_.cols(), x, "DenseMap");
  return matrix_ * x;
}

DenseMatrix DenseMap::apply_adjoint(const DenseMatrix& x) const {
  check_rows(matrix_.rows(), x, "DenseMap");
  return matrix_.adjoint() * x;
}

DenseMatrix ScaledIdentityMap::apply(const DenseMatrix& x) const {
  check_rows(n_, x, "ScaledIdentityMap");
  return c_ * x;
}

DenseMatrix ScaledIdentityMap::apply_adjoint(const DenseMatrix& x) const {
  check_rows(n_, x, "ScaledIdentityMap");
  return std::conj(c_) * x;
}

LinearMapPtr map_sum(const LinearMapPtr& a, Scalar ca, const LinearMapPtr& b, Scalar cb) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) throw DimensionError("map sum: shape mismatch");
  auto la = std::dynamic_pointer_cast<const LowRankMap>(a);
  auto lb = std::dynamic_pointer_cast<const LowRankMap>(b);
  if (la && lb) {
    // Stack the factors: [ca L_a, cb L_b] [R_a; R_b].
    DenseMatrix left(la->rows(), la->rank() + lb->rank());
    left << ca * la->left(), cb * lb->left();
    DenseMatrix right(la->rank() + lb->rank(), la->cols());
    right << la->right(), lb->right();
    return std::make_shared<LowRankMap>(std::move(left), std::move(right));
  }
  std::vector<std::pair<Scalar, LinearMapPtr>> terms;
  auto append = [&terms](const LinearMapPtr& m, Scalar c) {
    if (auto s = std::dynamic_pointer_cast<const SumMap>(m)) {
      for (const auto& t : s->terms()) terms.emplace_back(c * t.first, t.second);
    } else {
      terms.emplace_back(c, m);
    }
  };
  append(a, ca);
  append(b, cb);
  return std::make_shared<SumMap>(std::move(terms));
}

LinearMapPtr map_scale(const LinearMapPtr& a, Scalar c) {
  if (auto l = std::dynamic_pointer_cast<const LowRankMap>(a))
    return std::make_shared<LowRankMap>(c * l->left(), l->right());
  if (auto s = std::dynamic_pointer_cast<const SumMap>(a)) {
    auto terms = s->terms();
    for (auto& t : terms) t.first *= c;
    return std::make_shared<SumMap>(std::move(terms));
  }
  return std::make_shared<SumMap>(std::vector<std::pair<Scalar, LinearMapPtr>>{{c, a}});
}

LinearMapPtr map_product(const LinearMapPtr& a, const LinearMapPtr& b) {
  if (a->cols() != b->rows()) throw DimensionError("map product: inner dimensions differ");
  if (auto la = std::dynamic_pointer_cast<const LowRankMap>(a))
    return std::make_shared<LowRankMap>(la->left(), b->apply_adjoint(la->right().adjoint()).adjoint());
  if (auto lb = std::dynamic_pointer_cast<const LowRankMap>(b))
    return std::make_shared<LowRankMap>(a->apply(lb->left()), lb->right());
  return std::make_shared<ProductMap>(a, b);
}

DenseMatrix apply_block(const Operator& op, const DenseMatrix& vectors, OperationCounter* counter) {
  if (op.cols() >= 0 && op.cols() != vectors.rows())
    throw DimensionError("apply_block: operator has " + std::to_string(op.cols()) + " columns, vectors have " +
                         std::to_string(vectors.rows()) + " rows");
  switch (op.kind()) {
    case Operator::Kind::zero:
      return DenseMatrix::Zero(op.rows() >= 0 ? op.rows() : vectors.rows(), vectors.cols());
    case Operator::Kind::identity:
      return op.identity_coefficient() * vectors;
    case Operator::Kind::dense:
      if (counter) counter->record("apply_block", op.tags());
      return op.matrix() * vectors;
    case Operator::Kind::linear:
      if (counter) counter->record("apply_block", op.tags());
      return op.map().apply(vectors);
  }
  return {};
}

}  // namespace blockdiag
