#pragma once

#include "blockdiag/operator.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace blockdiag {

using SparseMatrix = Eigen::SparseMatrix<Scalar>;

// Action-only operator: x -> M x and x -> M^dag x on blocks of column vectors.
class LinearMap : public std::enable_shared_from_this<LinearMap> {
 public:
  virtual ~LinearMap() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual DenseMatrix apply(const DenseMatrix& x) const = 0;
  virtual DenseMatrix apply_adjoint(const DenseMatrix& x) const = 0;
  virtual std::shared_ptr<const LinearMap> adjoint() const;
};

using LinearMapPtr = std::shared_ptr<const LinearMap>;

// User-supplied actions.
class MatrixFreeOperator final : public LinearMap {
 public:
  using Action = std::function<DenseMatrix(const DenseMatrix&)>;

  MatrixFreeOperator(Index dimension, Action apply, Action apply_adjoint);
  MatrixFreeOperator(Index rows, Index cols, Action apply, Action apply_adjoint);

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override;

 private:
  Index rows_;
  Index cols_;
  Action apply_;
  Action apply_adjoint_;
};

// P_I = 1 - Psi Psi^dag for an orthonormal column block Psi.
class ComplementProjector final : public LinearMap {
 public:
  explicit ComplementProjector(DenseMatrix psi);

  Index rows() const override { return psi_.rows(); }
  Index cols() const override { return psi_.rows(); }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override { return apply(x); }
  LinearMapPtr adjoint() const override { return shared_from_this(); }

  const DenseMatrix& psi() const noexcept { return psi_; }

 private:
  DenseMatrix psi_;
};

// P_I M P_I with M sparse and P_I the complement of span(Psi).
class ProjectedSparseMap final : public LinearMap {
 public:
  ProjectedSparseMap(SparseMatrix matrix, std::shared_ptr<const ComplementProjector> projector);

  Index rows() const override { return matrix_.rows(); }
  Index cols() const override { return matrix_.cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override;

  const SparseMatrix& matrix() const noexcept { return matrix_; }

 private:
  SparseMatrix matrix_;
  SparseMatrix matrix_adjoint_;
  std::shared_ptr<const ComplementProjector> projector_;
};

// left * right with a small inner dimension.
class LowRankMap final : public LinearMap {
 public:
  LowRankMap(DenseMatrix left, DenseMatrix right);

  Index rows() const override { return left_.rows(); }
  Index cols() const override { return right_.cols(); }
  Index rank() const noexcept { return left_.cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override;
  LinearMapPtr adjoint() const override;

  const DenseMatrix& left() const noexcept { return left_; }
  const DenseMatrix& right() const noexcept { return right_; }

 private:
  DenseMatrix left_;
  DenseMatrix right_;
};

class SumMap final : public LinearMap {
 public:
  explicit SumMap(std::vector<std::pair<Scalar, LinearMapPtr>> terms);

  Index rows() const override;
  Index cols() const override;
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override;

  const std::vector<std::pair<Scalar, LinearMapPtr>>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::pair<Scalar, LinearMapPtr>> terms_;
};

// first * second.
class ProductMap final : public LinearMap {
 public:
  ProductMap(LinearMapPtr first, LinearMapPtr second);

  Index rows() const override { return first_->rows(); }
  Index cols() const override { return second_->cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override;

 private:
  LinearMapPtr first_;
  LinearMapPtr second_;
};

class AdjointMap final : public LinearMap {
 public:
  explicit AdjointMap(LinearMapPtr inner) : inner_(std::move(inner)) {}

  Index rows() const override { return inner_->cols(); }
  Index cols() const override { return inner_->rows(); }
  DenseMatrix apply(const DenseMatrix& x) const override { return inner_->apply_adjoint(x); }
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override { return inner_->apply(x); }
  LinearMapPtr adjoint() const override { return inner_; }

 private:
  LinearMapPtr inner_;
};

// Wraps a small dense matrix so it can take part in map sums.
class DenseMap final : public LinearMap {
 public:
  explicit DenseMap(DenseMatrix matrix) : matrix_(std::move(matrix)) {}

  Index rows() const override { return matrix_.rows(); }
  Index cols() const override { return matrix_.cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override;

 private:
  DenseMatrix matrix_;
};

// Scalar multiple of the identity of a given size.
class ScaledIdentityMap final : public LinearMap {
 public:
  ScaledIdentityMap(Index n, Scalar c) : n_(n), c_(c) {}

  Index rows() const override { return n_; }
  Index cols() const override { return n_; }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& x) const override;

 private:
  Index n_;
  Scalar c_;
};

// Map algebra used by the Operator functions. Products with a low-rank factor
// are evaluated eagerly and stay low-rank; other products stay lazy.
LinearMapPtr map_sum(const LinearMapPtr& a, Scalar ca, const LinearMapPtr& b, Scalar cb);
LinearMapPtr map_scale(const LinearMapPtr& a, Scalar c);
LinearMapPtr map_product(const LinearMapPtr& a, const LinearMapPtr& b);

// M x for any operator kind; shapeless zeros yield zeros of x's column count.
DenseMatrix apply_block(const Operator& op, const DenseMatrix& vectors,
                        OperationCounter* counter = nullptr);

}  // namespace blockdiag
