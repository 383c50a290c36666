#pragma once

#include <Eigen/Dense>

#include <array>
#include <atomic>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace blockdiag {

using Scalar = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

class LinearMap;

// Bit flags carried by operators so that instrumentation can attribute products.
enum OperatorTag : unsigned {
  kNoTag = 0,
  kSelectedPerturbationTag = 1u << 0,
  kUnperturbedTag = 1u << 1,
};

// Tally of operator-operator products. Products with a structural zero or a
// scalar multiple of the identity are free and never recorded.
class OperationCounter {
 public:
  void record(std::string_view label, unsigned factor_tags);

  std::uint64_t matmul_count() const noexcept { return total_.load(); }
  // Products in which at least one factor carried `tag`.
  std::uint64_t tagged_count(OperatorTag tag) const;
  // Products attributed to a series label (empty label for direct calls).
  std::map<std::string, std::uint64_t> by_label() const;
  std::map<std::string, std::uint64_t> tagged_by_label(OperatorTag tag) const;
  void reset();

 private:
  std::atomic<std::uint64_t> total_{0};
  mutable std::mutex mutex_;
  std::map<std::string, std::uint64_t> by_label_;
  std::map<std::pair<unsigned, std::string>, std::uint64_t> tagged_;
};

// Immutable operator value: a structural zero, a scalar multiple of the
// identity, a dense complex matrix, or a matrix-free linear map.  Copies share
// the payload, so identity of results can be checked with same_object().
class Operator {
 public:
  enum class Kind { zero, identity, dense, linear };

  // Structural zero of unknown shape.
  Operator() = default;

  static Operator zero(Index rows = -1, Index cols = -1);
  static Operator identity(Index n, Scalar coefficient = 1.0);
  static Operator dense(DenseMatrix matrix);
  static Operator linear(std::shared_ptr<const LinearMap> map);

  Kind kind() const noexcept { return kind_; }
  bool is_structural_zero() const noexcept { return kind_ == Kind::zero; }
  bool is_dense() const noexcept { return kind_ == Kind::dense; }
  bool is_linear() const noexcept { return kind_ == Kind::linear; }
  bool is_identity() const noexcept { return kind_ == Kind::identity; }

  // -1 when unknown (shapeless zero).
  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }

  const DenseMatrix& matrix() const;
  const LinearMap& map() const;
  std::shared_ptr<const LinearMap> map_ptr() const;
  Scalar identity_coefficient() const;

  // Dense copy; linear maps are materialized column by column (tests only).
  DenseMatrix to_dense() const;

  bool same_object(const Operator& other) const noexcept;

  unsigned tags() const noexcept { return tags_; }
  Operator with_tags(unsigned tags) const;
  bool trapped() const noexcept { return trap_; }
  // Copy whose participation in any product raises TrapError.
  Operator as_trap() const;

 private:
  struct Payload {
    DenseMatrix dense;
    std::shared_ptr<const LinearMap> map;
    Scalar coefficient{1.0, 0.0};
  };

  Kind kind_ = Kind::zero;
  Index rows_ = -1;
  Index cols_ = -1;
  std::shared_ptr<const Payload> payload_;
  unsigned tags_ = kNoTag;
  bool trap_ = false;
};

Operator add(const Operator& a, const Operator& b);
Operator subtract(const Operator& a, const Operator& b);
Operator scale(const Operator& a, Scalar c);
Operator adjoint(const Operator& a);
Operator matmul(const Operator& a, const Operator& b, OperationCounter* counter = nullptr,
                std::string_view label = {});
bool is_zero(const Operator& a, double atol = 1e-12);

inline Operator operator+(const Operator& a, const Operator& b) { return add(a, b); }
inline Operator operator-(const Operator& a, const Operator& b) { return subtract(a, b); }
inline Operator operator*(Scalar c, const Operator& a) { return scale(a, c); }

// Largest elementwise magnitude of a dense-representable operator.
double max_abs(const Operator& a);

// Process-wide record of the dense buffers handed out by Operator::dense and
// matrix-free applications. Used to audit that no N x N dense matrix appears
// in implicit mode.
namespace dense_audit {
void record(Index rows, Index cols);
// Largest min(rows, cols) seen since the last reset.
Index max_short_side();
void reset();
}  // namespace dense_audit

}  // namespace blockdiag
