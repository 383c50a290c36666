#include "blockdiag/operator.hpp"

#include "blockdiag/errors.hpp"
#include "blockdiag/linear_map.hpp"

#include <algorithm>

namespace blockdiag {

// Dense x dense products whose result is at least this large and whose inner
// dimension is small are kept in factored form.
constexpr Index kLowRankMinEntries = 65536;

void OperationCounter::record(std::string_view label, unsigned factor_tags) {
  total_.fetch_add(1);
  std::lock_guard lock(mutex_);
  ++by_label_[std::string(label)];
  for (unsigned bit = 1; bit != 0 && bit <= factor_tags; bit <<= 1)
    if (factor_tags & bit) ++tagged_[{bit, std::string(label)}];
}

std::uint64_t OperationCounter::tagged_count(OperatorTag tag) const {
  std::lock_guard lock(mutex_);
  std::uint64_t n = 0;
  for (const auto& [key, v] : tagged_)
    if (key.first == static_cast<unsigned>(tag)) n += v;
  return n;
}

std::map<std::string, std::uint64_t> OperationCounter::by_label() const {
  std::lock_guard lock(mutex_);
  return by_label_;
}

std::map<std::string, std::uint64_t> OperationCounter::tagged_by_label(OperatorTag tag) const {
  std::lock_guard lock(mutex_);
  std::map<std::string, std::uint64_t> out;
  for (const auto& [key, v] : tagged_)
    if (key.first == static_cast<unsigned>(tag)) out[key.second] += v;
  return out;
}

void OperationCounter::reset() {
  std::lock_guard lock(mutex_);
  total_.store(0);
  by_label_.clear();
  tagged_.clear();
}

namespace dense_audit {
namespace {
std::atomic<Index> g_max_short{0};
}
void record(Index rows, Index cols) {
  const Index s = std::min(rows, cols);
  Index cur = g_max_short.load();
  while (s > cur && !g_max_short.compare_exchange_weak(cur, s)) {
  }
}
Index max_short_side() { return g_max_short.load(); }
void reset() { g_max_short.store(0); }
}  // namespace dense_audit

Operator Operator::zero(Index rows, Index cols) {
  Operator o;
  o.rows_ = rows;
  o.cols_ = cols;
  return o;
}

Operator Operator::identity(Index n, Scalar coefficient) {
  Operator o;
  o.kind_ = Kind::identity;
  o.rows_ = o.cols_ = n;
  auto p = std::make_shared<Payload>();
  p->coefficient = coefficient;
  o.payload_ = std::move(p);
  return o;
}

Operator Operator::dense(DenseMatrix matrix) {
  Operator o;
  o.kind_ = Kind::dense;
  o.rows_ = matrix.rows();
  o.cols_ = matrix.cols();
  dense_audit::record(o.rows_, o.cols_);
  auto p = std::make_shared<Payload>();
  p->dense = std::move(matrix);
  o.payload_ = std::move(p);
  return o;
}

Operator Operator::linear(std::shared_ptr<const LinearMap> map) {
  if (!map) throw ConfigurationError("null linear map");
  Operator o;
  o.kind_ = Kind::linear;
  o.rows_ = map->rows();
  o.cols_ = map->cols();
  auto p = std::make_shared<Payload>();
  p->map = std::move(map);
  o.payload_ = std::move(p);
  return o;
}

const DenseMatrix& Operator::matrix() const {
  if (kind_ != Kind::dense) throw ConfigurationError("operator is not dense");
  return payload_->dense;
}

const LinearMap& Operator::map() const {
  if (kind_ != Kind::linear) throw ConfigurationError("operator is not a linear map");
  return *payload_->map;
}

std::shared_ptr<const LinearMap> Operator::map_ptr() const {
  if (kind_ != Kind::linear) throw ConfigurationError("operator is not a linear map");
  return payload_->map;
}

Scalar Operator::identity_coefficient() const {
  if (kind_ != Kind::identity) throw ConfigurationError("operator is not an identity");
  return payload_->coefficient;
}

DenseMatrix Operator::to_dense() const {
  switch (kind_) {
    case Kind::zero:
      if (rows_ < 0 || cols_ < 0) throw DimensionError("cannot materialize a shapeless zero");
      return DenseMatrix::Zero(rows_, cols_);
    case Kind::identity:
      return payload_->coefficient * DenseMatrix::Identity(rows_, cols_);
    case Kind::dense:
      return payload_->dense;
    case Kind::linear:
      return payload_->map->apply(DenseMatrix::Identity(cols_, cols_));
  }
  return {};
}

bool Operator::same_object(const Operator& other) const noexcept {
  if (kind_ != other.kind_) return false;
  if (kind_ == Kind::zero) return rows_ == other.rows_ && cols_ == other.cols_;
  return payload_ == other.payload_;
}

Operator Operator::with_tags(unsigned tags) const {
  Operator o(*this);
  o.tags_ = tags;
  return o;
}

Operator Operator::as_trap() const {
  Operator o(*this);
  o.trap_ = true;
  return o;
}

namespace {

void check_same_shape(const Operator& a, const Operator& b, const char* what) {
  if (a.rows() >= 0 && b.rows() >= 0 && (a.rows() != b.rows() || a.cols() != b.cols()))
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

LinearMapPtr as_map(const Operator& a) {
  switch (a.kind()) {
    case Operator::Kind::identity:
      return std::make_shared<ScaledIdentityMap>(a.rows(), a.identity_coefficient());
    case Operator::Kind::dense:
      return std::make_shared<DenseMap>(a.matrix());
    case Operator::Kind::linear:
      return a.map_ptr();
    case Operator::Kind::zero:
      break;
  }
  throw ConfigurationError("zero operator has no map form");
}

Operator combine(const Operator& a, Scalar ca, const Operator& b, Scalar cb) {
  check_same_shape(a, b, "add");
  if (b.is_structural_zero()) return ca == Scalar(1) ? a : scale(a, ca);
  if (a.is_structural_zero()) return cb == Scalar(1) ? b : scale(b, cb);
  using K = Operator::Kind;
  if (a.kind() == K::identity && b.kind() == K::identity)
    return Operator::identity(a.rows(), ca * a.identity_coefficient() + cb * b.identity_coefficient());
  if (a.kind() == K::dense && b.kind() == K::dense)
    return Operator::dense(ca * a.matrix() + cb * b.matrix());
  if (a.kind() == K::dense && b.kind() == K::identity) {
    DenseMatrix m = ca * a.matrix();
    m.diagonal().array() += cb * b.identity_coefficient();
    return Operator::dense(std::move(m));
  }
  if (a.kind() == K::identity && b.kind() == K::dense) return combine(b, cb, a, ca);
  return Operator::linear(map_sum(as_map(a), ca, as_map(b), cb));
}

}  // namespace

Operator add(const Operator& a, const Operator& b) { return combine(a, 1.0, b, 1.0); }

Operator subtract(const Operator& a, const Operator& b) { return combine(a, 1.0, b, -1.0); }

Operator scale(const Operator& a, Scalar c) {
  if (c == Scalar(1)) return a;
  switch (a.kind()) {
    case Operator::Kind::zero:
      return a;
    case Operator::Kind::identity:
      return Operator::identity(a.rows(), c * a.identity_coefficient());
    case Operator::Kind::dense:
      return Operator::dense(c * a.matrix());
    case Operator::Kind::linear:
      return Operator::linear(map_scale(a.map_ptr(), c));
  }
  return a;
}

Operator adjoint(const Operator& a) {
  switch (a.kind()) {
    case Operator::Kind::zero:
      return Operator::zero(a.cols(), a.rows());
    case Operator::Kind::identity:
      return Operator::identity(a.rows(), std::conj(a.identity_coefficient()));
    case Operator::Kind::dense:
      return Operator::dense(a.matrix().adjoint());
    case Operator::Kind::linear:
      return Operator::linear(a.map().adjoint());
  }
  return a;
}

Operator matmul(const Operator& a, const Operator& b, OperationCounter* counter,
                std::string_view label) {
  if (a.rows() >= 0 && b.rows() >= 0 && a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()));
  if (a.trapped() || b.trapped()) throw TrapError("product with a trapped operator");
  if (a.is_structural_zero() || b.is_structural_zero()) return Operator::zero(a.rows(), b.cols());
  if (a.is_identity()) return scale(b, a.identity_coefficient());
  if (b.is_identity()) return scale(a, b.identity_coefficient());
  if (counter) counter->record(label, a.tags() | b.tags());

  using K = Operator::Kind;
  if (a.kind() == K::dense && b.kind() == K::dense) {
    const Index rows = a.rows(), cols = b.cols(), inner = a.cols();
    if (rows * cols >= kLowRankMinEntries && 4 * inner <= std::min(rows, cols))
      return Operator::linear(std::make_shared<LowRankMap>(a.matrix(), b.matrix()));
    return Operator::dense(a.matrix() * b.matrix());
  }
  if (a.kind() == K::linear && b.kind() == K::dense) return Operator::dense(a.map().apply(b.matrix()));
  if (a.kind() == K::dense && b.kind() == K::linear)
    return Operator::dense(b.map().apply_adjoint(a.matrix().adjoint()).adjoint());
  return Operator::linear(map_product(a.map_ptr(), b.map_ptr()));
}

bool is_zero(const Operator& a, double atol) {
  if (atol < 0) throw ConfigurationError("negative tolerance");
  if (a.is_structural_zero()) return true;
  return max_abs(a) <= atol;
}

double max_abs(const Operator& a) {
  switch (a.kind()) {
    case Operator::Kind::zero:
      return 0.0;
    case Operator::Kind::identity:
      return std::abs(a.identity_coefficient());
    case Operator::Kind::dense:
      return a.matrix().size() ? a.matrix().cwiseAbs().maxCoeff() : 0.0;
    case Operator::Kind::linear: {
      double m = 0.0;
      // Column batches keep the materialized block small.
      const Index batch = 32;
      for (Index c0 = 0; c0 < a.cols(); c0 += batch) {
        const Index nb = std::min(batch, a.cols() - c0);
        DenseMatrix e = DenseMatrix::Zero(a.cols(), nb);
        for (Index k = 0; k < nb; ++k) e(c0 + k, k) = 1.0;
        DenseMatrix col = a.map().apply(e);
        if (col.size()) m = std::max(m, col.cwiseAbs().maxCoeff());
      }
      return m;
    }
  }
  return 0.0;
}

}  // namespace blockdiag
