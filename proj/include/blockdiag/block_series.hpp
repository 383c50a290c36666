#pragma once

#include "blockdiag/operator.hpp"
#include "blockdiag/order_index.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace blockdiag {

enum class Retention {
  keep,     // every computed element stays memoized
  minimal,  // intermediate stores are dropped after each top-level query
};

// Shared evaluation state for a family of series: the product counter, the
// chain of elements under evaluation and the retention policy.
class SeriesContext {
 public:
  explicit SeriesContext(OperationCounter* counter = nullptr, Retention retention = Retention::keep)
      : counter_(counter), retention_(retention) {}

  OperationCounter* counter() const noexcept { return counter_; }
  Retention retention() const noexcept { return retention_; }
  const std::vector<std::string>& stack() const noexcept { return stack_; }

  // Called in minimal-retention mode whenever the evaluation stack empties.
  void add_release_hook(std::function<void()> hook) { release_hooks_.push_back(std::move(hook)); }

 private:
  friend class BlockSeries;
  OperationCounter* counter_;
  Retention retention_;
  std::vector<std::string> stack_;
  std::vector<std::function<void()>> release_hooks_;
};

enum class SeriesSymmetry { none, hermitian, antihermitian };

// All orders <= max_orders of one block; structural zeros are flagged as masked.
struct MaskedSlice {
  OrderIndex max_orders;
  std::vector<OrderIndex> orders;
  std::vector<Operator> values;
  std::vector<bool> masked;

  std::size_t unmasked_count() const;
  const Operator& at(const OrderIndex& order) const;
  bool is_masked(const OrderIndex& order) const;
};

// Lazily evaluated, memoized multivariate series of b x b operator blocks.
// Handles are cheap to copy and share one store.
class BlockSeries {
 public:
  using EvalFn = std::function<Operator(std::size_t row, std::size_t col, const OrderIndex& order)>;

  BlockSeries() = default;
  // Block sizes may be -1 when unknown. Orders with total degree below
  // `start` are structural zeros and never reach `eval`.
  BlockSeries(std::string name, std::vector<Index> row_sizes, std::vector<Index> col_sizes,
              std::size_t n_params, EvalFn eval, unsigned start = 0,
              std::shared_ptr<SeriesContext> context = nullptr,
              SeriesSymmetry symmetry = SeriesSymmetry::none);

  bool valid() const noexcept { return static_cast<bool>(data_); }
  const std::string& name() const;
  std::size_t block_rows() const;
  std::size_t block_cols() const;
  Index rows_of(std::size_t block) const;
  Index cols_of(std::size_t block) const;
  const std::vector<Index>& row_sizes() const;
  const std::vector<Index>& col_sizes() const;
  std::size_t n_params() const;
  unsigned start() const;
  SeriesSymmetry symmetry() const;
  const std::shared_ptr<SeriesContext>& context() const;

  const std::vector<std::string>& param_names() const;
  void set_param_names(std::vector<std::string> names) const;

  Operator get(std::size_t row, std::size_t col, const OrderIndex& order) const;
  bool is_computed(std::size_t row, std::size_t col, const OrderIndex& order) const;
  std::size_t memo_size() const;
  void clear_memo() const;
  // Clears the memo through a weak reference (safe to store in the context).
  std::function<void()> memo_clearer() const;
  MaskedSlice slice(std::size_t row, std::size_t col, const OrderIndex& max_orders) const;

  // Copy that additionally keeps `owner` alive (used for handles escaping an engine).
  BlockSeries with_owner(std::shared_ptr<const void> owner) const;

 private:
  struct Data;
  std::shared_ptr<Data> data_;
  std::shared_ptr<const void> owner_;
};

// C^{ij}_n = sum_l sum_{m+p=n} A^{il}_m B^{lj}_p. With `hermitian`, the caller
// promises B = A^dag as series (the A^dag A pattern): diagonal blocks then
// evaluate only half the order pairs and lower blocks are adjoints.
BlockSeries cauchy_product(const BlockSeries& a, const BlockSeries& b, std::string name = {},
                           SeriesSymmetry symmetry = SeriesSymmetry::none);

// (A^dag)^{ji}_n = adjoint(A^{ij}_n), delegating to A's store.
BlockSeries series_adjoint(const BlockSeries& a, std::string name = {});

// Series with fixed elements keyed by order; every other order is a zero.
BlockSeries constant_series(std::string name, std::vector<Index> sizes, std::size_t n_params,
                            std::map<OrderIndex, std::vector<std::vector<Operator>>> terms,
                            std::shared_ptr<SeriesContext> context = nullptr);

}  // namespace blockdiag
