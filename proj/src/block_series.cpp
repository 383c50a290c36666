#include "blockdiag/block_series.hpp"

#include "blockdiag/errors.hpp"

#include <set>
#include <tuple>

namespace blockdiag {

namespace {
using Key = std::tuple<std::size_t, std::size_t, OrderIndex>;

std::string element_label(const std::string& name, std::size_t i, std::size_t j, const OrderIndex& n) {
  return name + "[" + std::to_string(i) + "," + std::to_string(j) + "]" + n.to_string();
}
}  // namespace

struct BlockSeries::Data {
  std::string name;
  std::vector<Index> row_sizes;
  std::vector<Index> col_sizes;
  std::size_t n_params = 0;
  EvalFn eval;
  unsigned start = 0;
  std::shared_ptr<SeriesContext> context;
  SeriesSymmetry symmetry = SeriesSymmetry::none;
  std::vector<std::string> param_names;
  std::map<Key, Operator> memo;
  std::set<Key> in_progress;
};

std::size_t MaskedSlice::unmasked_count() const {
  std::size_t n = 0;
  for (bool m : masked) n += m ? 0 : 1;
  return n;
}

const Operator& MaskedSlice::at(const OrderIndex& order) const {
  for (std::size_t i = 0; i < orders.size(); ++i)
    if (orders[i] == order) return values[i];
  throw DimensionError("order " + order.to_string() + " outside slice");
}

bool MaskedSlice::is_masked(const OrderIndex& order) const {
  for (std::size_t i = 0; i < orders.size(); ++i)
    if (orders[i] == order) return masked[i];
  throw DimensionError("order " + order.to_string() + " outside slice");
}

BlockSeries::BlockSeries(std::string name, std::vector<Index> row_sizes, std::vector<Index> col_sizes,
                         std::size_t n_params, EvalFn eval, unsigned start,
                         std::shared_ptr<SeriesContext> context, SeriesSymmetry symmetry)
    : data_(std::make_shared<Data>()) {
  if (row_sizes.empty() || col_sizes.empty()) throw DimensionError("series needs at least one block");
  if (symmetry != SeriesSymmetry::none && row_sizes != col_sizes)
    throw DimensionError("symmetric series must have square block structure");
  data_->name = std::move(name);
  data_->row_sizes = std::move(row_sizes);
  data_->col_sizes = std::move(col_sizes);
  data_->n_params = n_params;
  data_->eval = std::move(eval);
  data_->start = start;
  data_->context = context ? std::move(context) : std::make_shared<SeriesContext>();
  data_->symmetry = symmetry;
  for (std::size_t i = 0; i < n_params; ++i) data_->param_names.push_back("p" + std::to_string(i));
}

const std::string& BlockSeries::name() const { return data_->name; }
std::size_t BlockSeries::block_rows() const { return data_->row_sizes.size(); }
std::size_t BlockSeries::block_cols() const { return data_->col_sizes.size(); }
Index BlockSeries::rows_of(std::size_t block) const { return data_->row_sizes.at(block); }
Index BlockSeries::cols_of(std::size_t block) const { return data_->col_sizes.at(block); }
const std::vector<Index>& BlockSeries::row_sizes() const { return data_->row_sizes; }
const std::vector<Index>& BlockSeries::col_sizes() const { return data_->col_sizes; }
std::size_t BlockSeries::n_params() const { return data_->n_params; }
unsigned BlockSeries::start() const { return data_->start; }
SeriesSymmetry BlockSeries::symmetry() const { return data_->symmetry; }
const std::shared_ptr<SeriesContext>& BlockSeries::context() const { return data_->context; }
const std::vector<std::string>& BlockSeries::param_names() const { return data_->param_names; }

void BlockSeries::set_param_names(std::vector<std::string> names) const {
  if (names.size() != data_->n_params) throw DimensionError("expected one name per parameter");
  data_->param_names = std::move(names);
}

Operator BlockSeries::get(std::size_t row, std::size_t col, const OrderIndex& order) const {
  Data& d = *data_;
  if (row >= d.row_sizes.size() || col >= d.col_sizes.size())
    throw DimensionError(d.name + ": block (" + std::to_string(row) + "," + std::to_string(col) + ") out of range");
  if (order.size() != d.n_params)
    throw DimensionError(d.name + ": order " + order.to_string() + " needs " + std::to_string(d.n_params) +
                         " components");
  if (order.total() < d.start) return Operator::zero(d.row_sizes[row], d.col_sizes[col]);

  Key key{row, col, order};
  if (auto it = d.memo.find(key); it != d.memo.end()) return it->second;

  SeriesContext& ctx = *d.context;
  const std::string label = element_label(d.name, row, col, order);
  if (d.in_progress.count(key)) {
    std::string chain;
    for (const auto& s : ctx.stack_) chain += s + " -> ";
    throw CycleError("recurrence cycle: " + chain + label);
  }

  struct Guard {
    Data& d;
    SeriesContext& ctx;
    Key key;
    ~Guard() {
      d.in_progress.erase(key);
      ctx.stack_.pop_back();
    }
  };
  d.in_progress.insert(key);
  ctx.stack_.push_back(label);
  Operator value;
  {
    Guard guard{d, ctx, key};
    if (d.symmetry != SeriesSymmetry::none && row > col) {
      value = adjoint(get(col, row, order));
      if (d.symmetry == SeriesSymmetry::antihermitian) value = scale(value, -1.0);
    } else {
      value = d.eval(row, col, order);
    }
  }
  if (value.is_structural_zero()) value = Operator::zero(d.row_sizes[row], d.col_sizes[col]);
  if (value.rows() >= 0 && ((d.row_sizes[row] >= 0 && value.rows() != d.row_sizes[row]) ||
                            (d.col_sizes[col] >= 0 && value.cols() != d.col_sizes[col])))
    throw DimensionError(label + " evaluated to a " + std::to_string(value.rows()) + "x" +
                         std::to_string(value.cols()) + " operator");
  d.memo.emplace(key, value);

  if (ctx.stack_.empty() && ctx.retention_ == Retention::minimal)
    for (auto& hook : ctx.release_hooks_) hook();
  return value;
}

bool BlockSeries::is_computed(std::size_t row, std::size_t col, const OrderIndex& order) const {
  return data_->memo.count(Key{row, col, order}) > 0;
}

std::size_t BlockSeries::memo_size() const { return data_->memo.size(); }

void BlockSeries::clear_memo() const { data_->memo.clear(); }

std::function<void()> BlockSeries::memo_clearer() const {
  std::weak_ptr<Data> weak = data_;
  return [weak] {
    if (auto d = weak.lock()) d->memo.clear();
  };
}

MaskedSlice BlockSeries::slice(std::size_t row, std::size_t col, const OrderIndex& max_orders) const {
  if (max_orders.size() != data_->n_params) throw DimensionError("slice bound has wrong length");
  MaskedSlice s;
  s.max_orders = max_orders;
  for_each_order_below(max_orders, [&](const OrderIndex& m) {
    Operator v = get(row, col, m);
    s.orders.push_back(m);
    s.masked.push_back(v.is_structural_zero());
    s.values.push_back(std::move(v));
  });
  return s;
}

BlockSeries BlockSeries::with_owner(std::shared_ptr<const void> owner) const {
  BlockSeries s(*this);
  s.owner_ = std::move(owner);
  return s;
}

BlockSeries cauchy_product(const BlockSeries& a, const BlockSeries& b, std::string name,
                           SeriesSymmetry symmetry) {
  if (a.block_cols() != b.block_rows()) throw DimensionError("cauchy product: block structures do not chain");
  if (a.n_params() != b.n_params()) throw DimensionError("cauchy product: parameter counts differ");
  for (std::size_t l = 0; l < a.block_cols(); ++l)
    if (a.cols_of(l) >= 0 && b.rows_of(l) >= 0 && a.cols_of(l) != b.rows_of(l))
      throw DimensionError("cauchy product: block " + std::to_string(l) + " sizes differ");
  if (name.empty()) name = a.name() + "*" + b.name();
  const bool halve = symmetry == SeriesSymmetry::hermitian;
  auto* counter = a.context()->counter();
  std::string label = name;

  BlockSeries::EvalFn eval = [a, b, halve, counter, label](std::size_t i, std::size_t j,
                                                           const OrderIndex& n) {
    Operator sum = Operator::zero(a.rows_of(i), b.cols_of(j));
    const unsigned sa = a.start(), sb = b.start();
    for (std::size_t l = 0; l < a.block_cols(); ++l) {
      for_each_order_below(n, [&](const OrderIndex& m) {
        const OrderIndex p = n - m;
        if (m.total() < sa || p.total() < sb) return;
        const bool mirrored = halve && i == j && p < m;
        if (mirrored) return;
        // Query the lower-order factor first so that a structural zero there
        // spares evaluating the other one.
        Operator x, y;
        if (m.total() <= p.total()) {
          x = a.get(i, l, m);
          if (x.is_structural_zero()) return;
          y = b.get(l, j, p);
        } else {
          y = b.get(l, j, p);
          if (y.is_structural_zero()) return;
          x = a.get(i, l, m);
        }
        if (y.is_structural_zero()) return;
        Operator r = matmul(x, y, counter, label);
        if (halve && i == j && m != p) r = add(r, adjoint(r));
        sum = add(sum, r);
      });
    }
    return sum;
  };
  return BlockSeries(std::move(name), a.row_sizes(), b.col_sizes(), a.n_params(), std::move(eval),
                     a.start() + b.start(), a.context(), symmetry);
}

BlockSeries series_adjoint(const BlockSeries& a, std::string name) {
  if (name.empty()) name = a.name() + "^dag";
  BlockSeries::EvalFn eval = [a](std::size_t i, std::size_t j, const OrderIndex& n) {
    return adjoint(a.get(j, i, n));
  };
  BlockSeries s(std::move(name), a.col_sizes(), a.row_sizes(), a.n_params(), std::move(eval), a.start(),
                a.context(), a.symmetry());
  s.set_param_names(a.param_names());
  return s;
}

BlockSeries constant_series(std::string name, std::vector<Index> sizes, std::size_t n_params,
                            std::map<OrderIndex, std::vector<std::vector<Operator>>> terms,
                            std::shared_ptr<SeriesContext> context) {
  const std::size_t b = sizes.size();
  unsigned start = ~0u;
  for (const auto& [order, blocks] : terms) {
    if (order.size() != n_params) throw DimensionError("term order has wrong length");
    if (blocks.size() != b) throw DimensionError("term has wrong block count");
    for (const auto& row : blocks)
      if (row.size() != b) throw DimensionError("term has wrong block count");
    start = std::min(start, order.total());
  }
  if (terms.empty()) start = 0;
  auto shared = std::make_shared<const std::map<OrderIndex, std::vector<std::vector<Operator>>>>(std::move(terms));
  BlockSeries::EvalFn eval = [shared](std::size_t i, std::size_t j, const OrderIndex& n) {
    auto it = shared->find(n);
    if (it == shared->end()) return Operator();
    return it->second[i][j];
  };
  return BlockSeries(std::move(name), sizes, sizes, n_params, std::move(eval), start, std::move(context));
}

}  // namespace blockdiag
