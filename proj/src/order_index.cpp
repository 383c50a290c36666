#include "blockdiag/order_index.hpp"

#include "blockdiag/errors.hpp"

#include <algorithm>
#include <numeric>

namespace blockdiag {

OrderIndex OrderIndex::unit(std::size_t n_params, std::size_t axis) {
  OrderIndex o(n_params);
  o.c_.at(axis) = 1;
  return o;
}

unsigned OrderIndex::total() const noexcept { return std::accumulate(c_.begin(), c_.end(), 0u); }

bool OrderIndex::is_zero() const noexcept {
  return std::all_of(c_.begin(), c_.end(), [](unsigned v) { return v == 0; });
}

bool OrderIndex::dominated_by(const OrderIndex& other) const {
  if (other.size() != size()) throw DimensionError("order index length mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (c_[i] > other.c_[i]) return false;
  return true;
}

OrderIndex OrderIndex::operator+(const OrderIndex& other) const {
  if (other.size() != size()) throw DimensionError("order index length mismatch");
  OrderIndex r(*this);
  for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] += other.c_[i];
  return r;
}

OrderIndex OrderIndex::operator-(const OrderIndex& other) const {
  if (!other.dominated_by(*this)) throw DimensionError("negative order index");
  OrderIndex r(*this);
  for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] -= other.c_[i];
  return r;
}

std::string OrderIndex::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(c_[i]);
  }
  return s + ")";
}

std::vector<OrderIndex> orders_up_to_total(std::size_t n_params, unsigned max_total) {
  std::vector<OrderIndex> out;
  OrderIndex bound(std::vector<unsigned>(n_params, max_total));
  for_each_order_below(bound, [&](const OrderIndex& m) {
    if (m.total() <= max_total) out.push_back(m);
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const OrderIndex& a, const OrderIndex& b) { return a.total() < b.total(); });
  return out;
}

}  // namespace blockdiag
