#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace blockdiag {

// Multi-index (n_1, ..., n_k) of a term lambda_1^{n_1} ... lambda_k^{n_k}.
// The default ordering is lexicographic and is used only for deterministic
// iteration and as a map key.
class OrderIndex {
 public:
  OrderIndex() = default;
  explicit OrderIndex(std::size_t n_params) : c_(n_params, 0) {}
  OrderIndex(std::initializer_list<unsigned> components) : c_(components) {}
  explicit OrderIndex(std::vector<unsigned> components) : c_(std::move(components)) {}

  static OrderIndex unit(std::size_t n_params, std::size_t axis);

  std::size_t size() const noexcept { return c_.size(); }
  unsigned operator[](std::size_t i) const { return c_[i]; }
  unsigned& operator[](std::size_t i) { return c_[i]; }
  const std::vector<unsigned>& components() const noexcept { return c_; }

  unsigned total() const noexcept;
  bool is_zero() const noexcept;
  // Componentwise <=.
  bool dominated_by(const OrderIndex& other) const;

  OrderIndex operator+(const OrderIndex& other) const;
  // Componentwise difference; requires other.dominated_by(*this).
  OrderIndex operator-(const OrderIndex& other) const;

  auto operator<=>(const OrderIndex&) const = default;
  bool operator==(const OrderIndex&) const = default;

  std::string to_string() const;

 private:
  std::vector<unsigned> c_;
};

// Calls f(m) for every m with 0 <= m <= bound componentwise, in lexicographic order.
template <class F>
void for_each_order_below(const OrderIndex& bound, F&& f) {
  const std::size_t k = bound.size();
  OrderIndex m(k);
  while (true) {
    f(static_cast<const OrderIndex&>(m));
    bool advanced = false;
    for (std::size_t axis = k; axis-- > 0;) {
      if (m[axis] < bound[axis]) {
        ++m[axis];
        for (std::size_t rest = axis + 1; rest < k; ++rest) m[rest] = 0;
        advanced = true;
        break;
      }
    }
    if (!advanced) return;
  }
}

// All orders with total degree <= max_total, sorted by (total, lexicographic).
std::vector<OrderIndex> orders_up_to_total(std::size_t n_params, unsigned max_total);

}  // namespace blockdiag
