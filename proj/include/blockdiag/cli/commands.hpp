#pragma once

#include "blockdiag/order_index.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace blockdiag::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kParseFailed = 2, kInvalid = 3, kSolverFailed = 4 };

// Entry point of the command-line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "n" or "n1,n2,...".
OrderIndex parse_order(const std::string& text);

// Truncation given either as a total degree ("3") or componentwise ("2,2").
struct OrderBound {
  bool componentwise = false;
  unsigned total = 0;
  OrderIndex orders;

  // Every order within the bound, sorted by total degree.
  std::vector<OrderIndex> enumerate(std::size_t n_params) const;
};
OrderBound parse_order_bound(const std::string& text, std::size_t n_params);

// "lo:hi:n" (n points, inclusive) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& text);

}  // namespace blockdiag::cli
