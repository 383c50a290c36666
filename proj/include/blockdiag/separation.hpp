#pragma once

#include "blockdiag/errors.hpp"
#include "blockdiag/operator.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace blockdiag {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Which parts of an operator are kept (selected) and which are eliminated
// (remaining). Off-diagonal blocks are always remaining; a diagonal block is
// either selected as a whole or split elementwise by a symmetric mask.
class SeparationRule {
 public:
  SeparationRule() = default;
  static SeparationRule block_diagonal(std::vector<Index> block_sizes);

  // true = selected. Rejects asymmetric masks and masks with a false diagonal.
  void set_mask(std::size_t block, Mask mask);

  std::size_t n_blocks() const noexcept { return sizes_.size(); }
  const std::vector<Index>& block_sizes() const noexcept { return sizes_; }
  Index size_of(std::size_t block) const { return sizes_.at(block); }
  Index dimension() const;
  bool has_mask(std::size_t block) const;
  const Mask& mask(std::size_t block) const;
  bool any_mask() const;
  // True when every diagonal block is selected as a whole.
  bool is_block_diagonal() const { return !any_mask(); }
  // Two blocks without masks: the case where several recurrence terms vanish.
  bool is_two_block_whole() const { return n_blocks() == 2 && !any_mask(); }

  // Whether entry (a, b) of block (row, col) is selected.
  bool selected(std::size_t row, std::size_t col, Index a, Index b) const;

 private:
  std::vector<Index> sizes_;
  std::vector<std::optional<Mask>> masks_;
};

Operator select(const Operator& op, const SeparationRule& rule, std::size_t row, std::size_t col);
Operator remain(const Operator& op, const SeparationRule& rule, std::size_t row, std::size_t col);

// Eigenvalues of H0 in the decoupling basis, grouped by block.
struct EigenstructureInfo {
  std::vector<Eigen::VectorXd> energies;
  double tolerance = -1.0;  // negative: use default_tolerance()

  double default_tolerance() const;
  double effective_tolerance() const { return tolerance >= 0 ? tolerance : default_tolerance(); }
};

// Pair indices are global positions in the decoupling basis (blocks concatenated).
struct ValidationReport {
  bool ok = true;
  double tolerance = 0.0;
  std::vector<DegeneratePair> violations;
};

ValidationReport validate_rule(const SeparationRule& rule, const EigenstructureInfo& eig);
void require_valid(const SeparationRule& rule, const EigenstructureInfo& eig);

}  // namespace blockdiag
