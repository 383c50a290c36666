#include "blockdiag/separation.hpp"

#include "blockdiag/linear_map.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace blockdiag {

SeparationRule SeparationRule::block_diagonal(std::vector<Index> block_sizes) {
  if (block_sizes.empty()) throw ConfigurationError("separation needs at least one block");
  for (Index s : block_sizes)
    if (s <= 0) throw ConfigurationError("block sizes must be positive");
  SeparationRule r;
  r.masks_.resize(block_sizes.size());
  r.sizes_ = std::move(block_sizes);
  return r;
}

void SeparationRule::set_mask(std::size_t block, Mask mask) {
  if (block >= sizes_.size()) throw ConfigurationError("mask for unknown block " + std::to_string(block));
  if (mask.rows() != sizes_[block] || mask.cols() != sizes_[block])
    throw ConfigurationError("mask for block " + std::to_string(block) + " must be " +
                             std::to_string(sizes_[block]) + "x" + std::to_string(sizes_[block]));
  for (Index a = 0; a < mask.rows(); ++a) {
    if (!mask(a, a))
      throw ConfigurationError("mask for block " + std::to_string(block) + " has a remaining diagonal entry at " +
                               std::to_string(a));
    for (Index b = a + 1; b < mask.cols(); ++b)
      if (mask(a, b) != mask(b, a))
        throw ConfigurationError("mask for block " + std::to_string(block) + " is not symmetric at (" +
                                 std::to_string(a) + "," + std::to_string(b) + ")");
  }
  masks_[block] = std::move(mask);
}

Index SeparationRule::dimension() const { return std::accumulate(sizes_.begin(), sizes_.end(), Index{0}); }

bool SeparationRule::has_mask(std::size_t block) const { return masks_.at(block).has_value(); }

const Mask& SeparationRule::mask(std::size_t block) const {
  if (!has_mask(block)) throw ConfigurationError("block " + std::to_string(block) + " has no mask");
  return *masks_[block];
}

bool SeparationRule::any_mask() const {
  return std::any_of(masks_.begin(), masks_.end(), [](const auto& m) { return m.has_value(); });
}

bool SeparationRule::selected(std::size_t row, std::size_t col, Index a, Index b) const {
  if (row != col) return false;
  if (!has_mask(row)) return true;
  return (*masks_[row])(a, b);
}

namespace {
Operator apply_mask(const Operator& op, const Mask& mask, bool keep_selected) {
  if (op.is_structural_zero()) return op;
  if (op.is_linear()) throw ConfigurationError("elementwise masks need explicit operators");
  DenseMatrix m = op.to_dense();
  for (Index a = 0; a < m.rows(); ++a)
    for (Index b = 0; b < m.cols(); ++b)
      if (mask(a, b) != keep_selected) m(a, b) = 0.0;
  return Operator::dense(std::move(m));
}
}  // namespace

Operator select(const Operator& op, const SeparationRule& rule, std::size_t row, std::size_t col) {
  if (row != col) return Operator::zero(op.rows(), op.cols());
  if (!rule.has_mask(row)) return op;
  return apply_mask(op, rule.mask(row), true);
}

Operator remain(const Operator& op, const SeparationRule& rule, std::size_t row, std::size_t col) {
  if (row != col) return op;
  if (!rule.has_mask(row)) return Operator::zero(op.rows(), op.cols());
  return apply_mask(op, rule.mask(row), false);
}

double EigenstructureInfo::default_tolerance() const {
  double emax = 0.0;
  for (const auto& e : energies)
    if (e.size()) emax = std::max(emax, e.cwiseAbs().maxCoeff());
  return std::max(1e-10 * emax, 1e-12);
}

ValidationReport validate_rule(const SeparationRule& rule, const EigenstructureInfo& eig) {
  if (eig.energies.size() != rule.n_blocks()) throw ConfigurationError("energies do not match the block count");
  for (std::size_t i = 0; i < rule.n_blocks(); ++i)
    if (eig.energies[i].size() != rule.size_of(i))
      throw ConfigurationError("energies of block " + std::to_string(i) + " do not match its size");
  ValidationReport rep;
  rep.tolerance = eig.effective_tolerance();
  std::vector<std::size_t> offset(rule.n_blocks(), 0);
  for (std::size_t i = 1; i < rule.n_blocks(); ++i) offset[i] = offset[i - 1] + rule.size_of(i - 1);
  for (std::size_t i = 0; i < rule.n_blocks(); ++i) {
    for (std::size_t j = i; j < rule.n_blocks(); ++j) {
      for (Index a = 0; a < rule.size_of(i); ++a) {
        for (Index b = (i == j ? a + 1 : 0); b < rule.size_of(j); ++b) {
          if (rule.selected(i, j, a, b)) continue;
          const double gap = std::abs(eig.energies[i](a) - eig.energies[j](b));
          if (gap <= rep.tolerance) {
            rep.ok = false;
            rep.violations.push_back({offset[i] + a, offset[j] + b, gap});
          }
        }
      }
    }
  }
  return rep;
}

void require_valid(const SeparationRule& rule, const EigenstructureInfo& eig) {
  ValidationReport rep = validate_rule(rule, eig);
  if (rep.ok) return;
  std::ostringstream os;
  os << "remaining part couples degenerate states:";
  for (const auto& p : rep.violations) os << " (" << p.first << "," << p.second << ") gap " << p.gap << ";";
  throw RuleViolation(os.str(), rep.violations);
}

}  // namespace blockdiag
