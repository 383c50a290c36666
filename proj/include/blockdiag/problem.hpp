#pragma once

#include "blockdiag/block_series.hpp"
#include "blockdiag/operator.hpp"
#include "blockdiag/order_index.hpp"
#include "blockdiag/separation.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace blockdiag {

// b x b grid of operator blocks.
using BlockOperator = std::vector<std::vector<Operator>>;

// Solves [V, H0] = rhs for one block of V: V_ab (E_b - E_a) = rhs_ab on the
// remaining entries. Must return a zero selected part.
using SylvesterSolver =
    std::function<Operator(std::size_t row, std::size_t col, const OrderIndex& order, const Operator& rhs)>;

struct ProblemOptions {
  // Elementwise masks for diagonal blocks (true = selected).
  std::map<std::size_t, Mask> masks;
  double degeneracy_tolerance = -1.0;  // negative: 1e-10 max|E|, floor 1e-12
  double hermiticity_tolerance = 1e-10;
  std::vector<std::string> param_names;
  Retention retention = Retention::keep;
};

// H0 + sum_n lambda^n H_n in the decoupling basis. H0 is diagonal with the
// energies of each block; perturbations are split into selected and remaining
// parts at construction.
class PerturbationProblem {
 public:
  PerturbationProblem(std::vector<Eigen::VectorXd> energies, std::map<OrderIndex, BlockOperator> perturbations,
                      ProblemOptions options = {});

  // H0 blocks given explicitly (matrix-free or trap operators). The energies
  // still provide the Sylvester denominators; an empty vector marks a block
  // whose spectrum is unknown, and then `validate` must be off (the caller
  // certifies the gaps, as in implicit mode).
  static PerturbationProblem from_blocks(BlockOperator h0, std::vector<Index> sizes,
                                         std::vector<Eigen::VectorXd> energies,
                                         std::map<OrderIndex, BlockOperator> perturbations,
                                         ProblemOptions options = {}, bool validate = true);

  // Full-space matrices, H0 diagonal. indices[k] is the block of basis state k.
  static PerturbationProblem from_indices(const DenseMatrix& h0, const std::map<OrderIndex, DenseMatrix>& perturbations,
                                          const std::vector<int>& indices, ProblemOptions options = {});

  // Full-space matrices; the columns of vectors[i] span block i and together
  // form a unitary in which H0 is diagonal.
  static PerturbationProblem from_eigenvectors(const DenseMatrix& h0,
                                               const std::map<OrderIndex, DenseMatrix>& perturbations,
                                               const std::vector<DenseMatrix>& vectors, ProblemOptions options = {});

  std::size_t n_blocks() const noexcept { return rule_.n_blocks(); }
  const std::vector<Index>& block_sizes() const noexcept { return rule_.block_sizes(); }
  std::size_t n_params() const noexcept { return n_params_; }
  const std::vector<std::string>& param_names() const noexcept { return param_names_; }
  const SeparationRule& rule() const noexcept { return rule_; }
  const EigenstructureInfo& eigenstructure() const noexcept { return eig_; }
  const ProblemOptions& options() const noexcept { return options_; }

  const Operator& h0(std::size_t block) const { return h0_.at(block).at(block); }
  const BlockOperator& h0_blocks() const noexcept { return h0_; }
  const std::map<OrderIndex, BlockOperator>& perturbations() const noexcept { return perturbations_; }
  const std::map<OrderIndex, BlockOperator>& selected_parts() const noexcept { return selected_; }
  const std::map<OrderIndex, BlockOperator>& remaining_parts() const noexcept { return remaining_; }
  // Zero when the order carries no perturbation.
  Operator perturbation(std::size_t row, std::size_t col, const OrderIndex& order) const;
  Operator selected(std::size_t row, std::size_t col, const OrderIndex& order) const;
  Operator remaining(std::size_t row, std::size_t col, const OrderIndex& order) const;

  // Basis bookkeeping for the full-space constructors: column k of
  // basis_change() is the full-space vector of decoupling-basis state k.
  bool has_basis() const noexcept { return basis_.size() > 0; }
  const DenseMatrix& basis_change() const noexcept { return basis_; }

  // Solver used when block_diagonalize gets none (set for implicit problems).
  const SylvesterSolver& default_solver() const noexcept { return solver_; }
  void set_default_solver(SylvesterSolver solver) { solver_ = std::move(solver); }

  // Replace the H0 blocks by trap copies; any product with them then throws.
  void trap_h0();

 private:
  PerturbationProblem() = default;
  void finish(bool validate);

  SeparationRule rule_;
  EigenstructureInfo eig_;
  ProblemOptions options_;
  std::size_t n_params_ = 0;
  std::vector<std::string> param_names_;
  BlockOperator h0_;
  std::map<OrderIndex, BlockOperator> perturbations_;
  std::map<OrderIndex, BlockOperator> selected_;
  std::map<OrderIndex, BlockOperator> remaining_;
  DenseMatrix basis_;
  SylvesterSolver solver_;
};

// Splits a full-space matrix into blocks of the given sizes.
BlockOperator split_blocks(const DenseMatrix& m, const std::vector<Index>& sizes);
DenseMatrix join_blocks(const BlockOperator& blocks, const std::vector<Index>& sizes);

}  // namespace blockdiag
