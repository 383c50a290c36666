#pragma once

#include "blockdiag/block_series.hpp"
#include "blockdiag/problem.hpp"

#include <memory>
#include <string>
#include <vector>

namespace blockdiag {

// Elementwise denominators from the problem's energies:
// V_ab = rhs_ab / (E_b - E_a) on remaining entries, zero on selected ones.
SylvesterSolver eigenbasis_solver(const PerturbationProblem& problem);

struct Engine;

// H_tilde, U and U^dag sharing one memo context with the intermediates.
class DiagonalizationResult {
 public:
  const BlockSeries& H_tilde() const;
  const BlockSeries& U() const;
  const BlockSeries& U_adjoint() const;

  // Intermediate series by name: H, H_S, H_R, U_prime, U_prime_adj, W,
  // U_prime_adj_U_prime, V, A, B, U_prime_adj_B, V_H_S, H_tilde, U, U_adj.
  BlockSeries intermediate(const std::string& name) const;
  static const std::vector<std::string>& intermediate_names();

  // U^dag O U, evaluated lazily as U^dag (O U).
  BlockSeries transform(const BlockSeries& observable) const;

  OperationCounter& counter() const;
  const PerturbationProblem& problem() const;

 private:
  friend DiagonalizationResult block_diagonalize(const PerturbationProblem&, SylvesterSolver, OperationCounter*);
  std::shared_ptr<Engine> engine_;
  BlockSeries h_tilde_, u_, u_adj_;
};

// `counter` defaults to one owned by the result.
DiagonalizationResult block_diagonalize(const PerturbationProblem& problem, SylvesterSolver solver = {},
                                        OperationCounter* counter = nullptr);

// sum over orders n <= max_orders of prod_i values_i^{n_i} s_n, masked orders skipped.
Operator evaluate_truncated(const BlockSeries& s, std::size_t row, std::size_t col, const OrderIndex& max_orders,
                            const std::vector<double>& values);

// Same, restricted to orders of total degree <= max_total.
Operator evaluate_truncated_total(const BlockSeries& s, std::size_t row, std::size_t col, unsigned max_total,
                                  const std::vector<double>& values);

// Full matrix of one order with all blocks joined; sizes must be known.
DenseMatrix assemble_dense(const BlockSeries& s, const OrderIndex& order);

}  // namespace blockdiag
