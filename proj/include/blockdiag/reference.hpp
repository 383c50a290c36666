#pragma once

#include "blockdiag/operator.hpp"
#include "blockdiag/order_index.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace blockdiag {

// Order-by-order exp(S) Schrieffer-Wolff transformation of a dense two-block
// problem in its eigenbasis: H_tilde = e^S H e^{-S}, U = e^{-S}, with S
// antihermitian and block off-diagonal. Shares no code with the engine.
struct SWReference {
  std::map<OrderIndex, DenseMatrix> H_tilde;
  std::map<OrderIndex, DenseMatrix> S;
  std::map<OrderIndex, DenseMatrix> U;
};

// energies: diagonal of H0 (first n_a states form block A). All orders
// componentwise <= max_orders are produced.
SWReference sw_reference(const Eigen::VectorXd& energies, Index n_a,
                         const std::map<OrderIndex, DenseMatrix>& perturbations, const OrderIndex& max_orders);

// Eigenvalues of H0 + sum_n prod_i values_i^{n_i} H_n, ascending.
Eigen::VectorXd exact_spectrum(const DenseMatrix& h0, const std::map<OrderIndex, DenseMatrix>& perturbations,
                               const std::vector<double>& values);

// Least-squares slope of log(error) against log(lambda).
double convergence_slope(const std::vector<double>& lambdas, const std::vector<double>& errors);

// Blocks of a two-block problem with only a first-order perturbation.
struct TwoBlockFirstOrder {
  Eigen::VectorXd e_a;
  Eigen::VectorXd e_b;
  Operator h_aa;  // structural zeros allowed
  Operator h_ab;
  Operator h_bb;
};

// Literature-style effective Hamiltonian at order 2, 3 or 4, each term written
// as a chain of products and energy-denominator divisions with the Hermitian
// conjugate pairs merged. Products go through `counter`.
DenseMatrix reference_effective_hamiltonian(const TwoBlockFirstOrder& p, unsigned order, OperationCounter* counter);

// Products used by reference_effective_hamiltonian at one order.
std::uint64_t reference_count_benchmark(const TwoBlockFirstOrder& p, unsigned order);

}  // namespace blockdiag
