#pragma once

#include "blockdiag/linear_map.hpp"
#include "blockdiag/problem.hpp"

#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <vector>

namespace blockdiag {

// Solves (E_i - H0) y = b for y orthogonal to the explicit subspace, one shift
// per explicit state. b may hold several columns.
class ShiftedSolver {
 public:
  virtual ~ShiftedSolver() = default;
  virtual DenseMatrix solve(std::size_t state, const DenseMatrix& b) const = 0;
  virtual std::size_t factorization_count() const = 0;
};

// UMFPACK LU of the bordered matrix [[E_i - H0, Psi], [Psi^dag, 0]], which is
// regular whenever the E_i eigenspace of H0 lies inside span(Psi). Solves are
// read-only on the factorizations but Eigen does not document reentrancy, so
// callers serialize them.
class BorderedLUSolver final : public ShiftedSolver {
 public:
  BorderedLUSolver(const SparseMatrix& h0, const DenseMatrix& psi, const Eigen::VectorXd& shifts);
  ~BorderedLUSolver() override;

  DenseMatrix solve(std::size_t state, const DenseMatrix& b) const override;
  std::size_t factorization_count() const override { return factors_.size(); }

 private:
  struct Factor;
  DenseMatrix psi_;
  std::vector<std::unique_ptr<Factor>> factors_;
};

// Two-block problem: block 0 holds the explicit states Psi (dense, diagonal
// H0), block 1 is the full space projected onto the complement of Psi and is
// kept matrix-free.
struct ExtendedProblem {
  PerturbationProblem problem;
  DenseMatrix psi;
  Eigen::VectorXd energies;
  SparseMatrix h0;
  std::shared_ptr<const ComplementProjector> projector;
  std::shared_ptr<const ShiftedSolver> shifted;
};

// Checks that psi is orthonormal, that its columns are eigenvectors of h0
// (residual 1e-8) and that the implicit subspace is not empty. All shifted
// factorizations are prepared here. Perturbations must be Hermitian.
ExtendedProblem build_extended_problem(const SparseMatrix& h0, const std::map<OrderIndex, SparseMatrix>& perturbations,
                                       const DenseMatrix& psi, const Eigen::VectorXd& energies,
                                       ProblemOptions options = {}, std::shared_ptr<const ShiftedSolver> solver = {});

// Row x (1 x N) with x (E_i - H0) = rhs and x Psi = 0. The rhs must already
// be orthogonal to Psi (relative 1e-10); the residual is checked at 1e-8.
DenseMatrix solve_shifted_deflated(const ExtendedProblem& ext, std::size_t state, const DenseMatrix& rhs);

}  // namespace blockdiag
