#include "blockdiag/implicit.hpp"

#include "blockdiag/errors.hpp"

#include <Eigen/UmfPackSupport>

#include <sstream>

namespace blockdiag {

struct BorderedLUSolver::Factor {
  Eigen::UmfPackLU<SparseMatrix> lu;
};

BorderedLUSolver::BorderedLUSolver(const SparseMatrix& h0, const DenseMatrix& psi, const Eigen::VectorXd& shifts)
    : psi_(psi) {
  const Index n = h0.rows();
  const Index ne = psi.cols();
  if (h0.cols() != n || psi.rows() != n) throw DimensionError("bordered solver: shapes of H0 and Psi differ");
  std::vector<Eigen::Triplet<Scalar>> base;
  base.reserve(h0.nonZeros() + 2 * n * ne + n);
  for (Index c = 0; c < h0.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(h0, c); it; ++it) base.emplace_back(it.row(), it.col(), -it.value());
  for (Index r = 0; r < n; ++r) {
    for (Index k = 0; k < ne; ++k) {
      if (psi(r, k) == Scalar(0)) continue;
      base.emplace_back(r, n + k, psi(r, k));
      base.emplace_back(n + k, r, std::conj(psi(r, k)));
    }
  }
  for (Index s = 0; s < shifts.size(); ++s) {
    auto triplets = base;
    for (Index r = 0; r < n; ++r) triplets.emplace_back(r, r, shifts(s));
    SparseMatrix m(n + ne, n + ne);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    auto f = std::make_unique<Factor>();
    // Residuals are checked by the caller, so UMFPACK's refinement steps are skipped.
    f->lu.umfpackControl()(UMFPACK_IRSTEP) = 0;
    f->lu.compute(m);
    if (f->lu.info() != Eigen::Success) {
      std::ostringstream os;
      os << "sparse LU failed for shift " << shifts(s);
      throw FactorizationError(os.str());
    }
    factors_.push_back(std::move(f));
  }
}

BorderedLUSolver::~BorderedLUSolver() = default;

DenseMatrix BorderedLUSolver::solve(std::size_t state, const DenseMatrix& b) const {
  if (state >= factors_.size()) throw ConfigurationError("no factorization for state " + std::to_string(state));
  const Index n = psi_.rows();
  if (b.rows() != n) throw DimensionError("bordered solve: rhs has the wrong length");
  DenseMatrix rhs = DenseMatrix::Zero(n + psi_.cols(), b.cols());
  rhs.topRows(n) = b;
  DenseMatrix x = factors_[state]->lu.solve(rhs);
  if (factors_[state]->lu.info() != Eigen::Success) throw FactorizationError("sparse LU solve failed");
  return x.topRows(n);
}

namespace {

double sparse_max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

}  // namespace

ExtendedProblem build_extended_problem(const SparseMatrix& h0, const std::map<OrderIndex, SparseMatrix>& perturbations,
                                       const DenseMatrix& psi, const Eigen::VectorXd& energies, ProblemOptions options,
                                       std::shared_ptr<const ShiftedSolver> solver) {
  const Index n = h0.rows();
  const Index ne = psi.cols();
  if (h0.cols() != n) throw DimensionError("H0 must be square");
  if (psi.rows() != n) throw DimensionError("explicit vectors must have " + std::to_string(n) + " rows");
  if (energies.size() != ne) throw DimensionError("need one energy per explicit vector");
  if (ne == 0) throw ConfigurationError("implicit mode needs at least one explicit state");
  if (ne >= n) throw ConfigurationError("implicit subspace is empty: explicit vectors span the whole space");
  if ((psi.adjoint() * psi - DenseMatrix::Identity(ne, ne)).cwiseAbs().maxCoeff() > 1e-10)
    throw ConfigurationError("explicit vectors are not orthonormal");
  const SparseMatrix h0_adj = h0.adjoint();
  if (sparse_max_abs(h0 - h0_adj) > options.hermiticity_tolerance * std::max(1.0, sparse_max_abs(h0)))
    throw HermiticityError("H0 is not Hermitian");
  const DenseMatrix residual = h0 * psi - psi * energies.cast<Scalar>().asDiagonal();
  for (Index k = 0; k < ne; ++k) {
    const double r = residual.col(k).norm();
    if (r > 1e-8 * std::max(1.0, std::abs(energies(k))))
      throw ConfigurationError("explicit vector " + std::to_string(k) + " is not an eigenvector of H0 (residual " +
                               std::to_string(r) + ")");
  }

  ExtendedProblem ext{PerturbationProblem({energies}, {}, {}), psi, energies, h0,
                      std::make_shared<ComplementProjector>(psi), std::move(solver)};
  if (!ext.shifted) ext.shifted = std::make_shared<BorderedLUSolver>(h0, psi, energies);
  if (ext.shifted->factorization_count() < static_cast<std::size_t>(ne))
    throw ConfigurationError("shifted solver does not cover every explicit state");

  const std::vector<Index> sizes = {ne, n};
  BlockOperator h0_blocks(2, std::vector<Operator>(2));
  h0_blocks[0][0] = Operator::dense(energies.cast<Scalar>().asDiagonal().toDenseMatrix());
  h0_blocks[0][1] = Operator::zero(ne, n);
  h0_blocks[1][0] = Operator::zero(n, ne);
  h0_blocks[1][1] = Operator::linear(std::make_shared<ProjectedSparseMap>(h0, ext.projector));

  std::map<OrderIndex, BlockOperator> blocks;
  for (const auto& [order, m] : perturbations) {
    if (m.rows() != n || m.cols() != n) throw DimensionError("perturbation " + order.to_string() + " has the wrong shape");
    const SparseMatrix m_adj = m.adjoint();
    if (sparse_max_abs(m - m_adj) > options.hermiticity_tolerance * std::max(1.0, sparse_max_abs(m)))
      throw HermiticityError("perturbation " + order.to_string() + " is not Hermitian");
    // Psi^dag M as (M^dag Psi)^dag, then projected on the right.
    DenseMatrix row = (m_adj * psi).adjoint();
    DenseMatrix ab = ext.projector->apply(row.adjoint()).adjoint();
    BlockOperator b(2, std::vector<Operator>(2));
    b[0][0] = Operator::dense(row * psi);
    b[0][1] = Operator::dense(ab);
    b[1][0] = Operator::dense(ab.adjoint());
    b[1][1] = Operator::linear(std::make_shared<ProjectedSparseMap>(m, ext.projector));
    blocks[order] = std::move(b);
  }

  ext.problem = PerturbationProblem::from_blocks(std::move(h0_blocks), sizes, {energies, Eigen::VectorXd()},
                                                 std::move(blocks), std::move(options), false);

  // Sylvester rows: [V, H0]^{EI} = rhs gives V_i (E_i - H0) = -rhs_i.
  auto shared = std::make_shared<const ExtendedProblem>(ext);
  ext.problem.set_default_solver([shared](std::size_t i, std::size_t j, const OrderIndex&, const Operator& rhs) {
    if (i == j) throw ConfigurationError("implicit mode has no remaining entries inside diagonal blocks");
    if (i != 0 || j != 1) throw ConfigurationError("implicit solver evaluates only the explicit-implicit block");
    if (rhs.is_structural_zero()) return Operator::zero(rhs.rows(), rhs.cols());
    const DenseMatrix r = rhs.to_dense();
    DenseMatrix v(r.rows(), r.cols());
    for (Index k = 0; k < r.rows(); ++k) v.row(k) = solve_shifted_deflated(*shared, k, -r.row(k));
    return Operator::dense(std::move(v));
  });
  return ext;
}

DenseMatrix solve_shifted_deflated(const ExtendedProblem& ext, std::size_t state, const DenseMatrix& rhs) {
  const Index n = ext.psi.rows();
  if (rhs.rows() != 1 || rhs.cols() != n) throw DimensionError("rhs must be a row of length " + std::to_string(n));
  if (state >= static_cast<std::size_t>(ext.energies.size()))
    throw ConfigurationError("no explicit state " + std::to_string(state));
  const double norm = rhs.norm();
  if (norm == 0.0) return DenseMatrix::Zero(1, n);
  const double leak = (rhs * ext.psi).norm();
  if (leak > 1e-10 * std::max(1.0, norm))
    throw DeflationError("rhs has a component " + std::to_string(leak) + " along the explicit subspace");

  // x (E - H0) = rhs  <=>  (E - H0) x^dag = rhs^dag for Hermitian H0.
  DenseMatrix y = ext.shifted->solve(state, rhs.adjoint());
  y -= ext.psi * (ext.psi.adjoint() * y);
  DenseMatrix x = y.adjoint();

  const double e = ext.energies(static_cast<Index>(state));
  const DenseMatrix check = e * x - (ext.h0.adjoint() * x.adjoint()).adjoint() - rhs;
  if (check.norm() > 1e-8 * norm)
    throw FactorizationError("shifted solve residual " + std::to_string(check.norm() / norm) + " for state " +
                             std::to_string(state));
  return x;
}

}  // namespace blockdiag
