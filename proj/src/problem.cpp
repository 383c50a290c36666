#include "blockdiag/problem.hpp"

#include "blockdiag/errors.hpp"

#include <algorithm>
#include <sstream>

namespace blockdiag {

BlockOperator split_blocks(const DenseMatrix& m, const std::vector<Index>& sizes) {
  const std::size_t b = sizes.size();
  BlockOperator out(b, std::vector<Operator>(b));
  Index r0 = 0;
  for (std::size_t i = 0; i < b; ++i) {
    Index c0 = 0;
    for (std::size_t j = 0; j < b; ++j) {
      out[i][j] = Operator::dense(m.block(r0, c0, sizes[i], sizes[j]));
      c0 += sizes[j];
    }
    r0 += sizes[i];
  }
  return out;
}

DenseMatrix join_blocks(const BlockOperator& blocks, const std::vector<Index>& sizes) {
  Index n = 0;
  for (Index s : sizes) n += s;
  DenseMatrix m = DenseMatrix::Zero(n, n);
  Index r0 = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Index c0 = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      const Operator& op = blocks.at(i).at(j);
      if (!op.is_structural_zero()) m.block(r0, c0, sizes[i], sizes[j]) = op.to_dense();
      c0 += sizes[j];
    }
    r0 += sizes[i];
  }
  return m;
}

PerturbationProblem::PerturbationProblem(std::vector<Eigen::VectorXd> energies,
                                         std::map<OrderIndex, BlockOperator> perturbations, ProblemOptions options) {
  std::vector<Index> sizes;
  for (const auto& e : energies) sizes.push_back(e.size());
  rule_ = SeparationRule::block_diagonal(sizes);
  eig_.energies = std::move(energies);
  const std::size_t b = sizes.size();
  h0_.assign(b, std::vector<Operator>(b));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) h0_[i][j] = Operator::zero(sizes[i], sizes[j]);
    h0_[i][i] = Operator::dense(eig_.energies[i].cast<Scalar>().asDiagonal().toDenseMatrix());
  }
  perturbations_ = std::move(perturbations);
  options_ = std::move(options);
  finish(true);
}

PerturbationProblem PerturbationProblem::from_blocks(BlockOperator h0, std::vector<Index> sizes,
                                                     std::vector<Eigen::VectorXd> energies,
                                                     std::map<OrderIndex, BlockOperator> perturbations,
                                                     ProblemOptions options, bool validate) {
  PerturbationProblem p;
  if (energies.size() != sizes.size()) throw DimensionError("need one energy vector per block");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (energies[i].size() == 0 && validate)
      throw ConfigurationError("block " + std::to_string(i) + " has no energies; cannot validate the separation");
    if (energies[i].size() != 0 && energies[i].size() != sizes[i])
      throw DimensionError("energies of block " + std::to_string(i) + " do not match its size");
  }
  p.rule_ = SeparationRule::block_diagonal(sizes);
  p.eig_.energies = std::move(energies);
  if (h0.size() != sizes.size()) throw DimensionError("H0 block grid does not match the energies");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (h0[i].size() != sizes.size()) throw DimensionError("H0 block grid is not square");
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      const Operator& op = h0[i][j];
      if (i != j && !op.is_structural_zero() && !op.is_linear() && !is_zero(op, 1e-12))
        throw ConfigurationError("H0 has a nonzero off-diagonal block (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
      if (op.rows() >= 0 && (op.rows() != sizes[i] || op.cols() != sizes[j]))
        throw DimensionError("H0 block (" + std::to_string(i) + "," + std::to_string(j) + ") has the wrong shape");
    }
  }
  p.h0_ = std::move(h0);
  p.perturbations_ = std::move(perturbations);
  p.options_ = std::move(options);
  p.finish(validate);
  return p;
}

namespace {

void check_square(const DenseMatrix& m, Index n, const std::string& what) {
  if (m.rows() != n || m.cols() != n)
    throw DimensionError(what + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

// H0 must be diagonal in the decoupling basis with real entries.
Eigen::VectorXd diagonal_energies(const DenseMatrix& h0, double rtol) {
  const double scale = std::max(1.0, h0.cwiseAbs().maxCoeff());
  DenseMatrix off = h0;
  off.diagonal().setZero();
  if (off.size() && off.cwiseAbs().maxCoeff() > rtol * scale)
    throw ConfigurationError("H0 is not diagonal in the decoupling basis (max off-diagonal " +
                             std::to_string(off.cwiseAbs().maxCoeff()) + ")");
  if (h0.diagonal().imag().cwiseAbs().maxCoeff() > rtol * scale)
    throw HermiticityError("H0 has complex diagonal entries");
  return h0.diagonal().real();
}

}  // namespace

PerturbationProblem PerturbationProblem::from_indices(const DenseMatrix& h0,
                                                      const std::map<OrderIndex, DenseMatrix>& perturbations,
                                                      const std::vector<int>& indices, ProblemOptions options) {
  const Index n = h0.rows();
  check_square(h0, n, "H0");
  if (static_cast<Index>(indices.size()) != n)
    throw ConfigurationError("need one block label per basis state (" + std::to_string(n) + ")");
  int b = 0;
  for (int v : indices) {
    if (v < 0) throw ConfigurationError("block labels must be non-negative");
    b = std::max(b, v + 1);
  }
  std::vector<std::vector<Index>> members(b);
  for (Index k = 0; k < n; ++k) members[indices[k]].push_back(k);
  std::vector<DenseMatrix> vectors(b);
  for (int i = 0; i < b; ++i) {
    if (members[i].empty()) throw ConfigurationError("block " + std::to_string(i) + " has no states");
    vectors[i] = DenseMatrix::Zero(n, members[i].size());
    for (std::size_t a = 0; a < members[i].size(); ++a) vectors[i](members[i][a], a) = 1.0;
  }
  return from_eigenvectors(h0, perturbations, vectors, std::move(options));
}

PerturbationProblem PerturbationProblem::from_eigenvectors(const DenseMatrix& h0,
                                                           const std::map<OrderIndex, DenseMatrix>& perturbations,
                                                           const std::vector<DenseMatrix>& vectors,
                                                           ProblemOptions options) {
  const Index n = h0.rows();
  check_square(h0, n, "H0");
  if (vectors.empty()) throw ConfigurationError("need at least one subspace");
  Index total = 0;
  for (const auto& v : vectors) {
    if (v.rows() != n) throw DimensionError("subspace vectors must have " + std::to_string(n) + " rows");
    if (v.cols() == 0) throw ConfigurationError("empty subspace");
    total += v.cols();
  }
  if (total != n)
    throw ConfigurationError("subspace sizes sum to " + std::to_string(total) + ", expected " + std::to_string(n));
  DenseMatrix q(n, n);
  std::vector<Index> sizes;
  Index c0 = 0;
  for (const auto& v : vectors) {
    q.middleCols(c0, v.cols()) = v;
    c0 += v.cols();
    sizes.push_back(v.cols());
  }
  if ((q.adjoint() * q - DenseMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw ConfigurationError("subspace vectors are not orthonormal and complete");

  const double rtol = options.hermiticity_tolerance;
  const DenseMatrix h0t = q.adjoint() * h0 * q;
  const Eigen::VectorXd e = diagonal_energies(h0t, rtol);
  std::vector<Eigen::VectorXd> energies;
  c0 = 0;
  for (Index s : sizes) {
    energies.push_back(e.segment(c0, s));
    c0 += s;
  }
  std::map<OrderIndex, BlockOperator> perts;
  for (const auto& [order, m] : perturbations) {
    check_square(m, n, "perturbation " + order.to_string());
    perts[order] = split_blocks(q.adjoint() * m * q, sizes);
  }
  PerturbationProblem p(std::move(energies), std::move(perts), std::move(options));
  p.basis_ = std::move(q);
  return p;
}

void PerturbationProblem::finish(bool validate) {
  const std::size_t b = rule_.n_blocks();
  for (const auto& [block, mask] : options_.masks) rule_.set_mask(block, mask);
  eig_.tolerance = options_.degeneracy_tolerance;

  n_params_ = options_.param_names.size();
  for (const auto& [order, blocks] : perturbations_) {
    if (order.is_zero()) throw ConfigurationError("perturbation at order zero; put it into H0");
    if (n_params_ == 0) n_params_ = order.size();
    if (order.size() != n_params_)
      throw ConfigurationError("perturbation order " + order.to_string() + " has the wrong number of parameters");
    if (blocks.size() != b) throw DimensionError("perturbation " + order.to_string() + " has the wrong block count");
    for (std::size_t i = 0; i < b; ++i) {
      if (blocks[i].size() != b) throw DimensionError("perturbation block grid is not square");
      for (std::size_t j = 0; j < b; ++j) {
        const Operator& op = blocks[i][j];
        if (op.rows() >= 0 && (op.rows() != rule_.size_of(i) || op.cols() != rule_.size_of(j)))
          throw DimensionError("perturbation " + order.to_string() + " block (" + std::to_string(i) + "," +
                               std::to_string(j) + ") has the wrong shape");
      }
    }
  }
  if (n_params_ == 0) n_params_ = 1;
  param_names_ = options_.param_names;
  if (param_names_.empty())
    for (std::size_t k = 0; k < n_params_; ++k) param_names_.push_back("lambda" + std::to_string(k));

  // Hermiticity of every order as a whole, blockwise.
  for (const auto& [order, blocks] : perturbations_) {
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = i; j < b; ++j) {
        const Operator& x = blocks[i][j];
        const Operator& y = blocks[j][i];
        if (x.is_linear() || y.is_linear()) continue;
        const double scale = std::max({1.0, max_abs(x), max_abs(y)});
        const double err = max_abs(subtract(x, adjoint(y)));
        if (err > options_.hermiticity_tolerance * scale) {
          std::ostringstream os;
          os << "perturbation " << order.to_string() << " is not Hermitian at block (" << i << "," << j
             << "), deviation " << err;
          throw HermiticityError(os.str());
        }
      }
    }
  }

  if (validate) require_valid(rule_, eig_);

  for (const auto& [order, blocks] : perturbations_) {
    BlockOperator s(b, std::vector<Operator>(b)), r(b, std::vector<Operator>(b));
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        Operator op = blocks[i][j];
        if (!op.is_structural_zero() && op.rows() < 0)
          op = Operator::zero(rule_.size_of(i), rule_.size_of(j));
        Operator sel = select(op, rule_, i, j);
        if (!sel.is_structural_zero()) sel = sel.with_tags(sel.tags() | kSelectedPerturbationTag);
        s[i][j] = sel;
        r[i][j] = remain(op, rule_, i, j);
      }
    }
    selected_[order] = std::move(s);
    remaining_[order] = std::move(r);
  }
  for (std::size_t i = 0; i < b; ++i) h0_[i][i] = h0_[i][i].with_tags(h0_[i][i].tags() | kUnperturbedTag);
}

namespace {
Operator lookup(const std::map<OrderIndex, BlockOperator>& m, std::size_t i, std::size_t j, const OrderIndex& n,
                const SeparationRule& rule) {
  auto it = m.find(n);
  if (it == m.end()) return Operator::zero(rule.size_of(i), rule.size_of(j));
  return it->second.at(i).at(j);
}
}  // namespace

Operator PerturbationProblem::perturbation(std::size_t i, std::size_t j, const OrderIndex& n) const {
  return lookup(perturbations_, i, j, n, rule_);
}
Operator PerturbationProblem::selected(std::size_t i, std::size_t j, const OrderIndex& n) const {
  return lookup(selected_, i, j, n, rule_);
}
Operator PerturbationProblem::remaining(std::size_t i, std::size_t j, const OrderIndex& n) const {
  return lookup(remaining_, i, j, n, rule_);
}

void PerturbationProblem::trap_h0() {
  for (std::size_t i = 0; i < h0_.size(); ++i) h0_[i][i] = h0_[i][i].as_trap();
}

}  // namespace blockdiag
