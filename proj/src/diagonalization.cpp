#include "blockdiag/diagonalization.hpp"

#include "blockdiag/errors.hpp"

#include <cmath>
#include <sstream>

namespace blockdiag {

SylvesterSolver eigenbasis_solver(const PerturbationProblem& problem) {
  const SeparationRule rule = problem.rule();
  const std::vector<Eigen::VectorXd> energies = problem.eigenstructure().energies;
  const double tol = problem.eigenstructure().effective_tolerance();
  std::vector<std::size_t> offset(rule.n_blocks(), 0);
  for (std::size_t i = 1; i < rule.n_blocks(); ++i) offset[i] = offset[i - 1] + rule.size_of(i - 1);

  return [rule, energies, tol, offset](std::size_t i, std::size_t j, const OrderIndex&, const Operator& rhs) {
    if (rhs.is_structural_zero()) return Operator::zero(rule.size_of(i), rule.size_of(j));
    if (rhs.is_linear()) throw ConfigurationError("eigenbasis solver needs an explicit right-hand side");
    if (energies[i].size() != rule.size_of(i) || energies[j].size() != rule.size_of(j))
      throw ConfigurationError("eigenbasis solver needs the energies of every block");
    DenseMatrix v = rhs.to_dense();
    for (Index a = 0; a < v.rows(); ++a) {
      for (Index b = 0; b < v.cols(); ++b) {
        if (rule.selected(i, j, a, b)) {
          v(a, b) = 0.0;
          continue;
        }
        const double gap = energies[j](b) - energies[i](a);
        if (std::abs(gap) <= tol) {
          if (v(a, b) == Scalar(0)) continue;
          std::ostringstream os;
          os << "degenerate denominator between states " << offset[i] + a << " and " << offset[j] + b << " (gap "
             << gap << ")";
          throw DegenerateError(os.str(), {offset[i] + a, offset[j] + b, std::abs(gap)});
        }
        v(a, b) /= gap;
      }
    }
    return Operator::dense(std::move(v));
  };
}

struct Engine {
  PerturbationProblem problem;
  OperationCounter own_counter;
  OperationCounter* counter = nullptr;
  std::shared_ptr<SeriesContext> context;
  SylvesterSolver solver;

  BlockSeries H, H_S, H_R, U_prime, U_prime_adj, UdU, W, V, A, B, UdB, VHS, H_tilde, U, U_adj;

  explicit Engine(const PerturbationProblem& p) : problem(p) {}

  void wire();
  Operator eval_V(std::size_t i, std::size_t j, const OrderIndex& n) const;
  Operator eval_B(std::size_t i, std::size_t j, const OrderIndex& n) const;
  Operator eval_H_tilde(std::size_t i, std::size_t j, const OrderIndex& n) const;
};

namespace {
Operator hc_sum(const Operator& t) { return add(t, adjoint(t)); }
}  // namespace

Operator Engine::eval_V(std::size_t i, std::size_t j, const OrderIndex& n) const {
  const SeparationRule& rule = problem.rule();
  if (i == j && !rule.has_mask(i)) return Operator();
  // X = B + H'_R + A; its remaining part is the Sylvester source.
  auto x_block = [&](std::size_t r, std::size_t c) {
    return add(add(B.get(r, c, n), H_R.get(r, c, n)), A.get(r, c, n));
  };
  Operator y;
  if (rule.is_two_block_whole()) {
    y = x_block(i, j);
  } else {
    y = scale(add(x_block(i, j), adjoint(x_block(j, i))), 0.5);
  }
  // [V, H'_S] = V H'_S + (V H'_S)^dag
  Operator comm = add(VHS.get(i, j, n), adjoint(VHS.get(j, i, n)));
  Operator rhs = remain(subtract(y, comm), rule, i, j);
  if (rhs.is_structural_zero()) return rhs;
  return solver(i, j, n, rhs);
}

Operator Engine::eval_B(std::size_t i, std::size_t j, const OrderIndex& n) const {
  const SeparationRule& rule = problem.rule();
  Operator ub = UdB.get(i, j, n);
  if (i != j) return scale(ub, -1.0);
  Operator a = A.get(i, i, n);
  Operator vh = VHS.get(i, i, n);
  Operator sel = subtract(hc_sum(vh), scale(add(subtract(ub, adjoint(ub)), hc_sum(a)), 0.5));
  return add(select(sel, rule, i, i), remain(scale(ub, -1.0), rule, i, i));
}

Operator Engine::eval_H_tilde(std::size_t i, std::size_t j, const OrderIndex& n) const {
  if (i != j) return Operator();
  if (n.is_zero()) return problem.h0(i);
  Operator a = A.get(i, i, n);
  Operator ub = UdB.get(i, i, n);
  Operator vh = VHS.get(i, i, n);
  Operator t = add(H_S.get(i, i, n), scale(subtract(hc_sum(a), hc_sum(ub)), 0.5));
  t = subtract(t, hc_sum(vh));
  return select(t, problem.rule(), i, i);
}

void Engine::wire() {
  const std::vector<Index> sizes = problem.block_sizes();
  const std::size_t k = problem.n_params();
  const bool two_block = problem.rule().is_two_block_whole();
  Engine* e = this;

  H = BlockSeries(
      "H", sizes, sizes, k,
      [e](std::size_t i, std::size_t j, const OrderIndex& n) {
        if (n.is_zero()) return e->problem.h0_blocks()[i][j];
        return e->problem.perturbation(i, j, n);
      },
      0, context);
  H_S = BlockSeries(
      "H_S", sizes, sizes, k,
      [e](std::size_t i, std::size_t j, const OrderIndex& n) { return e->problem.selected(i, j, n); }, 1, context);
  H_R = BlockSeries(
      "H_R", sizes, sizes, k,
      [e](std::size_t i, std::size_t j, const OrderIndex& n) { return e->problem.remaining(i, j, n); }, 1, context);
  W = BlockSeries(
      "W", sizes, sizes, k,
      [e, two_block](std::size_t i, std::size_t j, const OrderIndex& n) {
        // Two whole blocks: U' off-diagonal blocks are antihermitian, W's vanish.
        if (two_block && i != j) return Operator();
        return scale(e->UdU.get(i, j, n), -0.5);
      },
      2, context, SeriesSymmetry::hermitian);
  V = BlockSeries(
      "V", sizes, sizes, k, [e](std::size_t i, std::size_t j, const OrderIndex& n) { return e->eval_V(i, j, n); }, 1,
      context, SeriesSymmetry::antihermitian);
  U_prime = BlockSeries(
      "U_prime", sizes, sizes, k,
      [e](std::size_t i, std::size_t j, const OrderIndex& n) { return add(e->W.get(i, j, n), e->V.get(i, j, n)); }, 1,
      context);
  U_prime_adj = series_adjoint(U_prime, "U_prime_adj");
  UdU = cauchy_product(U_prime_adj, U_prime, "U_prime_adj_U_prime", SeriesSymmetry::hermitian);
  A = cauchy_product(H_R, U_prime, "A");
  VHS = cauchy_product(V, H_S, "V_H_S");
  B = BlockSeries(
      "B", sizes, sizes, k, [e](std::size_t i, std::size_t j, const OrderIndex& n) { return e->eval_B(i, j, n); }, 2,
      context);
  UdB = cauchy_product(U_prime_adj, B, "U_prime_adj_B");
  H_tilde = BlockSeries(
      "H_tilde", sizes, sizes, k,
      [e](std::size_t i, std::size_t j, const OrderIndex& n) { return e->eval_H_tilde(i, j, n); }, 0, context);
  U = BlockSeries(
      "U", sizes, sizes, k,
      [e](std::size_t i, std::size_t j, const OrderIndex& n) {
        if (!n.is_zero()) return e->U_prime.get(i, j, n);
        if (i != j) return Operator();
        return Operator::identity(e->problem.block_sizes()[i]);
      },
      0, context);
  U_adj = series_adjoint(U, "U_adj");

  for (const BlockSeries* s : {&H, &H_S, &H_R, &U_prime, &U_prime_adj, &UdU, &W, &V, &A, &B, &UdB, &VHS, &H_tilde,
                               &U, &U_adj})
    s->set_param_names(problem.param_names());

  if (context->retention() == Retention::minimal) {
    for (const BlockSeries* s : {&U_prime, &U_prime_adj, &UdU, &W, &V, &A, &B, &UdB, &VHS})
      context->add_release_hook(s->memo_clearer());
  }
}

DiagonalizationResult block_diagonalize(const PerturbationProblem& problem, SylvesterSolver solver,
                                        OperationCounter* counter) {
  auto engine = std::make_shared<Engine>(problem);
  engine->counter = counter ? counter : &engine->own_counter;
  engine->context = std::make_shared<SeriesContext>(engine->counter, problem.options().retention);
  if (solver) {
    engine->solver = std::move(solver);
  } else if (problem.default_solver()) {
    engine->solver = problem.default_solver();
  } else {
    engine->solver = eigenbasis_solver(problem);
  }
  engine->wire();

  DiagonalizationResult r;
  r.engine_ = engine;
  r.h_tilde_ = engine->H_tilde.with_owner(engine);
  r.u_ = engine->U.with_owner(engine);
  r.u_adj_ = engine->U_adj.with_owner(engine);
  return r;
}

const BlockSeries& DiagonalizationResult::H_tilde() const { return h_tilde_; }
const BlockSeries& DiagonalizationResult::U() const { return u_; }
const BlockSeries& DiagonalizationResult::U_adjoint() const { return u_adj_; }
OperationCounter& DiagonalizationResult::counter() const { return *engine_->counter; }
const PerturbationProblem& DiagonalizationResult::problem() const { return engine_->problem; }

const std::vector<std::string>& DiagonalizationResult::intermediate_names() {
  static const std::vector<std::string> names = {
      "H", "H_S", "H_R", "U_prime", "U_prime_adj", "W", "U_prime_adj_U_prime", "V", "A", "B", "U_prime_adj_B",
      "V_H_S", "H_tilde", "U", "U_adj"};
  return names;
}

BlockSeries DiagonalizationResult::intermediate(const std::string& name) const {
  const Engine& e = *engine_;
  const BlockSeries* s = nullptr;
  if (name == "H") s = &e.H;
  else if (name == "H_S") s = &e.H_S;
  else if (name == "H_R") s = &e.H_R;
  else if (name == "U_prime") s = &e.U_prime;
  else if (name == "U_prime_adj") s = &e.U_prime_adj;
  else if (name == "W") s = &e.W;
  else if (name == "U_prime_adj_U_prime") s = &e.UdU;
  else if (name == "V") s = &e.V;
  else if (name == "A") s = &e.A;
  else if (name == "B") s = &e.B;
  else if (name == "U_prime_adj_B") s = &e.UdB;
  else if (name == "V_H_S") s = &e.VHS;
  else if (name == "H_tilde") s = &e.H_tilde;
  else if (name == "U") s = &e.U;
  else if (name == "U_adj") s = &e.U_adj;
  if (!s) throw ConfigurationError("unknown intermediate series '" + name + "'");
  return s->with_owner(engine_);
}

BlockSeries DiagonalizationResult::transform(const BlockSeries& observable) const {
  const Engine& e = *engine_;
  if (observable.block_rows() != e.U.block_rows() || observable.block_cols() != e.U.block_rows())
    throw DimensionError("observable block structure does not match the problem");
  if (observable.n_params() != e.U.n_params()) throw DimensionError("observable has a different parameter count");
  BlockSeries ou = cauchy_product(observable, e.U, observable.name() + "_U");
  BlockSeries udou = cauchy_product(e.U_adj, ou, "U_adj_" + observable.name() + "_U");
  return udou.with_owner(engine_);
}

Operator evaluate_truncated(const BlockSeries& s, std::size_t row, std::size_t col, const OrderIndex& max_orders,
                            const std::vector<double>& values) {
  if (values.size() != s.n_params()) throw DimensionError("need one value per parameter");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigurationError("parameter values must be finite");
  Operator sum = Operator::zero(s.rows_of(row), s.cols_of(col));
  for_each_order_below(max_orders, [&](const OrderIndex& m) {
    Operator term = s.get(row, col, m);
    if (term.is_structural_zero()) return;
    double w = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) w *= std::pow(values[i], static_cast<int>(m[i]));
    if (w == 0.0) return;
    sum = add(sum, scale(term, w));
  });
  return sum;
}

Operator evaluate_truncated_total(const BlockSeries& s, std::size_t row, std::size_t col, unsigned max_total,
                                  const std::vector<double>& values) {
  if (values.size() != s.n_params()) throw DimensionError("need one value per parameter");
  Operator sum = Operator::zero(s.rows_of(row), s.cols_of(col));
  for (const OrderIndex& m : orders_up_to_total(s.n_params(), max_total)) {
    Operator term = s.get(row, col, m);
    if (term.is_structural_zero()) continue;
    double w = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) w *= std::pow(values[i], static_cast<int>(m[i]));
    if (w == 0.0) continue;
    sum = add(sum, scale(term, w));
  }
  return sum;
}

DenseMatrix assemble_dense(const BlockSeries& s, const OrderIndex& order) {
  BlockOperator blocks(s.block_rows(), std::vector<Operator>(s.block_cols()));
  for (std::size_t i = 0; i < s.block_rows(); ++i)
    for (std::size_t j = 0; j < s.block_cols(); ++j) blocks[i][j] = s.get(i, j, order);
  if (s.row_sizes() != s.col_sizes()) throw DimensionError("assemble_dense needs a square block structure");
  return join_blocks(blocks, s.row_sizes());
}

}  // namespace blockdiag
