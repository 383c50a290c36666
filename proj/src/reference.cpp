#include "blockdiag/reference.hpp"

#include "blockdiag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace blockdiag {

namespace {

DenseMatrix commutator(const DenseMatrix& a, const DenseMatrix& b) { return a * b - b * a; }

double factorial(unsigned j) {
  double f = 1.0;
  for (unsigned k = 2; k <= j; ++k) f *= k;
  return f;
}

std::vector<OrderIndex> sorted_orders(const OrderIndex& bound) {
  std::vector<OrderIndex> out;
  for_each_order_below(bound, [&](const OrderIndex& m) { out.push_back(m); });
  std::stable_sort(out.begin(), out.end(),
                   [](const OrderIndex& a, const OrderIndex& b) { return a.total() < b.total(); });
  return out;
}

}  // namespace

SWReference sw_reference(const Eigen::VectorXd& energies, Index n_a,
                         const std::map<OrderIndex, DenseMatrix>& perturbations, const OrderIndex& max_orders) {
  const Index n = energies.size();
  if (n_a <= 0 || n_a >= n) throw ConfigurationError("reference needs two non-empty blocks");
  const Index n_b = n - n_a;
  const std::size_t k = max_orders.size();
  const DenseMatrix h0 = energies.cast<Scalar>().asDiagonal().toDenseMatrix();
  const DenseMatrix zero = DenseMatrix::Zero(n, n);
  auto h_at = [&](const OrderIndex& m) -> const DenseMatrix& {
    if (m.is_zero()) return h0;
    auto it = perturbations.find(m);
    return it == perturbations.end() ? zero : it->second;
  };
  for (const auto& [order, m] : perturbations) {
    if (order.size() != k) throw DimensionError("perturbation order has the wrong length");
    if (m.rows() != n || m.cols() != n) throw DimensionError("perturbation has the wrong shape");
  }
  const double scale = std::max(1.0, energies.cwiseAbs().maxCoeff());
  for (Index a = 0; a < n_a; ++a)
    for (Index b = 0; b < n_b; ++b)
      if (std::abs(energies(a) - energies(n_a + b)) <= 1e-10 * scale) {
        std::ostringstream os;
        os << "degenerate states " << a << " and " << n_a + b << " in different blocks";
        throw DegenerateError(os.str(), {static_cast<std::size_t>(a), static_cast<std::size_t>(n_a + b), 0.0});
      }

  SWReference out;
  const std::vector<OrderIndex> orders = sorted_orders(max_orders);
  // nested[j][n] = ad_S^j(H) at order n
  std::vector<std::map<OrderIndex, DenseMatrix>> nested(1);
  auto nested_at = [&](unsigned j, const OrderIndex& m) -> const DenseMatrix& {
    if (j >= nested.size()) return zero;
    auto it = nested[j].find(m);
    return it == nested[j].end() ? zero : it->second;
  };

  for (const OrderIndex& order : orders) {
    const unsigned total = order.total();
    if (total == 0) {
      nested[0][order] = h0;
      out.H_tilde[order] = h0;
      out.S[order] = zero;
      continue;
    }
    nested[0][order] = h_at(order);
    if (nested.size() < total + 1) nested.resize(total + 1);

    DenseMatrix t = h_at(order);
    // First commutator without the unknown S_n.
    DenseMatrix c1 = DenseMatrix::Zero(n, n);
    for_each_order_below(order, [&](const OrderIndex& m) {
      if (m.is_zero() || m == order) return;
      c1 += commutator(out.S.at(m), nested_at(0, order - m));
    });
    t += c1;
    for (unsigned j = 2; j <= total; ++j) {
      DenseMatrix cj = DenseMatrix::Zero(n, n);
      for_each_order_below(order, [&](const OrderIndex& m) {
        if (m.is_zero() || m == order) return;
        const OrderIndex p = order - m;
        if (p.total() < j - 1) return;
        cj += commutator(out.S.at(m), nested_at(j - 1, p));
      });
      t += cj / factorial(j);
      nested[j][order] = std::move(cj);
    }

    DenseMatrix s = DenseMatrix::Zero(n, n);
    for (Index a = 0; a < n_a; ++a)
      for (Index b = 0; b < n_b; ++b) s(a, n_a + b) = t(a, n_a + b) / (energies(a) - energies(n_a + b));
    s.bottomLeftCorner(n_b, n_a) = -s.topRightCorner(n_a, n_b).adjoint();
    const DenseMatrix with_h0 = commutator(s, h0);
    nested[1][order] = c1 + with_h0;
    out.H_tilde[order] = t + with_h0;
    out.S[order] = std::move(s);
  }

  // U = exp(-S): powers[j][n] = ((-S)^j)_n
  std::vector<std::map<OrderIndex, DenseMatrix>> powers(1);
  for (const OrderIndex& order : orders) powers[0][order] = order.is_zero() ? DenseMatrix::Identity(n, n) : zero;
  unsigned max_total = 0;
  for (const OrderIndex& order : orders) max_total = std::max(max_total, order.total());
  for (unsigned j = 1; j <= max_total; ++j) {
    powers.emplace_back();
    for (const OrderIndex& order : orders) {
      DenseMatrix acc = DenseMatrix::Zero(n, n);
      if (order.total() >= j) {
        for_each_order_below(order, [&](const OrderIndex& m) {
          if (m.is_zero()) return;
          const OrderIndex p = order - m;
          if (p.total() < j - 1) return;
          acc -= out.S.at(m) * powers[j - 1].at(p);
        });
      }
      powers[j][order] = std::move(acc);
    }
  }
  for (const OrderIndex& order : orders) {
    DenseMatrix u = DenseMatrix::Zero(n, n);
    for (unsigned j = 0; j <= order.total(); ++j) u += powers[j].at(order) / factorial(j);
    out.U[order] = std::move(u);
  }
  return out;
}

Eigen::VectorXd exact_spectrum(const DenseMatrix& h0, const std::map<OrderIndex, DenseMatrix>& perturbations,
                               const std::vector<double>& values) {
  DenseMatrix h = h0;
  for (const auto& [order, m] : perturbations) {
    if (order.size() != values.size()) throw DimensionError("need one value per parameter");
    double w = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) w *= std::pow(values[i], static_cast<int>(order[i]));
    h += w * m;
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("eigenvalue solver did not converge");
  return solver.eigenvalues();
}

double convergence_slope(const std::vector<double>& lambdas, const std::vector<double>& errors) {
  if (lambdas.size() != errors.size()) throw DimensionError("need one error per lambda");
  if (lambdas.size() < 4) throw ConfigurationError("degenerate fit: need at least 4 points");
  const std::size_t n = lambdas.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambdas[i] > 0) || !(errors[i] > 0))
      throw ConfigurationError("degenerate fit: lambdas and errors must be positive");
    const double x = std::log(lambdas[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0) throw ConfigurationError("degenerate fit: lambdas must differ");
  return (n * sxy - sx * sy) / den;
}

namespace {

struct RefTerms {
  const TwoBlockFirstOrder& p;
  OperationCounter* counter;

  Operator mul(const Operator& a, const Operator& b) const { return matmul(a, b, counter, "reference"); }

  // X_ml / (E_m - E_l) for an A x B shaped X.
  Operator denom(const Operator& x) const {
    if (x.is_structural_zero()) return x;
    DenseMatrix m = x.to_dense();
    for (Index a = 0; a < m.rows(); ++a)
      for (Index b = 0; b < m.cols(); ++b) m(a, b) /= p.e_a(a) - p.e_b(b);
    return Operator::dense(std::move(m));
  }
};

Operator hc(const Operator& t) { return add(t, adjoint(t)); }

}  // namespace

DenseMatrix reference_effective_hamiltonian(const TwoBlockFirstOrder& p, unsigned order, OperationCounter* counter) {
  const Index na = p.e_a.size();
  RefTerms r{p, counter};
  const Operator& haa = p.h_aa;
  const Operator& hab = p.h_ab;
  const Operator& hbb = p.h_bb;
  const Operator hba = adjoint(hab);
  const Operator sig = r.denom(hab);
  Operator result;
  switch (order) {
    case 2:
      result = hc(scale(r.mul(sig, hba), 0.5));
      break;
    case 3: {
      Operator t = subtract(r.mul(r.denom(r.mul(sig, hbb)), hba), r.mul(r.denom(r.mul(haa, sig)), hba));
      result = hc(scale(t, 0.5));
      break;
    }
    case 4: {
      const Operator sigd = adjoint(sig);
      Operator chain = r.mul(r.denom(r.mul(r.denom(r.mul(sig, hbb)), hbb)), hba);
      chain = subtract(chain, r.mul(r.denom(r.mul(r.denom(r.mul(haa, sig)), hbb)), hba));
      chain = subtract(chain, r.mul(r.denom(r.mul(haa, r.denom(r.mul(sig, hbb)))), hba));
      chain = add(chain, r.mul(r.denom(r.mul(haa, r.denom(r.mul(haa, sig)))), hba));
      chain = subtract(chain, scale(r.mul(r.denom(r.mul(r.mul(sig, sigd), hab)), hba), 1.0 / 3.0));
      chain = subtract(chain, scale(r.mul(r.denom(r.mul(r.mul(sig, hba), sig)), hba), 2.0 / 3.0));
      chain = subtract(chain, scale(r.mul(r.denom(r.mul(r.mul(hab, sigd), sig)), hba), 1.0 / 3.0));
      Operator t = scale(chain, 0.5);
      t = add(t, scale(r.mul(r.mul(r.mul(sig, sigd), hab), sigd), 1.0 / 8.0));
      t = add(t, scale(r.mul(r.mul(r.mul(hab, sigd), sig), sigd), 1.0 / 24.0));
      result = hc(t);
      break;
    }
    default:
      throw ConfigurationError("reference effective Hamiltonian is available for orders 2 to 4");
  }
  if (result.is_structural_zero()) return DenseMatrix::Zero(na, na);
  return result.to_dense();
}

std::uint64_t reference_count_benchmark(const TwoBlockFirstOrder& p, unsigned order) {
  OperationCounter counter;
  reference_effective_hamiltonian(p, order, &counter);
  return counter.matmul_count();
}

}  // namespace blockdiag
