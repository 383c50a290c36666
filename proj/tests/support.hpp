#pragma once

#include "blockdiag/diagonalization.hpp"
#include "blockdiag/implicit.hpp"
#include "blockdiag/reference.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

namespace testing {

using namespace blockdiag;

inline DenseMatrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix m(r, c);
  for (Index a = 0; a < r; ++a)
    for (Index b = 0; b < c; ++b) m(a, b) = Scalar(g(rng), g(rng));
  return m;
}

inline DenseMatrix random_hermitian(Index n, std::mt19937_64& rng) {
  const DenseMatrix m = random_matrix(n, n, rng);
  return (m + m.adjoint()) * 0.5;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.size() == 0 && b.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs(const DenseMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// Block energies well separated: block i lives around 3 i.
struct RandomProblem {
  DenseMatrix h0;
  std::vector<int> indices;
  Eigen::VectorXd energies;  // in basis order
  std::map<OrderIndex, DenseMatrix> perturbations;
};

inline RandomProblem random_problem(const std::vector<Index>& sizes, std::size_t n_params, unsigned max_order,
                                    std::uint64_t seed, double strength = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  RandomProblem p;
  Index n = 0;
  for (Index s : sizes) n += s;
  p.energies.resize(n);
  Index k = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b)
    for (Index s = 0; s < sizes[b]; ++s, ++k) {
      p.energies(k) = 3.0 * static_cast<double>(b) + u(rng);
      p.indices.push_back(static_cast<int>(b));
    }
  p.h0 = p.energies.cast<Scalar>().asDiagonal();
  for (const OrderIndex& order : orders_up_to_total(n_params, max_order)) {
    if (order.is_zero()) continue;
    p.perturbations[order] = strength * random_hermitian(n, rng);
  }
  return p;
}

// Truncated transmon (3 levels each) coupled to a resonator. Basis order:
// 00, 10, 01, 11 (one block each), then 20, 02, 21, 12, 22 (last block).
struct Transmon {
  double omega_t = 5.0, omega_r = 7.0, alpha = -0.3, g = 0.04;
  DenseMatrix h0, h1;
  std::vector<int> indices = {0, 1, 2, 3, 4, 4, 4, 4, 4};
  std::vector<std::pair<int, int>> states = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}, {2, 2}};

  double energy(int nt, int nr) const {
    return -omega_t * (nt - 0.5) + alpha / 2 * nt * (nt - 1) + omega_r * (nr + 0.5);
  }

  Transmon() {
    const int n = 9;
    h0 = DenseMatrix::Zero(n, n);
    h1 = DenseMatrix::Zero(n, n);
    auto pos = [&](int nt, int nr) {
      for (int k = 0; k < n; ++k)
        if (states[k] == std::make_pair(nt, nr)) return k;
      return -1;
    };
    // <nt'|(a^dag - a)|nt> = sqrt(nt+1) d(nt', nt+1) - sqrt(nt) d(nt', nt-1)
    auto x = [](int from, int to) {
      if (to == from + 1) return std::sqrt(static_cast<double>(to));
      if (to == from - 1) return -std::sqrt(static_cast<double>(from));
      return 0.0;
    };
    for (int k = 0; k < n; ++k) {
      const auto [nt, nr] = states[k];
      h0(k, k) = energy(nt, nr);
      for (int l = 0; l < n; ++l) {
        const auto [mt, mr] = states[l];
        h1(l, k) = -g * x(nt, mt) * x(nr, mr);
      }
    }
  }

  double chi_closed_form() const {
    const double a = alpha, wt = omega_t, wr = omega_r;
    return -4 * a * g * g * (a * wt - wr * wr - wt * wt) / ((wr - wt) * (wr + wt) * (-a + wr + wt) * (a + wr - wt));
  }
};

// Bilayer graphene near K with parameters (kx, ky, m); alpha(k) expanded to
// total degree max_degree in k.
struct BilayerGraphene {
  double t1 = 1.0, t2 = 0.4;
  DenseMatrix h0;
  std::map<OrderIndex, DenseMatrix> perturbations;
  std::vector<DenseMatrix> vectors;

  static double factorial(unsigned n) {
    double f = 1;
    for (unsigned k = 2; k <= n; ++k) f *= k;
    return f;
  }

  // Taylor coefficient of kx^p ky^q in alpha(K + k), a1,2 = (+-1/2, sqrt3/2).
  static Scalar coefficient(unsigned p, unsigned q) {
    const Scalar w = std::polar(1.0, 2 * M_PI / 3);
    const unsigned n = p + q;
    if (n == 0) return 1.0 + w + std::conj(w);
    const Scalar pref = std::pow(Scalar(0, 0.5), static_cast<int>(n)) * std::pow(std::sqrt(3.0), q) /
                        (factorial(p) * factorial(q));
    return pref * (w + (p % 2 ? -1.0 : 1.0) * std::conj(w));
  }

  static Scalar alpha_exact(double kx, double ky) {
    const double x = 4 * M_PI / 3 + kx;
    return 1.0 + std::exp(Scalar(0, x / 2 + std::sqrt(3.0) * ky / 2)) +
           std::exp(Scalar(0, -x / 2 + std::sqrt(3.0) * ky / 2));
  }

  explicit BilayerGraphene(unsigned max_degree = 3) {
    h0 = DenseMatrix::Zero(4, 4);
    h0(1, 2) = h0(2, 1) = t2;
    for (unsigned p = 0; p <= max_degree; ++p)
      for (unsigned q = 0; p + q <= max_degree; ++q) {
        if (p + q == 0) continue;
        const Scalar c = t1 * coefficient(p, q);
        DenseMatrix m = DenseMatrix::Zero(4, 4);
        m(0, 1) = m(2, 3) = c;
        m(1, 0) = m(3, 2) = std::conj(c);
        perturbations[OrderIndex{p, q, 0}] = m;
      }
    DenseMatrix mass = DenseMatrix::Zero(4, 4);
    mass.diagonal() << 1, 1, -1, -1;
    perturbations[OrderIndex{0, 0, 1}] = mass;
    const double s = 1 / std::sqrt(2.0);
    DenseMatrix a = DenseMatrix::Zero(4, 2), b = DenseMatrix::Zero(4, 2);
    a(0, 0) = 1;
    a(3, 1) = 1;
    b(1, 0) = s;
    b(2, 0) = s;
    b(1, 1) = s;
    b(2, 1) = -s;
    vectors = {a, b};
  }
};

// Random sparse Hermitian matrix: banded part plus scattered couplings.
inline SparseMatrix random_sparse_hermitian(Index n, std::mt19937_64& rng, double diag_spread, double offdiag,
                                            int extra_per_row) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<Eigen::Triplet<Scalar>> t;
  for (Index k = 0; k < n; ++k) {
    t.emplace_back(k, k, diag_spread * u(rng));
    if (k + 1 < n) {
      const Scalar v(offdiag * u(rng), offdiag * u(rng));
      t.emplace_back(k, k + 1, v);
      t.emplace_back(k + 1, k, std::conj(v));
    }
    for (int e = 0; e < extra_per_row; ++e) {
      const Index l = pick(rng);
      if (l == k) continue;
      const Scalar v(offdiag * u(rng), offdiag * u(rng));
      t.emplace_back(k, l, v);
      t.emplace_back(l, k, std::conj(v));
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace testing
