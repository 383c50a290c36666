#include "blockdiag/cli/lattice.hpp"

#include "blockdiag/errors.hpp"

#include <random>
#include <vector>

namespace blockdiag::cli {

LatticeModel square_lattice(int size, double hopping, double disorder, std::uint64_t seed) {
  if (size < 1) throw ConfigurationError("lattice size must be positive");
  const Index n = static_cast<Index>(size) * size;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> onsite(-disorder / 2, disorder / 2);
  std::vector<double> v1(n), v2(n);
  for (auto& v : v1) v = onsite(rng);
  for (auto& v : v2) v = onsite(rng);

  std::vector<Eigen::Triplet<Scalar>> t0, t1;
  auto site = [size](int x, int y) { return static_cast<Index>(x) + static_cast<Index>(size) * y; };
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const Index s = site(x, y);
      t0.emplace_back(s, s, v1[s]);
      t1.emplace_back(s, s, v2[s] - v1[s]);
      if (x + 1 < size) {
        t0.emplace_back(s, site(x + 1, y), -hopping);
        t0.emplace_back(site(x + 1, y), s, -hopping);
      }
      if (y + 1 < size) {
        t0.emplace_back(s, site(x, y + 1), -hopping);
        t0.emplace_back(site(x, y + 1), s, -hopping);
      }
    }
  LatticeModel m{SparseMatrix(n, n), SparseMatrix(n, n)};
  m.h0.setFromTriplets(t0.begin(), t0.end());
  m.h1.setFromTriplets(t1.begin(), t1.end());
  m.h0.makeCompressed();
  m.h1.makeCompressed();
  return m;
}

}  // namespace blockdiag::cli
