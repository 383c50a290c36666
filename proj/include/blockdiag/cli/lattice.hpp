#pragma once

#include "blockdiag/linear_map.hpp"

#include <cstdint>

namespace blockdiag::cli {

// Square L x L lattice with open boundaries and hopping -t between nearest
// neighbours. H0 carries onsite disorder V1 and H1 = diag(V2 - V1), so that
// H0 + lambda H1 interpolates between two disorder realizations. Both draws are
// uniform in [-w/2, w/2] from a seeded mt19937_64. Site (x, y) is x + L y.
struct LatticeModel {
  SparseMatrix h0;
  SparseMatrix h1;
};

LatticeModel square_lattice(int size, double hopping, double disorder, std::uint64_t seed);

}  // namespace blockdiag::cli
