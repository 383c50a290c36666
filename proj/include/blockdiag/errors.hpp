#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blockdiag {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible operator or series shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A recurrence queried its own element at the same (block, order).
class CycleError : public Error {
 public:
  using Error::Error;
};

// An operator flagged as a trap took part in a product.
class TrapError : public Error {
 public:
  using Error::Error;
};

class HermiticityError : public Error {
 public:
  using Error::Error;
};

// Malformed problem definition (shapes, labels, bases).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

struct DegeneratePair {
  std::size_t first = 0;
  std::size_t second = 0;
  double gap = 0.0;
};

// The separation puts a pair of (near-)degenerate states into the remaining part.
class RuleViolation : public Error {
 public:
  RuleViolation(const std::string& what, std::vector<DegeneratePair> pairs)
      : Error(what), pairs_(std::move(pairs)) {}
  const std::vector<DegeneratePair>& pairs() const noexcept { return pairs_; }

 private:
  std::vector<DegeneratePair> pairs_;
};

// Energy denominator below tolerance met during a Sylvester solve.
class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, DegeneratePair pair) : Error(what), pair_(pair) {}
  const DegeneratePair& pair() const noexcept { return pair_; }

 private:
  DegeneratePair pair_;
};

// Right-hand side of a shifted solve is not orthogonal to the explicit subspace.
class DeflationError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace blockdiag
