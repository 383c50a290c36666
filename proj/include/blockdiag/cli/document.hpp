#pragma once

#include "blockdiag/errors.hpp"
#include "blockdiag/implicit.hpp"
#include "blockdiag/problem.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace blockdiag::cli {

inline constexpr const char* kProblemFormat = "blockdiag-problem/1";
inline constexpr const char* kResultFormat = "blockdiag-result/1";

// Malformed document; location is a JSON pointer or a byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& what)
      : Error(location + ": " + what), location_(location) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

// A matrix as read from a document: dense rows or sparse coordinate triplets.
struct MatrixValue {
  bool sparse = false;
  DenseMatrix dense;
  SparseMatrix coo;

  Index rows() const { return sparse ? coo.rows() : dense.rows(); }
  Index cols() const { return sparse ? coo.cols() : dense.cols(); }
  DenseMatrix to_dense() const { return sparse ? DenseMatrix(coo) : dense; }
  SparseMatrix to_sparse() const { return sparse ? coo : SparseMatrix(dense.sparseView()); }
};

enum class SubspaceKind { indices, eigenvectors, implicit };

struct ProblemDocument {
  MatrixValue h0;
  std::vector<std::pair<OrderIndex, MatrixValue>> perturbations;
  std::vector<std::string> param_names;
  SubspaceKind kind = SubspaceKind::indices;
  std::vector<int> indices;
  std::vector<DenseMatrix> eigenvectors;
  DenseMatrix explicit_vectors;
  Eigen::VectorXd explicit_energies;
  std::map<std::size_t, Mask> masks;
  double tol_degeneracy = -1.0;
  double hermiticity_tolerance = 1e-10;
  Retention retention = Retention::keep;

  std::size_t n_params() const;
};

nlohmann::json encode_dense(const DenseMatrix& m);
nlohmann::json encode_sparse(const SparseMatrix& m);
MatrixValue decode_matrix(const nlohmann::json& j, const std::string& path);

ProblemDocument parse_problem(const nlohmann::json& j);
ProblemDocument parse_problem_text(const std::string& text);
ProblemDocument read_problem_file(const std::string& path);
nlohmann::json to_json(const ProblemDocument& doc);

struct ResultEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  OrderIndex order;
  bool zero = false;
  Index rows = 0;
  Index cols = 0;
  DenseMatrix matrix;  // empty when zero
};

struct ResultDocument {
  std::vector<ResultEntry> entries;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const ResultDocument& doc);
ResultDocument parse_result(const nlohmann::json& j);

// A problem ready for the engine; implicit documents keep their extended form.
struct BuiltProblem {
  std::optional<PerturbationProblem> explicit_problem;
  std::shared_ptr<ExtendedProblem> extended;
  bool implicit() const { return static_cast<bool>(extended); }
  const PerturbationProblem& problem() const { return extended ? extended->problem : *explicit_problem; }
};

// force_implicit turns a two-block indices/eigenvectors document into an
// implicit problem with block 0 explicit. tol_override < 0 keeps the document's.
BuiltProblem build_problem(const ProblemDocument& doc, bool force_implicit = false, double tol_override = -1.0);

// Full-space orders map, used by the dense oracles.
std::map<OrderIndex, DenseMatrix> dense_perturbations(const ProblemDocument& doc);

}  // namespace blockdiag::cli
