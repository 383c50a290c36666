#include <doctest.h>

#include "blockdiag/cli/commands.hpp"
#include "blockdiag/cli/document.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace testing;
using namespace blockdiag::cli;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path root;
  TempDir() {
    root = fs::temp_directory_path() / ("blockdiag_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(root);
  }
  ~TempDir() { fs::remove_all(root); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = root / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

MatrixValue dense_value(const DenseMatrix& m) {
  MatrixValue v;
  v.dense = m;
  return v;
}

ProblemDocument indices_document(const DenseMatrix& h0, const std::map<OrderIndex, DenseMatrix>& perts,
                                 std::vector<int> indices) {
  ProblemDocument doc;
  doc.h0 = dense_value(h0);
  for (const auto& [o, m] : perts) doc.perturbations.emplace_back(o, dense_value(m));
  doc.indices = std::move(indices);
  return doc;
}

ProblemDocument transmon_document() {
  const Transmon t;
  return indices_document(t.h0, {{OrderIndex{1}, t.h1}}, t.indices);
}

ResultEntry find_entry(const ResultDocument& r, std::size_t i, std::size_t j, const OrderIndex& o) {
  for (const auto& e : r.entries)
    if (e.row == i && e.col == j && e.order == o) return e;
  FAIL("entry missing");
  return {};
}

}  // namespace

TEST_CASE("problem parse errors carry locations") {
  auto location = [](const std::string& text) {
    try {
      parse_problem_text(text);
    } catch (const ParseError& e) {
      return e.location();
    }
    return std::string("no error");
  };
  CHECK(location("{").rfind("byte", 0) == 0);
  CHECK(location(R"({"format": "other", "H0": [[1]], "subspaces": {"indices": [0]}})") == "/format");
  CHECK(location(R"({"format": "blockdiag-problem/1", "H0": [[1, 2]], "subspaces": {"indices": [0]}})") == "/H0");
  CHECK(location(R"({"format": "blockdiag-problem/1", "H0": [[1, 0], [0, 2]],
                     "perturbations": [{"order": 0, "matrix": [[0, 0], [0, 0]]}],
                     "subspaces": {"indices": [0, 1]}})")
            .rfind("/perturbations/0", 0) == 0);
  CHECK(location(R"({"format": "blockdiag-problem/1", "H0": [[1, 0], [0, 2]], "subspaces": {}})") == "/subspaces");
  CHECK(location(R"({"format": "blockdiag-problem/1", "H0": [[1, 0], [0, 2]],
                     "subspaces": {"indices": [0, 1, 1]}})") == "/subspaces/indices");
}

TEST_CASE("problem documents round-trip bit-exactly") {
  std::mt19937_64 rng(41);
  ProblemDocument doc = indices_document(random_hermitian(3, rng), {{OrderIndex{1, 0}, random_hermitian(3, rng)},
                                                                   {OrderIndex{0, 2}, random_hermitian(3, rng)}},
                                         {0, 1, 1});
  doc.param_names = {"a", "b"};
  doc.h0.dense = doc.h0.dense.diagonal().asDiagonal();
  const ProblemDocument back = parse_problem(json::parse(to_json(doc).dump()));
  CHECK(back.h0.dense == doc.h0.dense);
  REQUIRE(back.perturbations.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back.perturbations[k].first == doc.perturbations[k].first);
    CHECK(back.perturbations[k].second.dense == doc.perturbations[k].second.dense);
  }
  CHECK(back.indices == doc.indices);
  CHECK(back.param_names == doc.param_names);

  const json sparse = json::parse(R"({"shape": [3, 3], "rows": [0, 2], "cols": [1, 2], "vals": [1.5, [0, 2]]})");
  const MatrixValue m = decode_matrix(sparse, "/m");
  CHECK(m.sparse);
  CHECK(m.to_dense()(0, 1) == Scalar(1.5));
  CHECK(m.to_dense()(2, 2) == Scalar(0, 2));
}

TEST_CASE("order and grid arguments") {
  CHECK(parse_order("2,0,1") == OrderIndex{2, 0, 1});
  CHECK_THROWS_AS(parse_order("2,x"), ParseError);
  const OrderBound total = parse_order_bound("3", 2);
  CHECK_FALSE(total.componentwise);
  CHECK(total.enumerate(2).size() == 10);
  const OrderBound comp = parse_order_bound("1,2", 2);
  CHECK(comp.componentwise);
  CHECK(comp.enumerate(2).size() == 6);
  CHECK(parse_grid("0:1:3") == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(parse_grid("0.1,0.2") == std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(parse_grid("0:1"), ParseError);
}

TEST_CASE("diagonalize: transmon ground-state shift") {
  TempDir dir;
  const std::string in = dir.write("transmon.json", to_json(transmon_document()).dump());
  const std::string out = (dir.root / "result.json").string();
  const Run r = run({"diagonalize", "--input", in, "--output", out, "--order", "2"});
  REQUIRE(r.code == kOk);
  std::ifstream f(out);
  const ResultDocument res = parse_result(json::parse(f));
  const Transmon t;
  const ResultEntry e = find_entry(res, 0, 0, OrderIndex{2});
  CHECK(std::abs(e.matrix(0, 0) - Scalar(t.g * t.g / (t.omega_t - t.omega_r))) < 1e-14);
  CHECK(res.metadata.at("n_blocks") == 5);
}

TEST_CASE("diagonalize: zero perturbation gives zero markers") {
  TempDir dir;
  DenseMatrix h0 = DenseMatrix::Zero(2, 2);
  h0(1, 1) = 1;
  const std::string in = dir.write("zero.json", to_json(indices_document(h0, {}, {0, 1})).dump());
  const Run r = run({"diagonalize", "--input", in, "--order", "1", "--block", "0", "0", "--block", "0", "1"});
  REQUIRE(r.code == kOk);
  const ResultDocument res = parse_result(json::parse(r.out));
  REQUIRE(res.entries.size() == 2);
  for (const auto& e : res.entries) CHECK(e.zero);
}

TEST_CASE("diagonalize: bilayer graphene quadratic term") {
  const BilayerGraphene g;
  ProblemDocument doc;
  doc.h0 = dense_value(g.h0);
  for (const auto& [o, m] : g.perturbations) doc.perturbations.emplace_back(o, dense_value(m));
  doc.kind = SubspaceKind::eigenvectors;
  doc.eigenvectors = g.vectors;
  doc.param_names = {"kx", "ky", "m"};
  TempDir dir;
  const std::string in = dir.write("graphene.json", to_json(doc).dump());
  const Run r = run({"diagonalize", "--input", in, "--order", "2,0,0"});
  REQUIRE(r.code == kOk);
  const ResultEntry e = find_entry(parse_result(json::parse(r.out)), 0, 0, OrderIndex{2, 0, 0});
  CHECK(std::abs(e.matrix(0, 1) - Scalar(-3 * g.t1 * g.t1 / (4 * g.t2))) < 1e-12);
}

TEST_CASE("spectrum at zero coupling lists the H0 energies") {
  TempDir dir;
  const std::string in = dir.write("transmon.json", to_json(transmon_document()).dump());
  const Run r = run({"spectrum", "--input", in, "--grid", "0", "--block", "4", "--max-order", "2"});
  REQUIRE(r.code == kOk);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::vector<double> values;
  std::stringstream cells(row);
  for (std::string c; std::getline(cells, c, ',');) values.push_back(std::stod(c));
  const Transmon t;
  std::vector<double> expect;
  for (int k = 4; k < 9; ++k) expect.push_back(t.energy(t.states[k].first, t.states[k].second));
  std::sort(expect.begin(), expect.end());
  REQUIRE(values.size() == 6);
  for (std::size_t k = 0; k < 5; ++k) CHECK(values[k + 1] == doctest::Approx(expect[k]).epsilon(1e-14));
}

TEST_CASE("verify passes on well-posed problems") {
  TempDir dir;
  const RandomProblem p = random_problem({3, 3}, 1, 1, 42);
  const std::string random_in = dir.write("random.json", to_json(indices_document(p.h0, p.perturbations, p.indices)).dump());
  const Run a = run({"verify", "--input", random_in, "--max-order", "4"});
  CHECK(a.code == kOk);
  CHECK(a.out.find("FAIL") == std::string::npos);
  CHECK(a.out.find("PASS schrieffer_wolff") != std::string::npos);

  const std::string transmon_in = dir.write("transmon.json", to_json(transmon_document()).dump());
  const Run b = run({"verify", "--input", transmon_in, "--max-order", "3"});
  CHECK(b.code == kOk);
}

TEST_CASE("exit codes for invalid input") {
  TempDir dir;
  const std::string degenerate =
      dir.write("degenerate.json", to_json(indices_document(DenseMatrix::Identity(2, 2), {}, {0, 1})).dump());
  CHECK(run({"verify", "--input", degenerate}).code == kInvalid);
  CHECK(run({"diagonalize", "--input", degenerate}).code == kInvalid);
  const std::string broken = dir.write("broken.json", "{\"format\": ");
  CHECK(run({"diagonalize", "--input", broken}).code == kParseFailed);
  CHECK(run({"diagonalize"}).code == kParseFailed);
  CHECK(run({"diagonalize", "--input", (dir.root / "missing.json").string()}).code == kParseFailed);
}

TEST_CASE("bench counts") {
  const Run r = run({"bench", "--scenario", "counts"});
  REQUIRE(r.code == kOk);
  CHECK(r.out.find("perturbation,order,engine,reference") == 0);
  CHECK(r.out.find("dense,4,11,27") != std::string::npos);
  CHECK(r.out.find("offdiagonal,4,9,15") != std::string::npos);
  CHECK(r.out.find("zero,4,0,0") != std::string::npos);
}
