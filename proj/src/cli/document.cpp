#include "blockdiag/cli/document.hpp"

#include <fstream>
#include <sstream>

namespace blockdiag::cli {

using nlohmann::json;

namespace {

Scalar decode_scalar(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ParseError(path, "expected a number or a [re, im] pair");
}

json encode_scalar(Scalar s) { return json::array({s.real(), s.imag()}); }

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path, std::string("missing field '") + key + "'");
  return *it;
}

OrderIndex decode_order(const json& v, const std::string& path) {
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))
    return OrderIndex{static_cast<unsigned>(v.get<long long>())};
  if (!v.is_array() || v.empty()) throw ParseError(path, "order must be a non-negative integer or a list of them");
  std::vector<unsigned> c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer() || v[i].get<long long>() < 0)
      throw ParseError(path + "/" + std::to_string(i), "order components must be non-negative integers");
    c.push_back(static_cast<unsigned>(v[i].get<long long>()));
  }
  return OrderIndex(std::move(c));
}

std::vector<long long> int_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected a list of integers");
  std::vector<long long> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) throw ParseError(path + "/" + std::to_string(i), "expected an integer");
    out.push_back(v[i].get<long long>());
  }
  return out;
}

Mask decode_mask(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ParseError(path, "mask must be a non-empty list of rows");
  const std::size_t n = v.size();
  Mask m(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    if (!v[a].is_array() || v[a].size() != n) throw ParseError(path + "/" + std::to_string(a), "mask must be square");
    for (std::size_t b = 0; b < n; ++b) {
      const json& e = v[a][b];
      if (e.is_boolean()) m(a, b) = e.get<bool>();
      else if (e.is_number_integer()) m(a, b) = e.get<long long>() != 0;
      else throw ParseError(path + "/" + std::to_string(a) + "/" + std::to_string(b), "mask entries are booleans");
    }
  }
  return m;
}

}  // namespace

std::size_t ProblemDocument::n_params() const {
  if (!perturbations.empty()) return perturbations.front().first.size();
  return param_names.empty() ? 1 : param_names.size();
}

json encode_dense(const DenseMatrix& m) {
  json rows = json::array();
  for (Index a = 0; a < m.rows(); ++a) {
    json row = json::array();
    for (Index b = 0; b < m.cols(); ++b) row.push_back(encode_scalar(m(a, b)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json encode_sparse(const SparseMatrix& m) {
  json rows = json::array(), cols = json::array(), vals = json::array();
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      rows.push_back(it.row());
      cols.push_back(it.col());
      vals.push_back(encode_scalar(it.value()));
    }
  return json{{"shape", {m.rows(), m.cols()}}, {"rows", rows}, {"cols", cols}, {"vals", vals}};
}

MatrixValue decode_matrix(const json& j, const std::string& path) {
  MatrixValue out;
  if (j.is_object()) {
    const auto shape = int_list(field(j, "shape", path), path + "/shape");
    if (shape.size() != 2 || shape[0] <= 0 || shape[1] <= 0) throw ParseError(path + "/shape", "shape must be [rows, cols]");
    const auto rows = int_list(field(j, "rows", path), path + "/rows");
    const auto cols = int_list(field(j, "cols", path), path + "/cols");
    const json& vals = field(j, "vals", path);
    if (!vals.is_array() || rows.size() != cols.size() || rows.size() != vals.size())
      throw ParseError(path, "rows, cols and vals must have equal lengths");
    std::vector<Eigen::Triplet<Scalar>> t;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] < 0 || rows[k] >= shape[0] || cols[k] < 0 || cols[k] >= shape[1])
        throw ParseError(path + "/rows/" + std::to_string(k), "index outside shape");
      t.emplace_back(rows[k], cols[k], decode_scalar(vals[k], path + "/vals/" + std::to_string(k)));
    }
    out.sparse = true;
    out.coo.resize(shape[0], shape[1]);
    out.coo.setFromTriplets(t.begin(), t.end());
    out.coo.makeCompressed();
    return out;
  }
  if (!j.is_array() || j.empty()) throw ParseError(path, "matrix must be a list of rows or a sparse object");
  const std::size_t r = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ParseError(path + "/0", "matrix rows must be non-empty lists");
  const std::size_t c = j[0].size();
  out.dense.resize(r, c);
  for (std::size_t a = 0; a < r; ++a) {
    const std::string rp = path + "/" + std::to_string(a);
    if (!j[a].is_array() || j[a].size() != c) throw ParseError(rp, "ragged matrix row");
    for (std::size_t b = 0; b < c; ++b) out.dense(a, b) = decode_scalar(j[a][b], rp + "/" + std::to_string(b));
  }
  return out;
}

ProblemDocument parse_problem(const json& j) {
  ProblemDocument doc;
  if (!j.is_object()) throw ParseError("/", "document must be an object");
  const json& fmt = field(j, "format", "");
  if (!fmt.is_string() || fmt.get<std::string>() != kProblemFormat)
    throw ParseError("/format", std::string("expected \"") + kProblemFormat + "\"");
  doc.h0 = decode_matrix(field(j, "H0", ""), "/H0");
  if (doc.h0.rows() != doc.h0.cols()) throw ParseError("/H0", "H0 must be square");
  const Index n = doc.h0.rows();

  if (auto it = j.find("perturbations"); it != j.end()) {
    if (!it->is_array()) throw ParseError("/perturbations", "expected a list");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string p = "/perturbations/" + std::to_string(k);
      OrderIndex order = decode_order(field((*it)[k], "order", p), p + "/order");
      MatrixValue m = decode_matrix(field((*it)[k], "matrix", p), p + "/matrix");
      if (m.rows() != n || m.cols() != n) throw ParseError(p + "/matrix", "shape differs from H0");
      if (order.is_zero()) throw ParseError(p + "/order", "order must be nonzero");
      if (!doc.perturbations.empty() && doc.perturbations.front().first.size() != order.size())
        throw ParseError(p + "/order", "all orders need the same number of parameters");
      for (const auto& [o, _] : doc.perturbations)
        if (o == order) throw ParseError(p + "/order", "duplicate order " + order.to_string());
      doc.perturbations.emplace_back(std::move(order), std::move(m));
    }
  }
  if (auto it = j.find("param_names"); it != j.end()) {
    if (!it->is_array()) throw ParseError("/param_names", "expected a list of strings");
    for (std::size_t k = 0; k < it->size(); ++k) {
      if (!(*it)[k].is_string()) throw ParseError("/param_names/" + std::to_string(k), "expected a string");
      doc.param_names.push_back((*it)[k].get<std::string>());
    }
    if (!doc.perturbations.empty() && doc.param_names.size() != doc.perturbations.front().first.size())
      throw ParseError("/param_names", "need one name per parameter");
  }

  const json& sub = field(j, "subspaces", "");
  if (!sub.is_object() || sub.size() != 1)
    throw ParseError("/subspaces", "exactly one of indices, eigenvectors, implicit is required");
  if (auto it = sub.find("indices"); it != sub.end()) {
    doc.kind = SubspaceKind::indices;
    for (long long v : int_list(*it, "/subspaces/indices")) {
      if (v < 0) throw ParseError("/subspaces/indices", "block labels must be non-negative");
      doc.indices.push_back(static_cast<int>(v));
    }
    if (static_cast<Index>(doc.indices.size()) != n)
      throw ParseError("/subspaces/indices", "need one label per basis state");
  } else if (auto it2 = sub.find("eigenvectors"); it2 != sub.end()) {
    doc.kind = SubspaceKind::eigenvectors;
    if (!it2->is_array() || it2->empty()) throw ParseError("/subspaces/eigenvectors", "expected a list of matrices");
    Index total = 0;
    for (std::size_t k = 0; k < it2->size(); ++k) {
      const std::string p = "/subspaces/eigenvectors/" + std::to_string(k);
      DenseMatrix v = decode_matrix((*it2)[k], p).to_dense();
      if (v.rows() != n) throw ParseError(p, "eigenvectors must have one row per basis state");
      total += v.cols();
      doc.eigenvectors.push_back(std::move(v));
    }
    if (total != n) throw ParseError("/subspaces/eigenvectors", "subspace sizes must sum to the dimension");
  } else if (auto it3 = sub.find("implicit"); it3 != sub.end()) {
    doc.kind = SubspaceKind::implicit;
    doc.explicit_vectors = decode_matrix(field(*it3, "explicit_vectors", "/subspaces/implicit"),
                                         "/subspaces/implicit/explicit_vectors")
                               .to_dense();
    if (doc.explicit_vectors.rows() != n)
      throw ParseError("/subspaces/implicit/explicit_vectors", "vectors must have one row per basis state");
    const json& ev = field(*it3, "eigenvalues", "/subspaces/implicit");
    if (!ev.is_array() || static_cast<Index>(ev.size()) != doc.explicit_vectors.cols())
      throw ParseError("/subspaces/implicit/eigenvalues", "need one eigenvalue per explicit vector");
    doc.explicit_energies.resize(ev.size());
    for (std::size_t k = 0; k < ev.size(); ++k) {
      if (!ev[k].is_number()) throw ParseError("/subspaces/implicit/eigenvalues/" + std::to_string(k), "expected a number");
      doc.explicit_energies(k) = ev[k].get<double>();
    }
  } else {
    throw ParseError("/subspaces", "expected indices, eigenvectors or implicit");
  }

  if (auto it = j.find("fully_diagonalize"); it != j.end()) {
    if (!it->is_object()) throw ParseError("/fully_diagonalize", "expected an object keyed by block label");
    for (const auto& [key, value] : it->items()) {
      std::size_t block = 0;
      try {
        std::size_t used = 0;
        block = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ParseError("/fully_diagonalize/" + key, "keys are block labels");
      }
      doc.masks[block] = decode_mask(value, "/fully_diagonalize/" + key);
    }
  }

  if (auto it = j.find("options"); it != j.end()) {
    if (!it->is_object()) throw ParseError("/options", "expected an object");
    if (auto t = it->find("tol_degeneracy"); t != it->end()) {
      if (!t->is_number() || t->get<double>() < 0) throw ParseError("/options/tol_degeneracy", "expected a non-negative number");
      doc.tol_degeneracy = t->get<double>();
    }
    if (auto t = it->find("hermiticity_tolerance"); t != it->end()) {
      if (!t->is_number() || t->get<double>() < 0)
        throw ParseError("/options/hermiticity_tolerance", "expected a non-negative number");
      doc.hermiticity_tolerance = t->get<double>();
    }
    if (auto t = it->find("retention"); t != it->end()) {
      if (*t == "keep") doc.retention = Retention::keep;
      else if (*t == "minimal") doc.retention = Retention::minimal;
      else throw ParseError("/options/retention", "expected \"keep\" or \"minimal\"");
    }
  }
  return doc;
}

ProblemDocument parse_problem_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  }
  return parse_problem(j);
}

ProblemDocument read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_problem_text(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.location(), std::string(e.what()).substr(e.location().size() + 2));
  }
}

json to_json(const ProblemDocument& doc) {
  auto enc = [](const MatrixValue& m) { return m.sparse ? encode_sparse(m.coo) : encode_dense(m.dense); };
  json j;
  j["format"] = kProblemFormat;
  j["H0"] = enc(doc.h0);
  json perts = json::array();
  for (const auto& [order, m] : doc.perturbations) perts.push_back({{"order", order.components()}, {"matrix", enc(m)}});
  j["perturbations"] = perts;
  if (!doc.param_names.empty()) j["param_names"] = doc.param_names;
  switch (doc.kind) {
    case SubspaceKind::indices:
      j["subspaces"] = {{"indices", doc.indices}};
      break;
    case SubspaceKind::eigenvectors: {
      json vs = json::array();
      for (const auto& v : doc.eigenvectors) vs.push_back(encode_dense(v));
      j["subspaces"] = {{"eigenvectors", vs}};
      break;
    }
    case SubspaceKind::implicit: {
      std::vector<double> e(doc.explicit_energies.data(), doc.explicit_energies.data() + doc.explicit_energies.size());
      j["subspaces"] = {{"implicit", {{"explicit_vectors", encode_dense(doc.explicit_vectors)}, {"eigenvalues", e}}}};
      break;
    }
  }
  if (!doc.masks.empty()) {
    json fd = json::object();
    for (const auto& [block, mask] : doc.masks) {
      json rows = json::array();
      for (Index a = 0; a < mask.rows(); ++a) {
        json row = json::array();
        for (Index b = 0; b < mask.cols(); ++b) row.push_back(static_cast<bool>(mask(a, b)));
        rows.push_back(row);
      }
      fd[std::to_string(block)] = rows;
    }
    j["fully_diagonalize"] = fd;
  }
  json opts = json::object();
  if (doc.tol_degeneracy >= 0) opts["tol_degeneracy"] = doc.tol_degeneracy;
  opts["hermiticity_tolerance"] = doc.hermiticity_tolerance;
  opts["retention"] = doc.retention == Retention::keep ? "keep" : "minimal";
  j["options"] = opts;
  return j;
}

json to_json(const ResultDocument& doc) {
  json entries = json::array();
  for (const auto& e : doc.entries) {
    json item{{"block", {e.row, e.col}}, {"order", e.order.components()}, {"shape", {e.rows, e.cols}}};
    if (e.zero) {
      item["zero"] = true;
    } else {
      item["zero"] = false;
      item["matrix"] = encode_dense(e.matrix);
    }
    entries.push_back(std::move(item));
  }
  return json{{"format", kResultFormat}, {"entries", entries}, {"metadata", doc.metadata}};
}

ResultDocument parse_result(const json& j) {
  ResultDocument doc;
  const json& fmt = field(j, "format", "");
  if (!fmt.is_string() || fmt.get<std::string>() != kResultFormat)
    throw ParseError("/format", std::string("expected \"") + kResultFormat + "\"");
  const json& entries = field(j, "entries", "");
  if (!entries.is_array()) throw ParseError("/entries", "expected a list");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const std::string p = "/entries/" + std::to_string(k);
    ResultEntry e;
    const auto block = int_list(field(entries[k], "block", p), p + "/block");
    if (block.size() != 2 || block[0] < 0 || block[1] < 0) throw ParseError(p + "/block", "expected [row, col]");
    e.row = block[0];
    e.col = block[1];
    e.order = decode_order(field(entries[k], "order", p), p + "/order");
    const auto shape = int_list(field(entries[k], "shape", p), p + "/shape");
    if (shape.size() != 2) throw ParseError(p + "/shape", "expected [rows, cols]");
    e.rows = shape[0];
    e.cols = shape[1];
    const json& z = field(entries[k], "zero", p);
    if (!z.is_boolean()) throw ParseError(p + "/zero", "expected a boolean");
    e.zero = z.get<bool>();
    if (!e.zero) e.matrix = decode_matrix(field(entries[k], "matrix", p), p + "/matrix").to_dense();
    doc.entries.push_back(std::move(e));
  }
  if (auto it = j.find("metadata"); it != j.end()) doc.metadata = *it;
  return doc;
}

std::map<OrderIndex, DenseMatrix> dense_perturbations(const ProblemDocument& doc) {
  std::map<OrderIndex, DenseMatrix> out;
  for (const auto& [order, m] : doc.perturbations) out[order] = m.to_dense();
  return out;
}

BuiltProblem build_problem(const ProblemDocument& doc, bool force_implicit, double tol_override) {
  ProblemOptions opts;
  opts.masks = doc.masks;
  opts.degeneracy_tolerance = tol_override >= 0 ? tol_override : doc.tol_degeneracy;
  opts.hermiticity_tolerance = doc.hermiticity_tolerance;
  opts.param_names = doc.param_names;
  opts.retention = doc.retention;
  BuiltProblem out;

  const bool implicit = doc.kind == SubspaceKind::implicit || force_implicit;
  if (implicit) {
    if (!doc.masks.empty()) throw ConfigurationError("implicit mode does not support elementwise masks");
    DenseMatrix psi;
    Eigen::VectorXd energies;
    if (doc.kind == SubspaceKind::implicit) {
      psi = doc.explicit_vectors;
      energies = doc.explicit_energies;
    } else {
      std::vector<DenseMatrix> vectors = doc.eigenvectors;
      if (doc.kind == SubspaceKind::indices) {
        int b = 0;
        for (int v : doc.indices) b = std::max(b, v + 1);
        vectors.assign(b, DenseMatrix());
        std::vector<std::vector<Index>> members(b);
        for (std::size_t k = 0; k < doc.indices.size(); ++k) members[doc.indices[k]].push_back(k);
        for (int i = 0; i < b; ++i) {
          vectors[i] = DenseMatrix::Zero(doc.h0.rows(), members[i].size());
          for (std::size_t a = 0; a < members[i].size(); ++a) vectors[i](members[i][a], a) = 1.0;
        }
      }
      if (vectors.size() != 2) throw ConfigurationError("implicit mode needs exactly two subspaces");
      psi = vectors[0];
      const DenseMatrix h0e = psi.adjoint() * (doc.h0.to_sparse() * psi);
      energies = h0e.diagonal().real();
    }
    std::map<OrderIndex, SparseMatrix> perts;
    for (const auto& [order, m] : doc.perturbations) perts[order] = m.to_sparse();
    out.extended = std::make_shared<ExtendedProblem>(
        build_extended_problem(doc.h0.to_sparse(), perts, psi, energies, std::move(opts)));
    return out;
  }

  const DenseMatrix h0 = doc.h0.to_dense();
  const auto perts = dense_perturbations(doc);
  if (doc.kind == SubspaceKind::indices) {
    out.explicit_problem.emplace(PerturbationProblem::from_indices(h0, perts, doc.indices, std::move(opts)));
  } else {
    out.explicit_problem.emplace(PerturbationProblem::from_eigenvectors(h0, perts, doc.eigenvectors, std::move(opts)));
  }
  return out;
}

}  // namespace blockdiag::cli
