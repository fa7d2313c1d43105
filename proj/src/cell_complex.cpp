#include "morsepack/cell_complex.hpp"

#include "morsepack/numeric.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace morsepack {

using ordered_json = nlohmann::ordered_json;

namespace {

const Eigen::SparseMatrix<double> kEmptySparse(0, 0);
const Eigen::MatrixXd kEmptyDense(0, 0);

[[noreturn]] void fail(const std::string& context, const std::string& message) {
  throw std::runtime_error(context + ": " + message);
}

}  // namespace

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream out;
  out << violations.size() << " violation(s)";
  for (const auto& v : violations) {
    out << "\n  " << v.check << " at " << v.location << " (magnitude " << v.magnitude << ")";
  }
  return out.str();
}

int BasedChainComplex::total_cells() const {
  int total = 0;
  for (int n = 0; n <= max_degree_; ++n) total += dim(n);
  return total;
}

const std::vector<std::string>& BasedChainComplex::cell_names(int n) const {
  static const std::vector<std::string> empty;
  return (n >= 0 && n <= max_degree_) ? cells_[n] : empty;
}

std::optional<CellId> BasedChainComplex::find_cell(const std::string& name) const {
  auto it = name_index_.find(name);
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

const Eigen::SparseMatrix<double>& BasedChainComplex::boundary(int n) const {
  if (n < 1 || n > max_degree_) return kEmptySparse;
  return boundaries_[n];
}

Eigen::MatrixXd BasedChainComplex::boundary_dense(int n) const {
  if (n < 1 || n > max_degree_) return Eigen::MatrixXd::Zero(dim(n - 1), dim(n));
  return Eigen::MatrixXd(boundaries_[n]);
}

const Eigen::MatrixXd& BasedChainComplex::weight(int n) const {
  if (n < 0 || n > max_degree_) return kEmptyDense;
  return weights_[n];
}

bool BasedChainComplex::is_orthogonal_base() const {
  for (int n = 0; n <= max_degree_; ++n) {
    const Eigen::MatrixXd& w = weights_[n];
    const double tol = 1e-14 * std::max(1.0, max_abs(w));
    for (int c = 0; c < w.cols(); ++c) {
      for (int r = 0; r < w.rows(); ++r) {
        if (r != c && std::abs(w(r, c)) > tol) return false;
      }
    }
  }
  return true;
}

void BasedChainComplex::rebuild_name_index() {
  name_index_.clear();
  for (int n = 0; n <= max_degree_; ++n) {
    for (int i = 0; i < dim(n); ++i) {
      auto [it, inserted] = name_index_.emplace(cells_[n][i], CellId{n, i});
      if (!inserted) {
        throw std::invalid_argument("duplicate cell name '" + cells_[n][i] + "'");
      }
    }
  }
}

BasedChainComplex BasedChainComplex::from_parts(
    std::vector<std::vector<std::string>> cells,
    std::vector<Eigen::SparseMatrix<double>> boundaries,
    std::vector<std::optional<Eigen::MatrixXd>> weights) {
  BasedChainComplex c;
  c.max_degree_ = static_cast<int>(cells.size()) - 1;
  if (c.max_degree_ < 0) throw std::invalid_argument("complex needs at least degree 0");
  c.cells_ = std::move(cells);
  c.boundaries_.assign(c.max_degree_ + 1, Eigen::SparseMatrix<double>());
  boundaries.resize(c.max_degree_ + 1);
  for (int n = 1; n <= c.max_degree_; ++n) {
    Eigen::SparseMatrix<double>& b = boundaries[n];
    if (b.rows() == 0 && b.cols() == 0) {
      b.resize(c.dim(n - 1), c.dim(n));
    }
    if (b.rows() != c.dim(n - 1) || b.cols() != c.dim(n)) {
      throw std::invalid_argument("boundary shape mismatch at degree " + std::to_string(n));
    }
    b.makeCompressed();
    c.boundaries_[n] = std::move(b);
  }
  weights.resize(c.max_degree_ + 1);
  c.weights_.resize(c.max_degree_ + 1);
  c.custom_weight_.assign(c.max_degree_ + 1, false);
  for (int n = 0; n <= c.max_degree_; ++n) {
    if (weights[n]) {
      if (weights[n]->rows() != c.dim(n) || weights[n]->cols() != c.dim(n)) {
        throw std::invalid_argument("weight shape mismatch at degree " + std::to_string(n));
      }
      c.weights_[n] = std::move(*weights[n]);
      c.custom_weight_[n] = true;
    } else {
      c.weights_[n] = Eigen::MatrixXd::Identity(c.dim(n), c.dim(n));
    }
  }
  c.rebuild_name_index();
  return c;
}

ComplexBuilder::ComplexBuilder(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0) throw std::invalid_argument("max_degree must be >= 0");
  cells_.resize(max_degree + 1);
  weights_.resize(max_degree + 1);
}

ComplexBuilder& ComplexBuilder::add_cell(int degree, std::string name) {
  if (degree < 0 || degree > max_degree_) {
    throw std::invalid_argument("cell '" + name + "' has degree out of range");
  }
  cells_[degree].push_back(std::move(name));
  return *this;
}

ComplexBuilder& ComplexBuilder::add_cells(int degree, std::vector<std::string> names) {
  for (auto& n : names) add_cell(degree, std::move(n));
  return *this;
}

ComplexBuilder& ComplexBuilder::add_boundary(const std::string& row, const std::string& col,
                                             double coeff) {
  entries_.push_back({row, col, coeff});
  return *this;
}

ComplexBuilder& ComplexBuilder::set_weight(int degree, Eigen::MatrixXd w) {
  if (degree < 0 || degree > max_degree_) {
    throw std::invalid_argument("weight degree out of range");
  }
  weights_[degree] = std::move(w);
  return *this;
}

ComplexBuilder& ComplexBuilder::set_weight_diagonal(int degree, const Eigen::VectorXd& diag) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(diag.size(), diag.size());
  w.diagonal() = diag;
  return set_weight(degree, std::move(w));
}

BasedChainComplex ComplexBuilder::build() const {
  std::unordered_map<std::string, CellId> index;
  for (int n = 0; n <= max_degree_; ++n) {
    for (int i = 0; i < static_cast<int>(cells_[n].size()); ++i) {
      auto [it, inserted] = index.emplace(cells_[n][i], CellId{n, i});
      if (!inserted) {
        throw std::runtime_error("duplicate cell name '" + cells_[n][i] + "'");
      }
    }
  }
  std::vector<std::vector<Eigen::Triplet<double>>> triplets(max_degree_ + 1);
  std::vector<std::unordered_map<long long, bool>> seen(max_degree_ + 1);
  for (const auto& e : entries_) {
    auto row_it = index.find(e.row);
    if (row_it == index.end()) {
      throw std::runtime_error("boundary references unknown cell '" + e.row + "'");
    }
    auto col_it = index.find(e.col);
    if (col_it == index.end()) {
      throw std::runtime_error("boundary references unknown cell '" + e.col + "'");
    }
    const CellId row = row_it->second, col = col_it->second;
    if (col.degree != row.degree + 1) {
      throw std::runtime_error("boundary entry (" + e.row + ", " + e.col +
                               ") does not drop exactly one degree");
    }
    const long long key =
        static_cast<long long>(row.index) * (1ll << 31) + static_cast<long long>(col.index);
    if (!seen[col.degree].emplace(key, true).second) {
      throw std::runtime_error("duplicate boundary entry (" + e.row + ", " + e.col + ")");
    }
    if (e.coeff == 0.0) continue;  // stored coefficients are exact nonzeros
    triplets[col.degree].emplace_back(row.index, col.index, e.coeff);
  }
  std::vector<Eigen::SparseMatrix<double>> boundaries(max_degree_ + 1);
  for (int n = 1; n <= max_degree_; ++n) {
    boundaries[n].resize(static_cast<int>(cells_[n - 1].size()),
                         static_cast<int>(cells_[n].size()));
    boundaries[n].setFromTriplets(triplets[n].begin(), triplets[n].end());
  }
  return BasedChainComplex::from_parts(cells_, std::move(boundaries), weights_);
}

ValidationReport validate(const BasedChainComplex& complex) {
  ValidationReport report;
  for (int n = 1; n < complex.max_degree(); ++n) {
    const Eigen::MatrixXd a = complex.boundary_dense(n);
    const Eigen::MatrixXd b = complex.boundary_dense(n + 1);
    if (a.size() == 0 || b.size() == 0) continue;
    const Eigen::MatrixXd prod = a * b;
    const double tol = 1e-10 * (1.0 + max_abs(a) * max_abs(b));
    for (int c = 0; c < prod.cols(); ++c) {
      for (int r = 0; r < prod.rows(); ++r) {
        if (std::abs(prod(r, c)) > tol) {
          report.violations.push_back({"boundary-squared",
                                       "(" + complex.cell_names(n + 1)[c] + ", " +
                                           complex.cell_names(n - 1)[r] + ")",
                                       std::abs(prod(r, c))});
        }
      }
    }
  }
  for (int n = 0; n <= complex.max_degree(); ++n) {
    const Eigen::MatrixXd& w = complex.weight(n);
    if (w.size() == 0) continue;
    const double scale = std::max(1.0, max_abs(w));
    const double asym = max_abs(w - w.transpose());
    if (asym > 1e-12 * scale) {
      report.violations.push_back({"weight-not-symmetric", "degree " + std::to_string(n), asym});
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((w + w.transpose()) / 2.0);
    if (es.info() != Eigen::Success) {
      report.violations.push_back({"weight-eigensolver-failure", "degree " + std::to_string(n), 0.0});
      continue;
    }
    const double smallest = es.eigenvalues().minCoeff();
    if (smallest <= 1e-12 * w.trace()) {
      report.violations.push_back({"weight-not-spd", "degree " + std::to_string(n), smallest});
    }
  }
  return report;
}

Eigen::MatrixXd adjoint_boundary(const BasedChainComplex& complex, int n) {
  if (n < 1 || n > complex.max_degree()) {
    if (n >= 0 && n <= complex.max_degree() + 1) {
      return Eigen::MatrixXd::Zero(complex.dim(n), complex.dim(n - 1));
    }
    throw std::out_of_range("adjoint_boundary: degree " + std::to_string(n) + " out of range");
  }
  const Eigen::MatrixXd bt = complex.boundary_dense(n).transpose();  // dim(n) x dim(n-1)
  return complex.weight(n).llt().solve(bt * complex.weight(n - 1));
}

double inner_product(const BasedChainComplex& complex, int n, const Signal& x, const Signal& y) {
  if (x.degree != n || y.degree != n) {
    throw std::invalid_argument("inner_product: degree mismatch");
  }
  if (x.values.size() != complex.dim(n) || y.values.size() != complex.dim(n)) {
    throw std::invalid_argument("inner_product: signal length does not match cell count");
  }
  return x.values.dot(complex.weight(n) * y.values);
}

double norm(const BasedChainComplex& complex, int n, const Eigen::VectorXd& values) {
  if (values.size() != complex.dim(n)) {
    throw std::invalid_argument("norm: signal length does not match cell count");
  }
  return std::sqrt(std::max(0.0, values.dot(complex.weight(n) * values)));
}

double norm(const BasedChainComplex& complex, const Signal& x) {
  return norm(complex, x.degree, x.values);
}

namespace {

// JSON loading keeps referential checks here; numeric invariants go through
// validate() so a malformed-but-parseable file still loads for inspection.

void check_known_fields(const ordered_json& obj, std::initializer_list<const char*> allowed,
                        const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* name : allowed) {
      if (it.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) fail(context, "unknown field '" + it.key() + "'");
  }
}

int parse_degree_key(const std::string& key, int max_degree, const std::string& context,
                     const std::string& field) {
  int degree = -1;
  try {
    size_t pos = 0;
    degree = std::stoi(key, &pos);
    if (pos != key.size()) degree = -1;
  } catch (const std::exception&) {
    degree = -1;
  }
  if (degree < 0 || degree > max_degree) {
    fail(context, field + " has degree key '" + key + "' outside [0, " +
                      std::to_string(max_degree) + "]");
  }
  return degree;
}

ordered_json parse_json(std::istream& in, const std::string& context) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(context, "JSON parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
}

bool is_identity(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols()) return false;
  return w == Eigen::MatrixXd::Identity(w.rows(), w.cols());
}

bool is_diagonal(const Eigen::MatrixXd& w) {
  for (int c = 0; c < w.cols(); ++c) {
    for (int r = 0; r < w.rows(); ++r) {
      if (r != c && w(r, c) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

BasedChainComplex parse_complex(std::istream& in, const std::string& context) {
  const ordered_json doc = parse_json(in, context);
  if (!doc.is_object()) fail(context, "top level must be an object");
  check_known_fields(doc, {"max_degree", "cells", "boundary", "weights"}, context);
  if (!doc.contains("max_degree") || !doc["max_degree"].is_number_integer()) {
    fail(context, "'max_degree' must be an integer");
  }
  const int max_degree = doc["max_degree"].get<int>();
  if (max_degree < 0) fail(context, "'max_degree' must be >= 0");

  ComplexBuilder builder(max_degree);
  if (!doc.contains("cells") || !doc["cells"].is_object()) {
    fail(context, "'cells' must be an object keyed by degree");
  }
  std::vector<std::vector<std::string>> names(max_degree + 1);
  for (auto it = doc["cells"].begin(); it != doc["cells"].end(); ++it) {
    const int degree = parse_degree_key(it.key(), max_degree, context, "'cells'");
    if (!it.value().is_array()) fail(context, "'cells/" + it.key() + "' must be an array");
    for (const auto& name : it.value()) {
      if (!name.is_string()) fail(context, "'cells/" + it.key() + "' entries must be strings");
      names[degree].push_back(name.get<std::string>());
    }
  }
  for (int n = 0; n <= max_degree; ++n) builder.add_cells(n, names[n]);

  if (doc.contains("boundary")) {
    if (!doc["boundary"].is_object()) fail(context, "'boundary' must be an object keyed by degree");
    for (auto it = doc["boundary"].begin(); it != doc["boundary"].end(); ++it) {
      const int degree = parse_degree_key(it.key(), max_degree, context, "'boundary'");
      if (degree == 0) fail(context, "'boundary/0' is not meaningful (no degree -1 cells)");
      if (!it.value().is_array()) fail(context, "'boundary/" + it.key() + "' must be an array");
      for (const auto& triple : it.value()) {
        if (!triple.is_array() || triple.size() != 3 || !triple[0].is_string() ||
            !triple[1].is_string() || !triple[2].is_number()) {
          fail(context, "'boundary/" + it.key() + "' entries must be [row, col, coeff]");
        }
        builder.add_boundary(triple[0].get<std::string>(), triple[1].get<std::string>(),
                             triple[2].get<double>());
      }
    }
  }

  if (doc.contains("weights")) {
    if (!doc["weights"].is_object()) fail(context, "'weights' must be an object keyed by degree");
    for (auto it = doc["weights"].begin(); it != doc["weights"].end(); ++it) {
      const int degree = parse_degree_key(it.key(), max_degree, context, "'weights'");
      const int d = static_cast<int>(names[degree].size());
      const auto& value = it.value();
      if (value.is_object()) {
        check_known_fields(value, {"diag"}, context + ":weights/" + it.key());
        if (!value.contains("diag") || !value["diag"].is_array() ||
            static_cast<int>(value["diag"].size()) != d) {
          fail(context, "'weights/" + it.key() + "/diag' must list one value per cell");
        }
        Eigen::VectorXd diag(d);
        for (int i = 0; i < d; ++i) diag[i] = value["diag"][i].get<double>();
        builder.set_weight_diagonal(degree, diag);
      } else if (value.is_array()) {
        if (static_cast<int>(value.size()) != d) {
          fail(context, "'weights/" + it.key() + "' must be a " + std::to_string(d) + "x" +
                            std::to_string(d) + " matrix");
        }
        Eigen::MatrixXd w(d, d);
        for (int r = 0; r < d; ++r) {
          if (!value[r].is_array() || static_cast<int>(value[r].size()) != d) {
            fail(context, "'weights/" + it.key() + "' rows must have length " + std::to_string(d));
          }
          for (int c = 0; c < d; ++c) w(r, c) = value[r][c].get<double>();
        }
        builder.set_weight(degree, std::move(w));
      } else {
        fail(context, "'weights/" + it.key() + "' must be a matrix or {\"diag\": [...]}");
      }
    }
  }

  try {
    return builder.build();
  } catch (const std::exception& e) {
    fail(context, e.what());
  }
}

BasedChainComplex load_complex(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  return parse_complex(in, path);
}

void save_complex(const BasedChainComplex& complex, std::ostream& out) {
  ordered_json doc;
  doc["max_degree"] = complex.max_degree();
  ordered_json cells = ordered_json::object();
  for (int n = 0; n <= complex.max_degree(); ++n) {
    cells[std::to_string(n)] = complex.cell_names(n);
  }
  doc["cells"] = std::move(cells);
  ordered_json boundary = ordered_json::object();
  for (int n = 1; n <= complex.max_degree(); ++n) {
    const auto& b = complex.boundary(n);
    if (b.nonZeros() == 0) continue;
    ordered_json triples = ordered_json::array();
    for (int c = 0; c < b.outerSize(); ++c) {  // column-major: sorted by (col, row)
      for (Eigen::SparseMatrix<double>::InnerIterator it(b, c); it; ++it) {
        triples.push_back({complex.cell_names(n - 1)[it.row()], complex.cell_names(n)[it.col()],
                           it.value()});
      }
    }
    boundary[std::to_string(n)] = std::move(triples);
  }
  doc["boundary"] = std::move(boundary);
  ordered_json weights = ordered_json::object();
  for (int n = 0; n <= complex.max_degree(); ++n) {
    const Eigen::MatrixXd& w = complex.weight(n);
    if (is_identity(w)) continue;
    if (is_diagonal(w)) {
      ordered_json diag = ordered_json::array();
      for (int i = 0; i < w.rows(); ++i) diag.push_back(w(i, i));
      weights[std::to_string(n)] = ordered_json{{"diag", std::move(diag)}};
    } else {
      ordered_json rows = ordered_json::array();
      for (int r = 0; r < w.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
        rows.push_back(std::move(row));
      }
      weights[std::to_string(n)] = std::move(rows);
    }
  }
  if (!weights.empty()) doc["weights"] = std::move(weights);
  out << doc.dump(2) << "\n";
}

void save_complex(const BasedChainComplex& complex, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  save_complex(complex, out);
}

Signal parse_signal(const BasedChainComplex& complex, std::istream& in,
                    const std::string& context) {
  const ordered_json doc = parse_json(in, context);
  if (!doc.is_object()) fail(context, "top level must be an object");
  check_known_fields(doc, {"degree", "values"}, context);
  if (!doc.contains("degree") || !doc["degree"].is_number_integer()) {
    fail(context, "'degree' must be an integer");
  }
  const int degree = doc["degree"].get<int>();
  if (degree < 0 || degree > complex.max_degree()) {
    fail(context, "'degree' " + std::to_string(degree) + " outside [0, " +
                      std::to_string(complex.max_degree()) + "]");
  }
  Signal s{degree, Eigen::VectorXd::Zero(complex.dim(degree))};
  if (!doc.contains("values") || !doc["values"].is_object()) {
    fail(context, "'values' must be an object keyed by cell name");
  }
  for (auto it = doc["values"].begin(); it != doc["values"].end(); ++it) {
    auto cell = complex.find_cell(it.key());
    if (!cell) fail(context, "'values' references unknown cell '" + it.key() + "'");
    if (cell->degree != degree) {
      fail(context, "'values' cell '" + it.key() + "' has degree " +
                        std::to_string(cell->degree) + ", expected " + std::to_string(degree));
    }
    if (!it.value().is_number()) fail(context, "'values/" + it.key() + "' must be a number");
    s.values[cell->index] = it.value().get<double>();
  }
  return s;
}

Signal load_signal(const BasedChainComplex& complex, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  return parse_signal(complex, in, path);
}

void save_signal(const BasedChainComplex& complex, const Signal& s, std::ostream& out) {
  if (s.values.size() != complex.dim(s.degree)) {
    throw std::invalid_argument("save_signal: signal length does not match cell count");
  }
  ordered_json doc;
  doc["degree"] = s.degree;
  ordered_json values = ordered_json::object();
  const auto& names = complex.cell_names(s.degree);
  for (int i = 0; i < s.values.size(); ++i) values[names[i]] = s.values[i];
  doc["values"] = std::move(values);
  out << doc.dump(2) << "\n";
}

void save_signal(const BasedChainComplex& complex, const Signal& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  save_signal(complex, s, out);
}

}  // namespace morsepack
