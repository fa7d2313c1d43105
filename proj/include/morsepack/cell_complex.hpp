#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace morsepack {

// A cell is addressed by its degree and its position within that degree.
// Positions follow file order and double as matrix row/column indices.
struct CellId {
  int degree = 0;
  int index = 0;
  friend bool operator==(const CellId&, const CellId&) = default;
  friend auto operator<=>(const CellId&, const CellId&) = default;
};

struct Violation {
  std::string check;     // e.g. "boundary-squared", "weight-not-spd"
  std::string location;  // cells or degree involved
  double magnitude = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Real-valued chain with a fixed degree; values follow the cell order.
struct Signal {
  int degree = 0;
  Eigen::VectorXd values;
};

// Finite based chain complex over R with a distinguished cell base per degree,
// sparse boundary operators d_n : C_n -> C_{n-1}, and symmetric positive
// definite inner product matrices W_n (identity unless set). Immutable after
// construction; build instances through ComplexBuilder or from_parts.
class BasedChainComplex {
 public:
  BasedChainComplex() = default;

  int max_degree() const { return max_degree_; }
  // Number of cells in degree n; zero outside [0, max_degree].
  int dim(int n) const {
    return (n >= 0 && n <= max_degree_) ? static_cast<int>(cells_[n].size()) : 0;
  }
  int total_cells() const;

  const std::vector<std::string>& cell_names(int n) const;
  const std::string& cell_name(CellId id) const { return cells_[id.degree][id.index]; }
  std::optional<CellId> find_cell(const std::string& name) const;

  // d_n as a dim(n-1) x dim(n) sparse matrix; valid for n in [1, max_degree].
  const Eigen::SparseMatrix<double>& boundary(int n) const;
  // Dense d_n for any n >= 0; zero-shaped outside the stored range.
  Eigen::MatrixXd boundary_dense(int n) const;

  const Eigen::MatrixXd& weight(int n) const;
  bool has_custom_weight(int n) const { return n >= 0 && n <= max_degree_ && custom_weight_[n]; }
  // True iff every W_n is diagonal (exact for one-dimensional cell components).
  bool is_orthogonal_base() const;

  // Trusts index-level data; checks shape consistency only.
  // boundaries[n] holds d_n for n in [1, max_degree]; boundaries[0] is ignored.
  static BasedChainComplex from_parts(std::vector<std::vector<std::string>> cells,
                                      std::vector<Eigen::SparseMatrix<double>> boundaries,
                                      std::vector<std::optional<Eigen::MatrixXd>> weights);

 private:
  friend class ComplexBuilder;

  int max_degree_ = -1;
  std::vector<std::vector<std::string>> cells_;          // per degree
  std::vector<Eigen::SparseMatrix<double>> boundaries_;  // [n] = d_n, n >= 1
  std::vector<Eigen::MatrixXd> weights_;                 // per degree
  std::vector<bool> custom_weight_;                      // weights_[n] set explicitly
  std::unordered_map<std::string, CellId> name_index_;

  void rebuild_name_index();
};

// Incremental construction with name-level boundary entries. build() resolves
// names, rejects duplicates and dangling references, and freezes the result.
class ComplexBuilder {
 public:
  explicit ComplexBuilder(int max_degree);

  ComplexBuilder& add_cell(int degree, std::string name);
  ComplexBuilder& add_cells(int degree, std::vector<std::string> names);
  // Records d(col) += coeff * row, where deg(col) = deg(row) + 1.
  ComplexBuilder& add_boundary(const std::string& row, const std::string& col, double coeff);
  ComplexBuilder& set_weight(int degree, Eigen::MatrixXd w);
  ComplexBuilder& set_weight_diagonal(int degree, const Eigen::VectorXd& diag);

  BasedChainComplex build() const;

 private:
  struct Entry {
    std::string row, col;
    double coeff;
  };
  int max_degree_;
  std::vector<std::vector<std::string>> cells_;
  std::vector<Entry> entries_;
  std::vector<std::optional<Eigen::MatrixXd>> weights_;
};

// Structural and numerical checks: d_n d_{n+1} = 0 (relative tolerance 1e-10),
// W_n symmetric (1e-12) and positive definite (smallest eigenvalue above
// 1e-12 * trace), and internal index consistency. Reports all failures.
ValidationReport validate(const BasedChainComplex& complex);

// Weighted adjoint d_n^dagger = W_n^{-1} d_n^T W_{n-1}, dense dim(n) x dim(n-1).
Eigen::MatrixXd adjoint_boundary(const BasedChainComplex& complex, int n);

// <x, y>_n = x^T W_n y. Throws std::invalid_argument on degree mismatch.
double inner_product(const BasedChainComplex& complex, int n, const Signal& x, const Signal& y);
double norm(const BasedChainComplex& complex, const Signal& x);

// W-norm of an arbitrary coordinate vector in degree n.
double norm(const BasedChainComplex& complex, int n, const Eigen::VectorXd& values);

// JSON serialization. save_* emit a canonical form (fixed key order, cells in
// stored order, boundary triples sorted by column then row, identity weights
// omitted, diagonal weights in "diag" form), so save(load(save(x))) is
// byte-identical to save(x). Parse failures throw std::runtime_error naming
// the offending field or cell.
BasedChainComplex parse_complex(std::istream& in, const std::string& context = "<stream>");
BasedChainComplex load_complex(const std::string& path);
void save_complex(const BasedChainComplex& complex, std::ostream& out);
void save_complex(const BasedChainComplex& complex, const std::string& path);

Signal parse_signal(const BasedChainComplex& complex, std::istream& in,
                    const std::string& context = "<stream>");
Signal load_signal(const BasedChainComplex& complex, const std::string& path);
void save_signal(const BasedChainComplex& complex, const Signal& s, std::ostream& out);
void save_signal(const BasedChainComplex& complex, const Signal& s, const std::string& path);

}  // namespace morsepack
