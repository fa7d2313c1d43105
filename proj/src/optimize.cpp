#include "morsepack/optimize.hpp"

#include "morsepack/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace morsepack {

namespace {

// Relative threshold below which a corrected boundary entry is treated as an
// exactly cancelled incidence rather than a new one. Keeps the admissible
// pair set clean across long pairing sequences.
constexpr double kCancelTol = 1e-12;

void check_signal(const BasedChainComplex& complex, const Signal& s, const char* who) {
  if (s.degree < 0 || s.degree > complex.max_degree()) {
    throw std::invalid_argument(std::string(who) + ": signal degree " +
                                std::to_string(s.degree) + " out of range");
  }
  if (s.values.size() != complex.dim(s.degree)) {
    throw std::invalid_argument(std::string(who) + ": signal length does not match degree " +
                                std::to_string(s.degree));
  }
}

// W_n norm of one column of d_{n+1}, off the sparse support when possible.
double incidence_column_norm(const BasedChainComplex& complex, int n,
                             const Eigen::SparseMatrix<double>& b, int col) {
  if (!complex.has_custom_weight(n)) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it) {
      sum += it.value() * it.value();
    }
    return std::sqrt(sum);
  }
  const Eigen::MatrixXd& w = complex.weight(n);
  double sum = 0.0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it) {
    for (Eigen::SparseMatrix<double>::InnerIterator jt(b, col); jt; ++jt) {
      sum += it.value() * w(it.row(), jt.row()) * jt.value();
    }
  }
  return std::sqrt(std::max(sum, 0.0));
}

PairChoice select_optimal(const BasedChainComplex& complex, const Eigen::VectorXd& abs_values,
                          int degree, SplitMix64& rng) {
  const int n = degree;
  if (n < 0 || n >= complex.max_degree()) {
    throw std::runtime_error("optimal_pairing: no admissible pairing at degree " +
                             std::to_string(n));
  }
  const Eigen::SparseMatrix<double>& b = complex.boundary(n + 1);
  std::vector<double> col_norm(b.cols(), 0.0);
  for (int c = 0; c < b.cols(); ++c) col_norm[c] = incidence_column_norm(complex, n, b, c);

  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int c = 0; c < b.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, c); it; ++it) {
      const double score = abs_values(it.row()) / std::abs(it.value()) * col_norm[c];
      if (!found || score < best) best = score;
      found = true;
    }
  }
  if (!found) {
    throw std::runtime_error("optimal_pairing: no admissible pairing at degree " +
                             std::to_string(n));
  }

  std::vector<int> cells;
  for (int c = 0; c < b.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, c); it; ++it) {
      if (abs_values(it.row()) / std::abs(it.value()) * col_norm[c] == best) {
        cells.push_back(c);
        break;
      }
    }
  }
  const int alpha = cells[rng.pick(static_cast<int>(cells.size()))];

  std::vector<int> faces;
  for (Eigen::SparseMatrix<double>::InnerIterator it(b, alpha); it; ++it) {
    if (abs_values(it.row()) / std::abs(it.value()) * col_norm[alpha] == best) {
      faces.push_back(static_cast<int>(it.row()));
    }
  }
  const int beta = faces[rng.pick(static_cast<int>(faces.size()))];
  return {CellId{n + 1, alpha}, CellId{n, beta}, best};
}

}  // namespace

double topological_loss(const BasedChainComplex& complex, const Eigen::MatrixXd& psi,
                        const Eigen::MatrixXd& phi, const Signal& s) {
  check_signal(complex, s, "topological_loss");
  const int n = s.degree;
  if (psi.cols() != complex.dim(n) || phi.rows() != complex.dim(n) ||
      psi.rows() != phi.cols()) {
    throw std::invalid_argument("topological_loss: map shapes do not fit degree " +
                                std::to_string(n));
  }
  const Eigen::VectorXd residual = s.values - phi * (psi * s.values);
  return norm(complex, n, residual);
}

double single_pairing_loss(const BasedChainComplex& complex, CellId alpha, CellId beta,
                           const Signal& s) {
  check_signal(complex, s, "single_pairing_loss");
  if (beta.degree != s.degree || alpha.degree != s.degree + 1) {
    throw std::invalid_argument("single_pairing_loss: pair degrees do not bracket the signal");
  }
  if (alpha.degree > complex.max_degree() || alpha.index < 0 ||
      alpha.index >= complex.dim(alpha.degree) || beta.index < 0 ||
      beta.index >= complex.dim(beta.degree)) {
    throw std::invalid_argument("single_pairing_loss: cell out of range");
  }
  const Eigen::SparseMatrix<double>& b = complex.boundary(alpha.degree);
  const double pivot = b.coeff(beta.index, alpha.index);
  if (pivot == 0.0) {
    throw std::invalid_argument("single_pairing_loss: beta is not a face of alpha");
  }
  const double col = incidence_column_norm(complex, s.degree, b, alpha.index);
  return std::abs(s.values(beta.index)) / std::abs(pivot) * col;
}

double dual_pairing_loss(const BasedChainComplex& complex, CellId alpha, CellId beta,
                         const Signal& s) {
  if (!complex.is_orthogonal_base()) {
    throw std::domain_error("dual_pairing_loss: requires an orthogonal base (diagonal W_n)");
  }
  check_signal(complex, s, "dual_pairing_loss");
  if (alpha.degree != s.degree || beta.degree != s.degree - 1) {
    throw std::invalid_argument("dual_pairing_loss: pair degrees do not bracket the signal");
  }
  if (alpha.degree < 1 || alpha.degree > complex.max_degree() || alpha.index < 0 ||
      alpha.index >= complex.dim(alpha.degree) || beta.index < 0 ||
      beta.index >= complex.dim(beta.degree)) {
    throw std::invalid_argument("dual_pairing_loss: cell out of range");
  }
  const Eigen::MatrixXd adjoint = adjoint_boundary(complex, alpha.degree);
  const double pivot = adjoint(alpha.index, beta.index);
  if (complex.boundary(alpha.degree).coeff(beta.index, alpha.index) == 0.0) {
    throw std::invalid_argument("dual_pairing_loss: beta is not a face of alpha");
  }
  const Eigen::VectorXd col = adjoint.col(beta.index);
  return std::abs(s.values(alpha.index)) / std::abs(pivot) * norm(complex, alpha.degree, col);
}

PairChoice optimal_pairing(const BasedChainComplex& complex, const Signal& s,
                           SplitMix64& rng) {
  check_signal(complex, s, "optimal_pairing");
  return select_optimal(complex, s.values.cwiseAbs(), s.degree, rng);
}

PairChoice optimal_pairing(const BasedChainComplex& complex,
                           const std::vector<const Signal*>& signals, int degree,
                           SplitMix64& rng) {
  if (signals.empty()) {
    throw std::invalid_argument("optimal_pairing: empty signal set");
  }
  Eigen::VectorXd abs_values = Eigen::VectorXd::Zero(complex.dim(degree));
  for (const Signal* s : signals) {
    if (s == nullptr || s->degree != degree) {
      throw std::invalid_argument("optimal_pairing: signal set degrees must all match");
    }
    check_signal(complex, *s, "optimal_pairing");
    abs_values += s->values.cwiseAbs();
  }
  return select_optimal(complex, abs_values, degree, rng);
}

namespace {

void remove_row(Eigen::MatrixXd& m, int r) {
  const Eigen::Index rows = m.rows() - 1;
  if (r < rows) {
    m.block(r, 0, rows - r, m.cols()) = m.block(r + 1, 0, rows - r, m.cols()).eval();
  }
  m.conservativeResize(rows, m.cols());
}

void remove_col(Eigen::MatrixXd& m, int c) {
  const Eigen::Index cols = m.cols() - 1;
  if (c < cols) {
    m.block(0, c, m.rows(), cols - c) = m.block(0, c + 1, m.rows(), cols - c).eval();
  }
  m.conservativeResize(m.rows(), cols);
}

void remove_entry(Eigen::VectorXd& v, int i) {
  const Eigen::Index size = v.size() - 1;
  if (i < size) v.segment(i, size - i) = v.segment(i + 1, size - i).eval();
  v.conservativeResize(size);
}

// Mutable dense view of a chain complex mid-reduction, carrying the composite
// retraction maps against the original complex. Each collapse costs one
// rank-one update per affected map instead of a fresh reduction.
struct ReductionState {
  int top = 0;
  std::vector<std::vector<std::string>> names;
  std::vector<Eigen::MatrixXd> boundary;  // [n] is d_n, dense; [0] unused
  std::vector<Eigen::MatrixXd> weight;    // dense, only meaningful when custom
  std::vector<char> custom;
  std::vector<Eigen::MatrixXd> psi, phi, h;

  explicit ReductionState(const BasedChainComplex& c) : top(c.max_degree()) {
    names.resize(top + 1);
    boundary.resize(top + 1);
    weight.resize(top + 1);
    custom.resize(top + 1);
    psi.resize(top + 1);
    phi.resize(top + 1);
    h.resize(top + 1);
    for (int n = 0; n <= top; ++n) {
      names[n] = c.cell_names(n);
      if (n >= 1) boundary[n] = c.boundary_dense(n);
      custom[n] = c.has_custom_weight(n) ? 1 : 0;
      if (custom[n]) weight[n] = c.weight(n);
      psi[n] = Eigen::MatrixXd::Identity(c.dim(n), c.dim(n));
      phi[n] = psi[n];
      h[n] = Eigen::MatrixXd::Zero(c.dim(n + 1), c.dim(n));
    }
  }

  int dim(int n) const {
    return (n >= 0 && n <= top) ? static_cast<int>(names[n].size()) : 0;
  }

  std::vector<int> dims() const {
    std::vector<int> out(top + 1);
    for (int n = 0; n <= top; ++n) out[n] = dim(n);
    return out;
  }

  // Collapses the pair (alpha at degree d, its face beta), folding the stage
  // maps into the composites. The homotopy picks up its increment first since
  // it reads the pre-update psi and phi.
  void collapse(int d, int alpha, int beta) {
    const Eigen::VectorXd a = boundary[d].col(alpha);
    const Eigen::RowVectorXd brow = boundary[d].row(beta);
    const double pivot = a(beta);

    h[d - 1] += (1.0 / pivot) * (phi[d].col(alpha) * psi[d - 1].row(beta));

    Eigen::VectorXd c = a / pivot;
    c(beta) = 0.0;
    psi[d - 1].noalias() -= c * psi[d - 1].row(beta);
    remove_row(psi[d - 1], beta);
    remove_row(psi[d], alpha);

    Eigen::RowVectorXd rb = brow / pivot;
    rb(alpha) = 0.0;
    phi[d].noalias() -= phi[d].col(alpha) * rb;
    remove_col(phi[d], alpha);
    remove_col(phi[d - 1], beta);

    for (int col = 0; col < boundary[d].cols(); ++col) {
      if (col == alpha || brow(col) == 0.0) continue;
      for (int row = 0; row < boundary[d].rows(); ++row) {
        if (row == beta || a(row) == 0.0) continue;
        const double corr = a(row) * brow(col) / pivot;
        double next = boundary[d](row, col) - corr;
        if (std::abs(next) <= kCancelTol * (std::abs(boundary[d](row, col)) + std::abs(corr))) {
          next = 0.0;
        }
        boundary[d](row, col) = next;
      }
    }
    remove_row(boundary[d], beta);
    remove_col(boundary[d], alpha);
    if (d + 1 <= top) remove_row(boundary[d + 1], alpha);
    if (d - 1 >= 1) remove_col(boundary[d - 1], beta);

    if (custom[d]) {
      remove_row(weight[d], alpha);
      remove_col(weight[d], alpha);
    }
    if (custom[d - 1]) {
      remove_row(weight[d - 1], beta);
      remove_col(weight[d - 1], beta);
    }
    names[d].erase(names[d].begin() + alpha);
    names[d - 1].erase(names[d - 1].begin() + beta);
  }

  BasedChainComplex to_complex() const {
    std::vector<std::vector<std::string>> cells = names;
    std::vector<Eigen::SparseMatrix<double>> boundaries(top + 1);
    std::vector<std::optional<Eigen::MatrixXd>> weights(top + 1);
    for (int n = 1; n <= top; ++n) {
      std::vector<Eigen::Triplet<double>> triplets;
      for (int col = 0; col < boundary[n].cols(); ++col) {
        for (int row = 0; row < boundary[n].rows(); ++row) {
          if (boundary[n](row, col) != 0.0) {
            triplets.emplace_back(row, col, boundary[n](row, col));
          }
        }
      }
      boundaries[n].resize(boundary[n].rows(), boundary[n].cols());
      boundaries[n].setFromTriplets(triplets.begin(), triplets.end());
    }
    for (int n = 0; n <= top; ++n) {
      if (custom[n]) weights[n] = weight[n];
    }
    return BasedChainComplex::from_parts(std::move(cells), std::move(boundaries),
                                         std::move(weights));
  }

  Retraction to_retraction(const BasedChainComplex& source) const {
    Retraction r;
    r.source = source;
    r.reduced = to_complex();
    r.psi = psi;
    r.phi = phi;
    r.h = h;
    return r;
  }
};

Trajectory run_trajectory(const BasedChainComplex& complex, const Signal& s,
                          const OptimizerConfig& config, bool optimal) {
  if (config.loss_side == OptimizerConfig::Side::dual) {
    const BasedChainComplex dual = dual_complex(complex);
    Signal flipped{complex.max_degree() - s.degree, s.values};
    OptimizerConfig primal_config = config;
    primal_config.degree = flipped.degree;
    primal_config.loss_side = OptimizerConfig::Side::primal;
    return run_trajectory(dual, flipped, primal_config, optimal);
  }

  check_signal(complex, s, "pairing trajectory");
  if (config.degree != s.degree) {
    throw std::invalid_argument("pairing trajectory: config degree does not match signal");
  }
  const int n = s.degree;

  ReductionState state(complex);
  Eigen::VectorXd current = s.values;
  Trajectory out;

  for (int k = 0; k < config.steps; ++k) {
    const BasedChainComplex reduced = state.to_complex();
    const int upper = (n + 1 <= state.top) ? state.dim(n + 1) : 0;
    bool admissible = false;
    if (upper > 0) {
      admissible = (reduced.boundary(n + 1).nonZeros() > 0);
    }
    if (!admissible) {
      out.exhausted = true;
      break;
    }

    SplitMix64 rng = step_stream(config.seed, k);
    PairChoice choice;
    if (optimal) {
      choice = optimal_pairing(reduced, Signal{n, current}, rng);
    } else {
      const Eigen::SparseMatrix<double>& b = reduced.boundary(n + 1);
      const int target = rng.pick(static_cast<int>(b.nonZeros()));
      int seen = 0;
      bool picked = false;
      for (int c = 0; c < b.outerSize() && !picked; ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(b, c); it; ++it) {
          if (seen++ == target) {
            choice.alpha = CellId{n + 1, c};
            choice.beta = CellId{n, static_cast<int>(it.row())};
            picked = true;
            break;
          }
        }
      }
      choice.loss = single_pairing_loss(reduced, choice.alpha, choice.beta,
                                        Signal{n, current});
    }

    const std::string alpha_name = state.names[n + 1][choice.alpha.index];
    const std::string beta_name = state.names[n][choice.beta.index];
    out.matching.stages.push_back(Matching{{{choice.alpha, choice.beta}}});

    Eigen::VectorXd fold = state.boundary[n + 1].col(choice.alpha.index) /
                           state.boundary[n + 1](choice.beta.index, choice.alpha.index);
    const double held = current(choice.beta.index);
    state.collapse(n + 1, choice.alpha.index, choice.beta.index);
    current -= fold * held;
    remove_entry(current, choice.beta.index);

    const Eigen::VectorXd residual = s.values - state.phi[n] * (state.psi[n] * s.values);
    LossRecord record;
    record.step = k + 1;
    record.alpha = alpha_name;
    record.beta = beta_name;
    record.loss_conditional = choice.loss;
    record.loss_total = norm(complex, n, residual);
    record.dims = state.dims();
    out.records.push_back(std::move(record));
  }

  out.retraction = state.to_retraction(complex);
  out.compressed = Signal{n, current};
  return out;
}

}  // namespace

Trajectory k_optimal_pairings(const BasedChainComplex& complex, const Signal& s,
                              const OptimizerConfig& config) {
  return run_trajectory(complex, s, config, true);
}

Trajectory random_pairings(const BasedChainComplex& complex, const Signal& s,
                           const OptimizerConfig& config) {
  return run_trajectory(complex, s, config, false);
}

BasedChainComplex dual_complex(const BasedChainComplex& complex) {
  if (!complex.is_orthogonal_base()) {
    throw std::domain_error("dual_complex: requires an orthogonal base (diagonal W_n)");
  }
  const int top = complex.max_degree();
  std::vector<std::vector<std::string>> cells(top + 1);
  std::vector<Eigen::SparseMatrix<double>> boundaries(top + 1);
  std::vector<std::optional<Eigen::MatrixXd>> weights(top + 1);
  for (int k = 0; k <= top; ++k) {
    cells[k] = complex.cell_names(top - k);
    if (complex.has_custom_weight(top - k)) weights[k] = complex.weight(top - k);
  }
  for (int k = 1; k <= top; ++k) {
    const Eigen::MatrixXd adj = adjoint_boundary(complex, top - k + 1);
    std::vector<Eigen::Triplet<double>> triplets;
    for (int col = 0; col < adj.cols(); ++col) {
      for (int row = 0; row < adj.rows(); ++row) {
        if (adj(row, col) != 0.0) triplets.emplace_back(row, col, adj(row, col));
      }
    }
    boundaries[k].resize(adj.rows(), adj.cols());
    boundaries[k].setFromTriplets(triplets.begin(), triplets.end());
  }
  return BasedChainComplex::from_parts(std::move(cells), std::move(boundaries),
                                       std::move(weights));
}

namespace {

FullReduceResult exhaustive_reduce(const BasedChainComplex& complex, int skip_degree) {
  ReductionState state(complex);
  int steps = 0;
  while (true) {
    int d = -1, alpha = -1, beta = -1;
    for (int degree = 1; degree <= state.top && d < 0; ++degree) {
      if (degree == skip_degree) continue;
      const Eigen::MatrixXd& b = state.boundary[degree];
      for (int col = 0; col < b.cols() && d < 0; ++col) {
        for (int row = 0; row < b.rows(); ++row) {
          if (b(row, col) != 0.0) {
            d = degree;
            alpha = col;
            beta = row;
            break;
          }
        }
      }
    }
    if (d < 0) break;
    state.collapse(d, alpha, beta);
    ++steps;
  }
  return {state.to_retraction(complex), steps};
}

}  // namespace

FullReduceResult full_reduce(const BasedChainComplex& complex) {
  return exhaustive_reduce(complex, -1);
}

FullReduceResult free_reduce(const BasedChainComplex& complex, int n) {
  return exhaustive_reduce(complex, n);
}

void write_trajectory_csv(std::ostream& out, const std::vector<LossRecord>& records) {
  out << "# morsepack-trajectory-v1\n";
  out << "step,alpha,beta,loss_conditional,loss_total,dims\n";
  for (const LossRecord& r : records) {
    out << r.step << ',' << r.alpha << ',' << r.beta << ','
        << nlohmann::ordered_json(r.loss_conditional).dump() << ','
        << nlohmann::ordered_json(r.loss_total).dump() << ',';
    for (std::size_t i = 0; i < r.dims.size(); ++i) {
      if (i > 0) out << ';';
      out << r.dims[i];
    }
    out << '\n';
  }
}

}  // namespace morsepack
