#include "morsepack/morse.hpp"

#include "morsepack/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace morsepack {

using ordered_json = nlohmann::ordered_json;

CellId MatchingGraph::unflat(int v) const {
  int degree = 0;
  while (degree + 1 < static_cast<int>(offset.size()) - 1 && offset[degree + 1] <= v) ++degree;
  return CellId{degree, v - offset[degree]};
}

int MatchingGraph::edge_count() const {
  int total = 0;
  for (const auto& edges : adjacency) total += static_cast<int>(edges.size());
  return total;
}

bool MatchingGraph::has_edge(CellId from, CellId to) const {
  const int target = flat(to);
  for (const auto& e : adjacency[flat(from)]) {
    if (e.to == target) return true;
  }
  return false;
}

namespace {

std::vector<int> degree_offsets(const BasedChainComplex& complex) {
  std::vector<int> offset(complex.max_degree() + 2, 0);
  for (int n = 0; n <= complex.max_degree(); ++n) offset[n + 1] = offset[n] + complex.dim(n);
  return offset;
}

MatchingGraph build_graph(const BasedChainComplex& complex, const Matching* m) {
  MatchingGraph g;
  g.offset = degree_offsets(complex);
  g.adjacency.assign(g.offset.back(), {});
  // -1 when unmatched; otherwise the flat id of the partner on the other side.
  std::vector<int> matched_down(g.offset.back(), -1);
  if (m != nullptr) {
    for (const auto& [alpha, beta] : m->pairs) {
      matched_down[g.flat(alpha)] = g.flat(beta);
    }
  }
  for (int n = 1; n <= complex.max_degree(); ++n) {
    const auto& b = complex.boundary(n);
    for (int c = 0; c < b.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(b, c); it; ++it) {
        const int alpha = g.offset[n] + static_cast<int>(it.col());
        const int beta = g.offset[n - 1] + static_cast<int>(it.row());
        if (matched_down[alpha] == beta) {
          g.adjacency[beta].push_back({alpha, -1.0 / it.value()});
        } else {
          g.adjacency[alpha].push_back({beta, it.value()});
        }
      }
    }
  }
  return g;
}

// Kahn's algorithm. Returns vertices in topological order, or an empty vector
// with a witness cycle (as flat ids, in order) when the graph has one.
std::vector<int> topological_order(const MatchingGraph& g, std::vector<int>* cycle) {
  const int v = g.vertex_count();
  std::vector<int> indegree(v, 0);
  for (int u = 0; u < v; ++u) {
    for (const auto& e : g.adjacency[u]) ++indegree[e.to];
  }
  std::deque<int> queue;
  for (int u = 0; u < v; ++u) {
    if (indegree[u] == 0) queue.push_back(u);
  }
  std::vector<int> order;
  order.reserve(v);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (const auto& e : g.adjacency[u]) {
      if (--indegree[e.to] == 0) queue.push_back(e.to);
    }
  }
  if (static_cast<int>(order.size()) == v) return order;
  if (cycle != nullptr) {
    // Every leftover vertex keeps an incoming edge among leftovers, so a
    // backward walk must revisit a vertex; the slice between visits is a cycle.
    std::vector<int> parent_edge(v, -1);
    for (int u = 0; u < v; ++u) {
      if (indegree[u] <= 0) continue;
      for (const auto& e : g.adjacency[u]) {
        if (indegree[e.to] > 0) parent_edge[e.to] = u;
      }
    }
    int start = 0;
    while (start < v && indegree[start] <= 0) ++start;
    std::vector<int> seen(v, -1);
    std::vector<int> walk;
    int u = start;
    while (seen[u] < 0) {
      seen[u] = static_cast<int>(walk.size());
      walk.push_back(u);
      u = parent_edge[u];
    }
    cycle->assign(walk.begin() + seen[u], walk.end());
    std::reverse(cycle->begin(), cycle->end());  // backward walk, so reverse to edge order
  }
  return {};
}

struct ResolvedMatching {
  std::vector<int> partner;   // flat id -> flat id of partner, -1 if critical
  std::vector<bool> matched;  // flat id -> participates in a pair
};

ResolvedMatching resolve(const MatchingGraph& g, const Matching& m) {
  ResolvedMatching r;
  r.partner.assign(g.vertex_count(), -1);
  r.matched.assign(g.vertex_count(), false);
  for (const auto& [alpha, beta] : m.pairs) {
    const int a = g.flat(alpha), b = g.flat(beta);
    r.partner[a] = b;
    r.partner[b] = a;
    r.matched[a] = r.matched[b] = true;
  }
  return r;
}

// Path-sum column from a single source over a topologically ordered graph.
void path_sums_from(const MatchingGraph& g, const std::vector<int>& order,
                    const std::vector<int>& position, int source, Eigen::VectorXd& out) {
  out.setZero(g.vertex_count());
  out[source] = 1.0;
  for (int p = position[source]; p < static_cast<int>(order.size()); ++p) {
    const int u = order[p];
    const double gu = out[u];
    if (gu == 0.0) continue;
    for (const auto& e : g.adjacency[u]) out[e.to] += gu * e.weight;
  }
}

}  // namespace

MatchingGraph matching_graph(const BasedChainComplex& complex) {
  return build_graph(complex, nullptr);
}

MatchingGraph matching_graph(const BasedChainComplex& complex, const Matching& m) {
  return build_graph(complex, &m);
}

ValidationReport is_morse_matching(const BasedChainComplex& complex, const Matching& m) {
  ValidationReport report;
  const auto offsets = degree_offsets(complex);
  std::vector<int> uses(offsets.back(), 0);
  bool structurally_sound = true;
  for (const auto& [alpha, beta] : m.pairs) {
    const bool alpha_ok = alpha.degree >= 0 && alpha.degree <= complex.max_degree() &&
                          alpha.index >= 0 && alpha.index < complex.dim(alpha.degree);
    const bool beta_ok = beta.degree >= 0 && beta.degree <= complex.max_degree() &&
                         beta.index >= 0 && beta.index < complex.dim(beta.degree);
    if (!alpha_ok || !beta_ok) {
      report.violations.push_back({"unknown-cell",
                                   "pair (" + std::to_string(alpha.degree) + ":" +
                                       std::to_string(alpha.index) + ", " +
                                       std::to_string(beta.degree) + ":" +
                                       std::to_string(beta.index) + ")",
                                   0.0});
      structurally_sound = false;
      continue;
    }
    const std::string loc =
        "(" + complex.cell_name(alpha) + ", " + complex.cell_name(beta) + ")";
    if (alpha.degree != beta.degree + 1) {
      report.violations.push_back({"degree-mismatch", loc, 0.0});
      structurally_sound = false;
      continue;
    }
    const double coeff = complex.boundary(alpha.degree).coeff(beta.index, alpha.index);
    if (coeff == 0.0) {
      report.violations.push_back({"non-invertible-pair", loc, 0.0});
      structurally_sound = false;
    }
    for (const CellId cell : {alpha, beta}) {
      if (++uses[offsets[cell.degree] + cell.index] == 2) {
        report.violations.push_back({"disjoint-pairs", complex.cell_name(cell), 0.0});
        structurally_sound = false;
      }
    }
  }
  if (structurally_sound) {
    const MatchingGraph g = matching_graph(complex, m);
    std::vector<int> cycle;
    if (topological_order(g, &cycle).empty() && g.vertex_count() > 0) {
      std::string loc;
      for (const int v : cycle) {
        loc += complex.cell_name(g.unflat(v)) + " -> ";
      }
      loc += complex.cell_name(g.unflat(cycle.front()));
      report.violations.push_back({"acyclic", loc, 0.0});
    }
  }
  return report;
}

namespace {

void require_valid(const BasedChainComplex& complex, const Matching& m, const char* who) {
  const ValidationReport report = is_morse_matching(complex, m);
  if (!report.ok()) {
    throw std::invalid_argument(std::string(who) + ": invalid matching: " + report.summary());
  }
}

}  // namespace

double summed_index(const BasedChainComplex& complex, const Matching& m, CellId alpha,
                    CellId beta) {
  if (alpha.degree < 0 || alpha.degree > complex.max_degree() || alpha.index < 0 ||
      alpha.index >= complex.dim(alpha.degree) || beta.degree < 0 ||
      beta.degree > complex.max_degree() || beta.index < 0 ||
      beta.index >= complex.dim(beta.degree)) {
    throw std::invalid_argument("summed_index: cell out of range");
  }
  require_valid(complex, m, "summed_index");
  const MatchingGraph g = matching_graph(complex, m);
  const std::vector<int> order = topological_order(g, nullptr);
  std::vector<int> position(g.vertex_count());
  for (int p = 0; p < static_cast<int>(order.size()); ++p) position[order[p]] = p;
  Eigen::VectorXd sums;
  path_sums_from(g, order, position, g.flat(alpha), sums);
  return sums[g.flat(beta)];
}

double RetractionResiduals::max() const {
  return std::max(std::max(chain_psi, chain_phi), std::max(psi_phi_identity, homotopy));
}

RetractionResiduals retraction_residuals(const Retraction& r) {
  RetractionResiduals out;
  const int top = r.source.max_degree();
  for (int n = 0; n <= top; ++n) {
    if (n >= 1) {
      out.chain_psi = std::max(
          out.chain_psi, relative_residual(r.psi[n - 1] * r.source.boundary_dense(n),
                                           r.reduced.boundary_dense(n) * r.psi[n]));
      out.chain_phi = std::max(
          out.chain_phi, relative_residual(r.phi[n - 1] * r.reduced.boundary_dense(n),
                                           r.source.boundary_dense(n) * r.phi[n]));
    }
    out.psi_phi_identity = std::max(out.psi_phi_identity, identity_residual(r.psi[n] * r.phi[n]));
    Eigen::MatrixXd lhs = r.source.boundary_dense(n + 1) * r.h[n];
    if (n >= 1) lhs += r.h[n - 1] * r.source.boundary_dense(n);
    const Eigen::MatrixXd rhs =
        Eigen::MatrixXd::Identity(r.source.dim(n), r.source.dim(n)) - r.phi[n] * r.psi[n];
    out.homotopy = std::max(out.homotopy, relative_residual(lhs, rhs));
  }
  return out;
}

namespace {

BasedChainComplex restrict_to_critical(const BasedChainComplex& complex,
                                       const std::vector<std::vector<int>>& critical,
                                       const std::vector<Eigen::MatrixXd>& reduced_boundary) {
  const int top = complex.max_degree();
  std::vector<std::vector<std::string>> names(top + 1);
  std::vector<Eigen::SparseMatrix<double>> boundaries(top + 1);
  std::vector<std::optional<Eigen::MatrixXd>> weights(top + 1);
  for (int n = 0; n <= top; ++n) {
    for (const int i : critical[n]) names[n].push_back(complex.cell_names(n)[i]);
    if (complex.has_custom_weight(n)) {
      const Eigen::MatrixXd& w = complex.weight(n);
      Eigen::MatrixXd sub(critical[n].size(), critical[n].size());
      for (size_t r = 0; r < critical[n].size(); ++r) {
        for (size_t c = 0; c < critical[n].size(); ++c) {
          sub(r, c) = w(critical[n][r], critical[n][c]);
        }
      }
      weights[n] = std::move(sub);
    }
  }
  for (int n = 1; n <= top; ++n) {
    std::vector<Eigen::Triplet<double>> triplets;
    const Eigen::MatrixXd& b = reduced_boundary[n];
    for (int c = 0; c < b.cols(); ++c) {
      for (int r = 0; r < b.rows(); ++r) {
        if (b(r, c) != 0.0) triplets.emplace_back(r, c, b(r, c));
      }
    }
    boundaries[n].resize(b.rows(), b.cols());
    boundaries[n].setFromTriplets(triplets.begin(), triplets.end());
  }
  return BasedChainComplex::from_parts(std::move(names), std::move(boundaries),
                                       std::move(weights));
}

}  // namespace

Retraction reduce(const BasedChainComplex& complex, const Matching& m) {
  require_valid(complex, m, "reduce");
  const int top = complex.max_degree();
  const MatchingGraph g = matching_graph(complex, m);
  const ResolvedMatching resolved = resolve(g, m);
  const std::vector<int> order = topological_order(g, nullptr);
  std::vector<int> position(g.vertex_count());
  for (int p = 0; p < static_cast<int>(order.size()); ++p) position[order[p]] = p;

  std::vector<std::vector<int>> critical(top + 1);
  std::vector<std::vector<int>> critical_pos(top + 1);  // cell index -> row in reduced degree
  for (int n = 0; n <= top; ++n) {
    critical_pos[n].assign(complex.dim(n), -1);
    for (int i = 0; i < complex.dim(n); ++i) {
      if (!resolved.matched[g.offset[n] + i]) {
        critical_pos[n][i] = static_cast<int>(critical[n].size());
        critical[n].push_back(i);
      }
    }
  }

  Retraction r;
  r.psi.resize(top + 1);
  r.phi.resize(top + 1);
  r.h.resize(top + 1);
  std::vector<Eigen::MatrixXd> reduced_boundary(top + 1);
  for (int n = 0; n <= top; ++n) {
    r.psi[n].setZero(critical[n].size(), complex.dim(n));
    r.phi[n].setZero(complex.dim(n), critical[n].size());
    r.h[n].setZero(complex.dim(n + 1), complex.dim(n));
    if (n >= 1) reduced_boundary[n].setZero(critical[n - 1].size(), critical[n].size());
  }

  // One dynamic-programming pass per source cell yields the summed indices to
  // every target at once; scatter them into the map the target degree needs.
  Eigen::VectorXd sums;
  for (int n = 0; n <= top; ++n) {
    for (int i = 0; i < complex.dim(n); ++i) {
      path_sums_from(g, order, position, g.offset[n] + i, sums);
      for (int j = 0; j < complex.dim(n); ++j) {
        const int jc = critical_pos[n][j];
        if (jc >= 0) r.psi[n](jc, i) = sums[g.offset[n] + j];
      }
      for (int j = 0; j < complex.dim(n + 1); ++j) {
        // Stored homotopy is the negated path sum so that d h + h d = 1 - phi psi.
        r.h[n](j, i) = -sums[g.offset[n + 1] + j];
      }
      const int ic = critical_pos[n][i];
      if (ic >= 0) {
        for (int j = 0; j < complex.dim(n); ++j) r.phi[n](j, ic) = sums[g.offset[n] + j];
        if (n >= 1) {
          for (const int j : critical[n - 1]) {
            reduced_boundary[n](critical_pos[n - 1][j], ic) = sums[g.offset[n - 1] + j];
          }
        }
      }
    }
  }

  r.source = complex;
  r.reduced = restrict_to_critical(complex, critical, reduced_boundary);
  return r;
}

Retraction single_pairing_reduce(const BasedChainComplex& complex, CellId alpha, CellId beta) {
  Matching m;
  m.pairs.push_back({alpha, beta});
  require_valid(complex, m, "single_pairing_reduce");
  const int top = complex.max_degree();
  const int d = alpha.degree;
  const double pivot = complex.boundary(d).coeff(beta.index, alpha.index);

  std::vector<std::vector<int>> critical(top + 1);
  std::vector<std::vector<int>> critical_pos(top + 1);
  for (int n = 0; n <= top; ++n) {
    critical_pos[n].assign(complex.dim(n), -1);
    for (int i = 0; i < complex.dim(n); ++i) {
      if ((n == d && i == alpha.index) || (n == d - 1 && i == beta.index)) continue;
      critical_pos[n][i] = static_cast<int>(critical[n].size());
      critical[n].push_back(i);
    }
  }

  Retraction r;
  r.psi.resize(top + 1);
  r.phi.resize(top + 1);
  r.h.resize(top + 1);
  std::vector<Eigen::MatrixXd> reduced_boundary(top + 1);
  for (int n = 0; n <= top; ++n) {
    const int dim = complex.dim(n);
    const int crit = static_cast<int>(critical[n].size());
    r.psi[n].setZero(crit, dim);
    r.phi[n].setZero(dim, crit);
    for (int i = 0; i < dim; ++i) {
      const int ic = critical_pos[n][i];
      if (ic >= 0) {
        r.psi[n](ic, i) = 1.0;
        r.phi[n](i, ic) = 1.0;
      }
    }
    r.h[n].setZero(complex.dim(n + 1), dim);
    if (n >= 1) {
      reduced_boundary[n].setZero(critical[n - 1].size(), critical[n].size());
      const Eigen::MatrixXd b = complex.boundary_dense(n);
      for (const int c : critical[n]) {
        for (const int row : critical[n - 1]) {
          reduced_boundary[n](critical_pos[n - 1][row], critical_pos[n][c]) = b(row, c);
        }
      }
    }
  }

  const Eigen::MatrixXd bd = complex.boundary_dense(d);
  // psi at degree d-1: the beta column routes through alpha to its other faces.
  for (int t = 0; t < complex.dim(d - 1); ++t) {
    const int tc = critical_pos[d - 1][t];
    if (tc >= 0) r.psi[d - 1](tc, beta.index) = -bd(t, alpha.index) / pivot;
  }
  // phi at degree d: critical cells shed their beta-component along alpha.
  for (int e = 0; e < complex.dim(d); ++e) {
    const int ec = critical_pos[d][e];
    if (ec >= 0) r.phi[d](alpha.index, ec) = -bd(beta.index, e) / pivot;
  }
  // Stored homotopy carries the 1 - phi psi sign convention.
  r.h[d - 1](alpha.index, beta.index) = 1.0 / pivot;
  // Corrected boundary at degree d over the surviving cells.
  for (const int c : critical[d]) {
    if (bd(beta.index, c) == 0.0) continue;
    for (const int row : critical[d - 1]) {
      if (bd(row, alpha.index) == 0.0) continue;
      reduced_boundary[d](critical_pos[d - 1][row], critical_pos[d][c]) -=
          bd(row, alpha.index) * bd(beta.index, c) / pivot;
    }
  }

  r.source = complex;
  r.reduced = restrict_to_critical(complex, critical, reduced_boundary);
  return r;
}

namespace {

Retraction identity_retraction(const BasedChainComplex& complex) {
  Retraction r;
  r.source = complex;
  r.reduced = complex;
  const int top = complex.max_degree();
  r.psi.resize(top + 1);
  r.phi.resize(top + 1);
  r.h.resize(top + 1);
  for (int n = 0; n <= top; ++n) {
    r.psi[n] = Eigen::MatrixXd::Identity(complex.dim(n), complex.dim(n));
    r.phi[n] = r.psi[n];
    r.h[n] = Eigen::MatrixXd::Zero(complex.dim(n + 1), complex.dim(n));
  }
  return r;
}

// Replaces acc by its composition with a further reduction of acc.reduced.
void absorb_stage(Retraction& acc, const Retraction& stage) {
  const int top = acc.source.max_degree();
  // Homotopies compose as h + phi h_stage psi, with the pre-stage maps; at the
  // top degree both sides have zero rows, so there is nothing to add.
  for (int n = 0; n < top; ++n) {
    acc.h[n] += acc.phi[n + 1] * stage.h[n] * acc.psi[n];
  }
  for (int n = 0; n <= top; ++n) {
    acc.psi[n] = stage.psi[n] * acc.psi[n];
    acc.phi[n] = acc.phi[n] * stage.phi[n];
  }
  acc.reduced = stage.reduced;
}

}  // namespace

Retraction sequential_reduce(const BasedChainComplex& complex, const SequentialMatching& m) {
  Retraction acc = identity_retraction(complex);
  for (size_t j = 0; j < m.stages.size(); ++j) {
    Retraction stage;
    try {
      stage = reduce(acc.reduced, m.stages[j]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sequential_reduce: stage " + std::to_string(j + 1) + ": " +
                                  e.what());
    }
    absorb_stage(acc, stage);
  }
  return acc;
}

AdjointRetraction adjoint_maps(const Retraction& r) {
  AdjointRetraction a;
  const int top = r.source.max_degree();
  a.psi_dagger.resize(top + 1);
  a.phi_dagger.resize(top + 1);
  a.h_dagger.resize(top + 1);
  for (int n = 0; n <= top; ++n) {
    const Eigen::MatrixXd& w = r.source.weight(n);
    const Eigen::MatrixXd& wm = r.reduced.weight(n);
    a.psi_dagger[n] = w.llt().solve(r.psi[n].transpose() * wm);
    a.phi_dagger[n] = wm.llt().solve(r.phi[n].transpose() * w);
    if (n + 1 <= top) {
      a.h_dagger[n] = w.llt().solve(r.h[n].transpose() * r.source.weight(n + 1));
    } else {
      a.h_dagger[n] = Eigen::MatrixXd::Zero(r.source.dim(n), 0);
    }
  }
  return a;
}

AdjointRetraction adjoint_retraction(const BasedChainComplex& complex, const Matching& m) {
  if (!complex.is_orthogonal_base()) {
    throw std::domain_error(
        "adjoint_retraction: adjoint path sums need an orthogonal base (all W_n diagonal)");
  }
  return adjoint_maps(reduce(complex, m));
}

Matching parse_matching(const BasedChainComplex& complex, std::istream& in,
                        const std::string& context) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(context + ": JSON parse error: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("pairs") || !doc["pairs"].is_array()) {
    throw std::runtime_error(context + ": expected an object with a 'pairs' array");
  }
  Matching m;
  for (const auto& pair : doc["pairs"]) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
      throw std::runtime_error(context + ": 'pairs' entries must be [alpha_name, beta_name]");
    }
    const auto alpha = complex.find_cell(pair[0].get<std::string>());
    const auto beta = complex.find_cell(pair[1].get<std::string>());
    if (!alpha) {
      throw std::runtime_error(context + ": unknown cell '" + pair[0].get<std::string>() + "'");
    }
    if (!beta) {
      throw std::runtime_error(context + ": unknown cell '" + pair[1].get<std::string>() + "'");
    }
    m.pairs.push_back({*alpha, *beta});
  }
  return m;
}

Matching load_matching(const BasedChainComplex& complex, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  return parse_matching(complex, in, path);
}

void save_matching(const BasedChainComplex& complex, const Matching& m, std::ostream& out) {
  ordered_json doc;
  ordered_json pairs = ordered_json::array();
  for (const auto& [alpha, beta] : m.pairs) {
    pairs.push_back({complex.cell_name(alpha), complex.cell_name(beta)});
  }
  doc["pairs"] = std::move(pairs);
  out << doc.dump(2) << "\n";
}

void save_matching(const BasedChainComplex& complex, const Matching& m,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  save_matching(complex, m, out);
}

namespace {

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void save_retraction(const Retraction& r, std::ostream& out) {
  ordered_json doc;
  doc["max_degree"] = r.source.max_degree();
  ordered_json cells = ordered_json::object(), critical = ordered_json::object();
  for (int n = 0; n <= r.source.max_degree(); ++n) {
    cells[std::to_string(n)] = r.source.cell_names(n);
    critical[std::to_string(n)] = r.reduced.cell_names(n);
  }
  doc["cells"] = std::move(cells);
  doc["critical"] = std::move(critical);
  ordered_json psi = ordered_json::object(), phi = ordered_json::object(),
               h = ordered_json::object();
  for (int n = 0; n <= r.source.max_degree(); ++n) {
    psi[std::to_string(n)] = matrix_to_json(r.psi[n]);
    phi[std::to_string(n)] = matrix_to_json(r.phi[n]);
    h[std::to_string(n)] = matrix_to_json(r.h[n]);
  }
  doc["psi"] = std::move(psi);
  doc["phi"] = std::move(phi);
  doc["h"] = std::move(h);
  out << doc.dump(2) << "\n";
}

void save_retraction(const Retraction& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  save_retraction(r, out);
}

}  // namespace morsepack
