#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace morsepack::testing {

BasedChainComplex interval_complex() {
  ComplexBuilder b(1);
  b.add_cells(0, {"a", "b"});
  b.add_cell(1, "e");
  b.add_boundary("a", "e", -1.0);
  b.add_boundary("b", "e", 1.0);
  return b.build();
}

BasedChainComplex filled_triangle() {
  ComplexBuilder b(2);
  b.add_cells(0, {"v0", "v1", "v2"});
  b.add_cells(1, {"e01", "e02", "e12"});
  b.add_cell(2, "f");
  b.add_boundary("v0", "e01", -1.0);
  b.add_boundary("v1", "e01", 1.0);
  b.add_boundary("v0", "e02", -1.0);
  b.add_boundary("v2", "e02", 1.0);
  b.add_boundary("v1", "e12", -1.0);
  b.add_boundary("v2", "e12", 1.0);
  b.add_boundary("e12", "f", 1.0);
  b.add_boundary("e02", "f", -1.0);
  b.add_boundary("e01", "f", 1.0);
  return b.build();
}

BasedChainComplex hollow_triangle() {
  ComplexBuilder b(1);
  b.add_cells(0, {"v0", "v1", "v2"});
  b.add_cells(1, {"e01", "e02", "e12"});
  b.add_boundary("v0", "e01", -1.0);
  b.add_boundary("v1", "e01", 1.0);
  b.add_boundary("v0", "e02", -1.0);
  b.add_boundary("v2", "e02", 1.0);
  b.add_boundary("v1", "e12", -1.0);
  b.add_boundary("v2", "e12", 1.0);
  return b.build();
}

BasedChainComplex four_cycle() {
  ComplexBuilder b(1);
  b.add_cells(0, {"v0", "v1", "v2", "v3"});
  b.add_cells(1, {"e01", "e12", "e23", "e03"});
  b.add_boundary("v0", "e01", -1.0);
  b.add_boundary("v1", "e01", 1.0);
  b.add_boundary("v1", "e12", -1.0);
  b.add_boundary("v2", "e12", 1.0);
  b.add_boundary("v2", "e23", -1.0);
  b.add_boundary("v3", "e23", 1.0);
  b.add_boundary("v0", "e03", -1.0);
  b.add_boundary("v3", "e03", 1.0);
  return b.build();
}

BasedChainComplex loops_complex() {
  ComplexBuilder b(2);
  b.add_cell(0, "v");
  b.add_cells(1, {"e1", "e2"});
  b.add_cells(2, {"f", "g"});
  b.add_boundary("e1", "f", -2.0);
  b.add_boundary("e2", "f", 3.0);
  b.add_boundary("e1", "g", 1.0);
  b.add_boundary("e2", "g", 1.0);
  return b.build();
}

namespace {

BasedChainComplex with_weights(const BasedChainComplex& c,
                               std::vector<std::optional<Eigen::MatrixXd>> weights) {
  std::vector<std::vector<std::string>> cells(c.max_degree() + 1);
  std::vector<Eigen::SparseMatrix<double>> boundaries(c.max_degree() + 1);
  for (int n = 0; n <= c.max_degree(); ++n) {
    cells[n] = c.cell_names(n);
    if (n >= 1) boundaries[n] = c.boundary(n);
  }
  return BasedChainComplex::from_parts(std::move(cells), std::move(boundaries),
                                       std::move(weights));
}

}  // namespace

BasedChainComplex with_random_diagonal_weights(const BasedChainComplex& c, SplitMix64& rng) {
  std::vector<std::optional<Eigen::MatrixXd>> weights(c.max_degree() + 1);
  for (int n = 0; n <= c.max_degree(); ++n) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(c.dim(n), c.dim(n));
    for (int i = 0; i < c.dim(n); ++i) w(i, i) = 0.5 + 2.0 * rng.uniform01();
    weights[n] = w;
  }
  return with_weights(c, std::move(weights));
}

BasedChainComplex with_random_spd_weights(const BasedChainComplex& c, SplitMix64& rng) {
  std::vector<std::optional<Eigen::MatrixXd>> weights(c.max_degree() + 1);
  for (int n = 0; n <= c.max_degree(); ++n) {
    const int d = c.dim(n);
    Eigen::MatrixXd a(d, d);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) a(i, j) = 2.0 * rng.uniform01() - 1.0;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd diag(d);
    for (int i = 0; i < d; ++i) diag(i) = 0.5 + 2.0 * rng.uniform01();
    weights[n] = q * diag.asDiagonal() * q.transpose();
  }
  return with_weights(c, std::move(weights));
}

Eigen::VectorXd random_vector(int size, SplitMix64& rng) {
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = 2.0 * rng.uniform01() - 1.0;
  return v;
}

double gamma_bruteforce(const BasedChainComplex& c, const Matching& m, CellId from,
                        CellId to) {
  std::map<CellId, CellId> pair_of_upper;  // alpha -> beta
  for (const auto& [alpha, beta] : m.pairs) pair_of_upper[alpha] = beta;

  // Outgoing matched-incidence edges per cell, built straight off the
  // boundary entries.
  struct Edge {
    CellId to;
    double weight = 0.0;
  };
  std::map<CellId, std::vector<Edge>> out;
  for (int n = 1; n <= c.max_degree(); ++n) {
    const Eigen::SparseMatrix<double>& b = c.boundary(n);
    for (int col = 0; col < b.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it) {
        const CellId alpha{n, col};
        const CellId beta{n - 1, static_cast<int>(it.row())};
        const auto matched = pair_of_upper.find(alpha);
        if (matched != pair_of_upper.end() && matched->second == beta) {
          out[beta].push_back({alpha, -1.0 / it.value()});
        } else {
          out[alpha].push_back({beta, it.value()});
        }
      }
    }
  }

  double total = 0.0;
  std::function<void(CellId, double)> walk = [&](CellId at, double product) {
    if (at == to) total += product;
    for (const Edge& e : out[at]) walk(e.to, product * e.weight);
  };
  walk(from, 1.0);
  return total;
}

Matching random_matching(const BasedChainComplex& c, SplitMix64& rng, int force_down) {
  struct Candidate {
    CellId alpha, beta;
  };
  std::vector<Candidate> candidates;
  for (int n = 1; n <= c.max_degree(); ++n) {
    const Eigen::SparseMatrix<double>& b = c.boundary(n);
    for (int col = 0; col < b.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it) {
        candidates.push_back({CellId{n, col}, CellId{n - 1, static_cast<int>(it.row())}});
      }
    }
  }
  for (int i = static_cast<int>(candidates.size()) - 1; i > 0; --i) {
    std::swap(candidates[i], candidates[rng.pick(i + 1)]);
  }
  if (force_down >= 1) {
    std::stable_partition(candidates.begin(), candidates.end(),
                          [&](const Candidate& cand) { return cand.alpha.degree == force_down; });
  }

  Matching m;
  std::vector<CellId> used;
  for (const Candidate& cand : candidates) {
    if (std::find(used.begin(), used.end(), cand.alpha) != used.end() ||
        std::find(used.begin(), used.end(), cand.beta) != used.end()) {
      continue;
    }
    Matching trial = m;
    trial.pairs.push_back({cand.alpha, cand.beta});
    if (!is_morse_matching(c, trial).ok()) continue;
    m = std::move(trial);
    used.push_back(cand.alpha);
    used.push_back(cand.beta);
  }
  if (force_down >= 1) {
    const bool has = std::any_of(m.pairs.begin(), m.pairs.end(), [&](const auto& p) {
      return p.first.degree == force_down;
    });
    if (!has) throw std::runtime_error("random_matching: no pair at the forced degree");
  }
  return m;
}

std::vector<Matching> enumerate_matchings(const BasedChainComplex& c) {
  struct Candidate {
    CellId alpha, beta;
  };
  std::vector<Candidate> candidates;
  for (int n = 1; n <= c.max_degree(); ++n) {
    const Eigen::SparseMatrix<double>& b = c.boundary(n);
    for (int col = 0; col < b.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it) {
        candidates.push_back({CellId{n, col}, CellId{n - 1, static_cast<int>(it.row())}});
      }
    }
  }
  std::vector<Matching> out;
  std::function<void(std::size_t, Matching)> extend = [&](std::size_t i, Matching m) {
    if (i == candidates.size()) {
      out.push_back(std::move(m));
      return;
    }
    extend(i + 1, m);
    Matching trial = m;
    trial.pairs.push_back({candidates[i].alpha, candidates[i].beta});
    if (is_morse_matching(c, trial).ok()) extend(i + 1, std::move(trial));
  };
  extend(0, Matching{});
  return out;
}

}  // namespace morsepack::testing
