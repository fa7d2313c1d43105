#pragma once

#include "morsepack/cell_complex.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace morsepack {

// A set of (alpha, beta) pairs with deg(alpha) = deg(beta) + 1. Indices refer
// to the complex the matching applies to.
struct Matching {
  std::vector<std::pair<CellId, CellId>> pairs;
  bool empty() const { return pairs.empty(); }
  int size() const { return static_cast<int>(pairs.size()); }
};

// Stage j applies to the reduced complex produced by stages 1..j-1. Cell
// degrees are stable across stages; indices are stage-local.
struct SequentialMatching {
  std::vector<Matching> stages;
};

// Directed graph over all cells: one vertex per cell (flat ids group degrees
// in ascending order), an edge alpha -> beta for every stored nonzero
// d_{beta,alpha}, with matched edges reversed and reweighted for path sums.
struct MatchingGraph {
  struct Edge {
    int to;
    double weight;  // d_{beta,alpha} forward, -1/d_{beta,alpha} reversed
  };
  std::vector<int> offset;                 // per degree, plus total at the end
  std::vector<std::vector<Edge>> adjacency;

  int vertex_count() const { return offset.back(); }
  int flat(CellId id) const { return offset[id.degree] + id.index; }
  CellId unflat(int v) const;
  int edge_count() const;
  bool has_edge(CellId from, CellId to) const;
};

MatchingGraph matching_graph(const BasedChainComplex& complex);
MatchingGraph matching_graph(const BasedChainComplex& complex, const Matching& m);

// Checks the three matching conditions: pairwise-disjoint pairs over existing
// cells of adjacent degrees, invertible pair coefficients (stored
// d_{beta,alpha} nonzero), and acyclicity of the reversed-edge graph. A cycle
// is reported as "a -> b -> ... -> a" in the violation location.
ValidationReport is_morse_matching(const BasedChainComplex& complex, const Matching& m);

// Sum of path indices from alpha to beta in the reversed-edge graph, computed
// by dynamic programming in topological order. Identity (1) when alpha ==
// beta, 0 when no path exists. Throws std::invalid_argument on an invalid
// matching or unknown cells.
double summed_index(const BasedChainComplex& complex, const Matching& m, CellId alpha,
                    CellId beta);

// Chain equivalence between a complex and its reduction: psi[n] compresses
// (dim^M(n) x dim(n)), phi[n] reconstructs (dim(n) x dim^M(n)), h[n] is the
// homotopy into degree n+1 (dim(n+1) x dim(n)), with d h + h d = 1 - phi psi.
struct Retraction {
  BasedChainComplex source;
  BasedChainComplex reduced;
  std::vector<Eigen::MatrixXd> psi, phi, h;
};

// Largest relative residuals of the retraction identities.
struct RetractionResiduals {
  double chain_psi = 0.0;       // psi d - d^M psi
  double chain_phi = 0.0;       // phi d^M - d phi
  double psi_phi_identity = 0.0;  // psi phi - 1
  double homotopy = 0.0;        // d h + h d - (1 - phi psi)
  double max() const;
};
RetractionResiduals retraction_residuals(const Retraction& r);

// Reduction along a Morse matching. Critical cells keep their names and
// relative order; the reduced boundary and all maps are summed path indices;
// reduced inner products are restrictions of W_n to critical coordinates.
// Throws std::invalid_argument when the matching is invalid.
Retraction reduce(const BasedChainComplex& complex, const Matching& m);

// Closed form for a single (d, d-1) pair, agreeing with reduce() entrywise.
Retraction single_pairing_reduce(const BasedChainComplex& complex, CellId alpha, CellId beta);

// Runs the stages in order and composes the equivalences; the homotopy
// accumulates as h + phi h_stage psi at each stage.
Retraction sequential_reduce(const BasedChainComplex& complex, const SequentialMatching& m);

// W-adjoints of the retraction maps. psi_dagger[n] reconstructs
// (dim(n) x dim^M(n)), phi_dagger[n] compresses, h_dagger[n] maps degree n+1
// to n; d^dagger h^dagger + h^dagger d^dagger = 1 - psi^dagger phi^dagger.
struct AdjointRetraction {
  std::vector<Eigen::MatrixXd> psi_dagger, phi_dagger, h_dagger;
};
AdjointRetraction adjoint_maps(const Retraction& r);

// Requires an orthogonal base (all W_n diagonal); throws std::domain_error
// otherwise, since componentwise adjoint path sums need orthogonal cell lines.
AdjointRetraction adjoint_retraction(const BasedChainComplex& complex, const Matching& m);

// JSON: { "pairs": [[alpha_name, beta_name], ...] }.
Matching parse_matching(const BasedChainComplex& complex, std::istream& in,
                        const std::string& context = "<stream>");
Matching load_matching(const BasedChainComplex& complex, const std::string& path);
void save_matching(const BasedChainComplex& complex, const Matching& m, std::ostream& out);
void save_matching(const BasedChainComplex& complex, const Matching& m,
                   const std::string& path);

// Dense export of a retraction (cells, critical cells, psi/phi/h per degree).
void save_retraction(const Retraction& r, std::ostream& out);
void save_retraction(const Retraction& r, const std::string& path);

}  // namespace morsepack
