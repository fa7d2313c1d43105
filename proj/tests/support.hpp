#pragma once

#include "morsepack/cell_complex.hpp"
#include "morsepack/morse.hpp"
#include "morsepack/optimize.hpp"

#include <string>
#include <vector>

namespace morsepack::testing {

// Hand-built fixtures. Cell order is fixed and tests rely on it.
BasedChainComplex interval_complex();   // a, b / e with de = b - a
BasedChainComplex filled_triangle();    // v0..v2 / e01, e02, e12 / f, df = e12 - e02 + e01
BasedChainComplex hollow_triangle();
BasedChainComplex four_cycle();         // v0..v3 / e01, e12, e23, e03
BasedChainComplex loops_complex();      // one vertex, two loops, df = -2e1 + 3e2, dg = e1 + e2

// The same complex with fresh weights on every degree.
BasedChainComplex with_random_diagonal_weights(const BasedChainComplex& c, SplitMix64& rng);
BasedChainComplex with_random_spd_weights(const BasedChainComplex& c, SplitMix64& rng);

// Entries uniform in [-1, 1).
Eigen::VectorXd random_vector(int size, SplitMix64& rng);

// Independent path-sum oracle: enumerates every directed path of the matched
// incidence graph by depth-first search and sums the coefficient products.
double gamma_bruteforce(const BasedChainComplex& c, const Matching& m, CellId from, CellId to);

// Greedy random matching: shuffles admissible incidences and keeps pairs that
// stay disjoint and acyclic. When force_down >= 1, the first accepted pair
// collapses a force_down cell onto a face.
Matching random_matching(const BasedChainComplex& c, SplitMix64& rng, int force_down = -1);

// Every valid matching of a small complex, the empty one included.
std::vector<Matching> enumerate_matchings(const BasedChainComplex& c);

}  // namespace morsepack::testing
