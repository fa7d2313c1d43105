#pragma once

#include "morsepack/cell_complex.hpp"
#include "morsepack/hodge.hpp"
#include "morsepack/morse.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace morsepack {

// A deformation retract of arbitrary provenance: psi phi = 1 on the reduced
// complex, both maps are chain maps, and phi psi is idempotent. The homotopy
// is optional.
struct DeformationRetract {
  BasedChainComplex source;
  BasedChainComplex reduced;
  std::vector<Eigen::MatrixXd> psi, phi;
  std::optional<std::vector<Eigen::MatrixXd>> h;

  static DeformationRetract from(const Retraction& r);
};

// Residual checks of the retract conditions.
ValidationReport check_retract(const DeformationRetract& r);

// The splitting C = Ker psi (+) Im phi as chain subcomplexes. Columns are
// orthonormal bases in standard coordinates; boundary_residual bounds how far
// d maps each subspace outside itself.
struct RetractSplitting {
  std::vector<Eigen::MatrixXd> ker_psi, im_phi;  // per degree
  double boundary_residual = 0.0;
};
RetractSplitting split_retract(const DeformationRetract& r);

// Per-degree pairing census: up[n] cells paired with degree n+1, down[n]
// cells paired with degree n-1, critical[n] unpaired.
struct PairCountTable {
  std::vector<int> up, down, critical;
  friend bool operator==(const PairCountTable&, const PairCountTable&) = default;
};

// Morse data equivalent to a retract: the Hodge pairing on Ker psi (acyclic,
// so every Hodge base vector is paired) together with the trivially unpaired
// base of Im phi. morse_complex is the source rebased to that combined base,
// matching pairs the Ker psi Hodge vectors, and phi_psi[n] is the reduction's
// phi psi mapped back to cell coordinates, which reproduces the input's
// phi psi up to operator_residual.
struct Morsification {
  BasedChainComplex source;
  RetractSplitting splitting;
  BasedChainComplex morse_complex;
  Matching matching;
  std::vector<Eigen::MatrixXd> base;     // per degree: columns = paired | critical
  std::vector<int> paired_dim;           // per degree, number of paired base columns
  PairCountTable counts;
  std::vector<Eigen::MatrixXd> phi_psi;  // per degree, on the source complex
  double operator_residual = 0.0;        // vs the input's phi psi, relative Frobenius
  double orthogonality_defect = 0.0;     // W-norm of Proj_{Im phi} restricted to Ker psi
};

// Throws std::invalid_argument when the retract conditions fail beyond
// tolerance or Ker psi is not acyclic.
Morsification morsify(const DeformationRetract& r);

// Assembles 1 - phi psi as the sum of inclusion-projection factors over the
// paired Morsification base, per degree on the source complex.
std::vector<Eigen::MatrixXd> reconstruction_operator(const Morsification& m);

PairCountTable pair_counts(const BasedChainComplex& complex, const Matching& m);
PairCountTable pair_counts(const BasedChainComplex& complex, const SequentialMatching& m);
PairCountTable pair_counts(const Morsification& m);

// True when no cell of degree n is paired downward.
bool is_free(const BasedChainComplex& complex, const Matching& m, int n);
bool is_free(const BasedChainComplex& complex, const SequentialMatching& m, int n);
bool is_free(const Morsification& m, int n);

// JSON summary: pair-count table, subspace dimensions, residuals.
void save_morsification_report(const Morsification& m, std::ostream& out);
void save_morsification_report(const Morsification& m, const std::string& path);

}  // namespace morsepack
