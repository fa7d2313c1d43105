#pragma once

#include "morsepack/cell_complex.hpp"
#include "morsepack/morse.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace morsepack {

// Deterministic 64-bit generator (SplitMix64). Streams are cheap to fork:
// step k of a run seeded s draws from SplitMix64(s + (k+1) * GOLDEN). Optimal
// pair selection consumes exactly two draws per step (cell, then face) and
// random selection exactly one, so replays are draw-for-draw reproducible.
struct SplitMix64 {
  static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ull;
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += GOLDEN);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1) with 53 significant bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // Uniform in [0, count); modulo bias is negligible at desk scale.
  int pick(int count) { return static_cast<int>(next() % static_cast<std::uint64_t>(count)); }
};

inline SplitMix64 step_stream(std::uint64_t seed, int step) {
  return SplitMix64(seed + static_cast<std::uint64_t>(step + 1) * SplitMix64::GOLDEN);
}

// || s - phi psi s ||_{W_n} for degree-preserving maps given at s's degree.
double topological_loss(const BasedChainComplex& complex, const Eigen::MatrixXd& psi,
                        const Eigen::MatrixXd& phi, const Signal& s);

// Loss of collapsing the single pair (alpha, beta), beta a face of alpha at
// s's degree: |s_beta| / |d_{beta,alpha}| * ||d(alpha)||. Matches the matrix
// evaluation of || s - phi psi s || to full precision.
double single_pairing_loss(const BasedChainComplex& complex, CellId alpha, CellId beta,
                           const Signal& s);

// Dual-side loss for s one degree above beta, the primal formula mirrored in
// the adjoint complex: |s_alpha| / |d^dagger_{alpha,beta}| * ||d^dagger(beta)||.
// Matches || s - psi^dagger phi^dagger s || to full precision. Requires an
// orthogonal base; throws std::domain_error otherwise.
double dual_pairing_loss(const BasedChainComplex& complex, CellId alpha, CellId beta,
                         const Signal& s);

struct PairChoice {
  CellId alpha, beta;
  double loss = 0.0;
};

// One step of loss-minimizing pair selection for a degree-n signal: scores
// every incidence (tau, xi) with xi a face of tau, |s_xi| / |d_{xi,tau}| *
// ||d(tau)||, and returns a uniformly tie-broken argmin. For a signal set the
// per-face scores are summed before the argmin. Throws std::runtime_error
// when d_{n+1} = 0 (no admissible pairing).
PairChoice optimal_pairing(const BasedChainComplex& complex, const Signal& s, SplitMix64& rng);
PairChoice optimal_pairing(const BasedChainComplex& complex,
                           const std::vector<const Signal*>& signals, int degree,
                           SplitMix64& rng);

struct LossRecord {
  int step = 0;
  std::string alpha, beta;
  double loss_conditional = 0.0;  // stage loss on the current compressed signal
  double loss_total = 0.0;        // || s - phi psi s || on the original complex
  std::vector<int> dims;          // reduced dimensions per degree after the step
};

struct OptimizerConfig {
  int degree = 1;             // signals live in C_degree; pairs collapse degree+1 cells
  int steps = 0;              // requested number of pairings
  std::uint64_t seed = 0;
  enum class Side { primal, dual } loss_side = Side::primal;
};

struct Trajectory {
  Retraction retraction;       // composite over all performed steps
  SequentialMatching matching; // one single-pair stage per step
  Signal compressed;
  std::vector<LossRecord> records;
  bool exhausted = false;      // stopped early with no admissible pairing
};

// Algorithm: repeat steps times { choose a pair, reduce by it, compress s }.
// k_optimal_pairings selects with optimal_pairing; random_pairings selects
// uniformly among all admissible incidences. Dual-side configs run the primal
// machinery on the degree-reversed adjoint complex (orthogonal bases only).
Trajectory k_optimal_pairings(const BasedChainComplex& complex, const Signal& s,
                              const OptimizerConfig& config);
Trajectory random_pairings(const BasedChainComplex& complex, const Signal& s,
                           const OptimizerConfig& config);

// The complex with degrees reversed and boundaries replaced by adjoints,
// turning cochain data into chain data. Requires an orthogonal base.
BasedChainComplex dual_complex(const BasedChainComplex& complex);

struct FullReduceResult {
  Retraction retraction;
  int steps = 0;
};

// Exhaustive single-pair reduction until every boundary vanishes; pairs are
// chosen lowest degree first, then by cell index. The step count always
// equals half the total dimension drop to homology.
FullReduceResult full_reduce(const BasedChainComplex& complex);

// Same, but skipping degree (n, n-1) pairs, so the matching stays n-free;
// converges to a complex whose only nonzero boundary is d_n.
FullReduceResult free_reduce(const BasedChainComplex& complex, int n);

// CSV schema: # morsepack-trajectory-v1
// step,alpha,beta,loss_conditional,loss_total,dims
void write_trajectory_csv(std::ostream& out, const std::vector<LossRecord>& records);

}  // namespace morsepack
