#pragma once

#include "morsepack/cell_complex.hpp"
#include "morsepack/morse.hpp"
#include "morsepack/optimize.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace morsepack {

// Triangulated unit-square grid: (rows+1) x (cols+1) vertices, every lattice
// cell split along its ascending diagonal. Vertex r_c sits at (c/cols, r/rows)
// plus a deterministic per-coordinate jitter in [-0.3/max(rows,cols),
// +0.3/max(rows,cols)]; jitter_seed 0 keeps coordinates exactly on the
// lattice. Simplex orientations follow ascending vertex ids.
struct GridComplex {
  BasedChainComplex complex;
  std::vector<std::array<double, 2>> coords;  // per vertex
};
GridComplex generate_grid_complex(int rows, int cols, std::uint64_t jitter_seed);

enum class SignalKind { uniform, normal, height, radial };
SignalKind parse_signal_kind(const std::string& name);
std::string signal_kind_name(SignalKind kind);

// Edge signal on a grid. uniform draws each value in [0, 1); normal draws
// from N(mean, sd^2) via Box-Muller; height is the mean vertex height of the
// edge; radial is the distance from the edge midpoint to (0.5, 0.5). Draws
// come from SplitMix64(seed), so values are bit-reproducible.
Signal generate_signal(const GridComplex& grid, SignalKind kind, std::uint64_t seed,
                       double mean = 0.5, double sd = 0.1);

struct ExperimentSpec {
  int grid_rows = 8, grid_cols = 8;
  std::uint64_t jitter_seed = 1;
  std::optional<std::string> complex_file;  // replaces the grid generator
  SignalKind kind = SignalKind::uniform;
  double normal_mean = 0.5, normal_sd = 0.1;
  int degree = 1;
  int k_max = 0;      // 0 means run to exhaustion
  int n_trials = 10;
  std::uint64_t base_seed = 1;         // trial i uses seeds[i], default base_seed + i
  std::vector<std::uint64_t> seeds;    // optional explicit list
  std::vector<std::string> modes = {"optimal", "random"};

  std::vector<std::uint64_t> resolved_seeds() const;
};

// JSON spec parser. When apply_env is true, MORSEPACK_SEED (an unsigned
// integer) overrides base_seed and discards an explicit seed list.
ExperimentSpec parse_experiment_spec(std::istream& in, const std::string& context = "<stream>",
                                     bool apply_env = true);
ExperimentSpec load_experiment_spec(const std::string& path, bool apply_env = true);

struct ModeResult {
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<LossRecord>> trials;  // per seed
  int steps = 0;                                // realized common step count
  std::vector<double> mean, stderr_;            // loss_total per step across seeds
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::map<std::string, ModeResult> results;  // keyed by mode
  double wall_time_ms = 0.0;
};

// Runs modes x seeds trials (in parallel across trials, reduced in a fixed
// order) and aggregates per-step means with sample standard errors.
ExperimentReport run_experiment(const ExperimentSpec& spec);

// JSON report: spec echo, per-mode curves and per-seed trails, wall time.
void write_report_json(const ExperimentReport& report, std::ostream& out);
// CSV schema: # morsepack-curves-v1
// mode,step,mean_loss_total,stderr_loss_total,n_trials
void write_curves_csv(const ExperimentReport& report, std::ostream& out);

// One row per Hodge basis vector at the signal's degree, comparing basis
// coefficients of s and of phi psi s; rows whose coefficients moved by more
// than 1e-8 are flagged.
struct ProjectionRow {
  std::string component;  // "L", "K", or "R"
  int index = 0;
  double sigma = 0.0;     // 0 for kernel vectors
  double coeff_signal = 0.0;
  double coeff_reconstruction = 0.0;
  bool flagged = false;
};
std::vector<ProjectionRow> project_report(const BasedChainComplex& complex, const Signal& s,
                                          const Eigen::MatrixXd& psi, const Eigen::MatrixXd& phi);
// CSV schema: # morsepack-projection-v1
// component,index,sigma,coeff_signal,coeff_reconstruction,abs_diff,flagged
void write_projection_csv(const std::vector<ProjectionRow>& rows, std::ostream& out);

}  // namespace morsepack
