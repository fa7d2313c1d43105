#include "morsepack/harness.hpp"
#include "morsepack/hodge.hpp"
#include "morsepack/morse.hpp"
#include "morsepack/morsify.hpp"
#include "morsepack/optimize.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace morsepack;

void print_dims(const BasedChainComplex& complex, const std::string& label) {
  std::cout << label << ":";
  for (int n = 0; n <= complex.max_degree(); ++n) std::cout << " " << complex.dim(n);
  std::cout << "\n";
}

int run_validate(const std::string& path) {
  const BasedChainComplex complex = load_complex(path);
  print_dims(complex, "dims");
  const ValidationReport report = validate(complex);
  if (report.ok()) {
    std::cout << "ok\n";
    return 0;
  }
  std::cout << report.summary() << "\n";
  return 1;
}

int run_reduce(const std::string& path, const std::string& matching_path, bool hodge,
               const std::string& out_path) {
  const BasedChainComplex complex = load_complex(path);
  Retraction retraction;
  if (hodge) {
    const HodgeBasis basis = hodge_basis(complex);
    const HodgeMatching hm = hodge_matching(complex, basis);
    retraction = reduce(hm.hodge_complex, hm.matching);
  } else {
    const Matching m = load_matching(complex, matching_path);
    retraction = reduce(complex, m);
  }
  print_dims(retraction.source, "source");
  print_dims(retraction.reduced, "reduced");
  const RetractionResiduals res = retraction_residuals(retraction);
  std::cout << "residuals: chain_psi=" << res.chain_psi << " chain_phi=" << res.chain_phi
            << " psi_phi=" << res.psi_phi_identity << " homotopy=" << res.homotopy << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << out_path << ": cannot open file for writing\n";
      return 1;
    }
    save_retraction(retraction, out);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int run_optimize(const std::string& path, const std::string& signal_path, int degree,
                 int steps, std::uint64_t seed, bool random, bool dual,
                 const std::string& out_path) {
  const BasedChainComplex complex = load_complex(path);
  const Signal s = load_signal(complex, signal_path);
  if (s.degree != degree) {
    std::cerr << "signal degree " << s.degree << " does not match -n " << degree << "\n";
    return 1;
  }
  OptimizerConfig config;
  config.degree = degree;
  config.seed = seed;
  config.loss_side = dual ? OptimizerConfig::Side::dual : OptimizerConfig::Side::primal;
  const int collapse_degree = dual ? degree : degree + 1;
  config.steps = steps > 0 ? steps : complex.dim(collapse_degree);
  const Trajectory t = random ? random_pairings(complex, s, config)
                              : k_optimal_pairings(complex, s, config);
  if (out_path.empty()) {
    write_trajectory_csv(std::cout, t.records);
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << out_path << ": cannot open file for writing\n";
      return 1;
    }
    write_trajectory_csv(out, t.records);
    std::cout << "steps=" << t.records.size() << (t.exhausted ? " (exhausted)" : "")
              << " final_loss_total="
              << (t.records.empty() ? 0.0 : t.records.back().loss_total) << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int run_experiment(const std::string& spec_path, const std::string& out_dir) {
  const ExperimentSpec spec = load_experiment_spec(spec_path);
  const ExperimentReport report = run_experiment(spec);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/report.json");
    write_report_json(report, out);
  }
  {
    std::ofstream out(out_dir + "/curves.csv");
    write_curves_csv(report, out);
  }
  for (const auto& [mode, result] : report.results) {
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
      std::ofstream out(out_dir + "/trajectory_" + mode + "_" +
                        std::to_string(result.seeds[i]) + ".csv");
      write_trajectory_csv(out, result.trials[i]);
    }
  }
  if (report.results.count("optimal") && !spec.complex_file) {
    const GridComplex grid =
        generate_grid_complex(spec.grid_rows, spec.grid_cols, spec.jitter_seed);
    const std::uint64_t seed = report.results.at("optimal").seeds.front();
    const Signal s = generate_signal(grid, spec.kind, seed, spec.normal_mean, spec.normal_sd);
    OptimizerConfig config;
    config.degree = spec.degree;
    config.seed = seed;
    const int exhaustion = grid.complex.dim(spec.degree + 1);
    config.steps = spec.k_max > 0 ? std::min(spec.k_max, exhaustion) : exhaustion;
    const Trajectory t = k_optimal_pairings(grid.complex, s, config);
    const std::vector<ProjectionRow> rows = project_report(
        grid.complex, s, t.retraction.psi[spec.degree], t.retraction.phi[spec.degree]);
    std::ofstream out(out_dir + "/projection.csv");
    write_projection_csv(rows, out);
  }
  std::cout << "wrote " << out_dir << "/report.json (wall " << report.wall_time_ms
            << " ms)\n";
  for (const auto& [mode, result] : report.results) {
    std::cout << mode << ": steps=" << result.steps << " final_mean="
              << (result.mean.empty() ? 0.0 : result.mean.back()) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compress and reconstruct signals on based chain complexes"};
  app.require_subcommand(1);

  std::string complex_path, matching_path, signal_path, out_path, spec_path;
  std::string out_dir = ".";
  bool hodge = false, random = false, dual = false;
  int degree = 1, steps = 0;
  std::uint64_t seed = 0;

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a complex file");
  validate_cmd->add_option("complex", complex_path, "complex JSON file")->required();

  CLI::App* reduce_cmd = app.add_subcommand("reduce", "Reduce along a Morse matching");
  reduce_cmd->add_option("complex", complex_path, "complex JSON file")->required();
  CLI::Option* mopt = reduce_cmd->add_option("--matching", matching_path, "matching JSON file");
  reduce_cmd->add_flag("--hodge", hodge, "use the Hodge matching on the rebased complex")
      ->excludes(mopt);
  reduce_cmd->add_option("-o,--output", out_path, "write the retraction JSON here");

  CLI::App* optimize_cmd = app.add_subcommand("optimize", "Run a pairing trajectory");
  optimize_cmd->add_option("complex", complex_path, "complex JSON file")->required();
  optimize_cmd->add_option("--signal", signal_path, "signal JSON file")->required();
  optimize_cmd->add_option("-n,--degree", degree, "signal degree (default 1)");
  optimize_cmd->add_option("-k,--steps", steps, "pairings to perform (0 = run to exhaustion)");
  optimize_cmd->add_option("--seed", seed, "trajectory seed");
  optimize_cmd->add_flag("--random", random, "select pairs uniformly instead of optimally");
  optimize_cmd->add_flag("--dual", dual, "optimize on the degree-reversed adjoint complex");
  optimize_cmd->add_option("-o,--output", out_path, "trajectory CSV path (default stdout)");

  CLI::App* experiment_cmd = app.add_subcommand("experiment", "Run an experiment spec");
  experiment_cmd->add_option("spec", spec_path, "experiment spec JSON file")->required();
  experiment_cmd->add_option("-o,--outdir", out_dir, "output directory (default .)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return run_validate(complex_path);
    if (reduce_cmd->parsed()) {
      if (!hodge && matching_path.empty()) {
        std::cerr << "reduce needs --matching or --hodge\n";
        return 1;
      }
      return run_reduce(complex_path, matching_path, hodge, out_path);
    }
    if (optimize_cmd->parsed()) {
      return run_optimize(complex_path, signal_path, degree, steps, seed, random, dual,
                          out_path);
    }
    if (experiment_cmd->parsed()) return run_experiment(spec_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
