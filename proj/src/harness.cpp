#include "morsepack/harness.hpp"

#include "morsepack/hodge.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace morsepack {

using ordered_json = nlohmann::ordered_json;

GridComplex generate_grid_complex(int rows, int cols, std::uint64_t jitter_seed) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("generate_grid_complex: rows and cols must be positive");
  }
  const int vcols = cols + 1;
  const auto vid = [vcols](int r, int c) { return r * vcols + c; };

  GridComplex grid;
  SplitMix64 rng(jitter_seed);
  const double amplitude = 0.3 / static_cast<double>(std::max(rows, cols));
  ComplexBuilder builder(2);
  for (int r = 0; r <= rows; ++r) {
    for (int c = 0; c <= cols; ++c) {
      double x = static_cast<double>(c) / cols;
      double y = static_cast<double>(r) / rows;
      if (jitter_seed != 0) {
        x += (2.0 * rng.uniform01() - 1.0) * amplitude;
        y += (2.0 * rng.uniform01() - 1.0) * amplitude;
      }
      builder.add_cell(0, "v" + std::to_string(vid(r, c)));
      grid.coords.push_back({x, y});
    }
  }

  const auto edge_name = [](int i, int j) {
    return "e" + std::to_string(i) + "_" + std::to_string(j);
  };
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r <= rows; ++r) {
    for (int c = 0; c <= cols; ++c) {
      if (c < cols) edges.emplace_back(vid(r, c), vid(r, c + 1));
      if (r < rows) edges.emplace_back(vid(r, c), vid(r + 1, c));
      if (r < rows && c < cols) edges.emplace_back(vid(r, c), vid(r + 1, c + 1));
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [a, b] = edges[i];
    builder.add_cell(1, edge_name(a, b));
    builder.add_boundary("v" + std::to_string(a), edge_name(a, b), -1.0);
    builder.add_boundary("v" + std::to_string(b), edge_name(a, b), 1.0);
  }

  std::vector<std::array<int, 3>> triangles;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v00 = vid(r, c), v01 = vid(r, c + 1);
      const int v10 = vid(r + 1, c), v11 = vid(r + 1, c + 1);
      triangles.push_back({v00, v01, v11});
      triangles.push_back({v00, v10, v11});
    }
  }
  for (const auto& [i, j, k] : triangles) {
    const std::string name =
        "t" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k);
    builder.add_cell(2, name);
    builder.add_boundary(edge_name(j, k), name, 1.0);
    builder.add_boundary(edge_name(i, k), name, -1.0);
    builder.add_boundary(edge_name(i, j), name, 1.0);
  }
  grid.complex = builder.build();
  return grid;
}

SignalKind parse_signal_kind(const std::string& name) {
  if (name == "uniform") return SignalKind::uniform;
  if (name == "normal") return SignalKind::normal;
  if (name == "height") return SignalKind::height;
  if (name == "radial") return SignalKind::radial;
  throw std::invalid_argument("unknown signal kind: " + name);
}

std::string signal_kind_name(SignalKind kind) {
  switch (kind) {
    case SignalKind::uniform: return "uniform";
    case SignalKind::normal: return "normal";
    case SignalKind::height: return "height";
    case SignalKind::radial: return "radial";
  }
  throw std::invalid_argument("unknown signal kind");
}

namespace {

std::pair<int, int> edge_endpoints(const BasedChainComplex& complex, int edge) {
  int tail = -1, head = -1;
  const Eigen::SparseMatrix<double>& b = complex.boundary(1);
  for (Eigen::SparseMatrix<double>::InnerIterator it(b, edge); it; ++it) {
    if (it.value() < 0.0) tail = static_cast<int>(it.row());
    if (it.value() > 0.0) head = static_cast<int>(it.row());
  }
  if (tail < 0 || head < 0) {
    throw std::invalid_argument("generate_signal: degree-1 cell without two endpoints");
  }
  return {tail, head};
}

}  // namespace

Signal generate_signal(const GridComplex& grid, SignalKind kind, std::uint64_t seed,
                       double mean, double sd) {
  const int dim = grid.complex.dim(1);
  Signal s{1, Eigen::VectorXd::Zero(dim)};
  SplitMix64 rng(seed);
  for (int e = 0; e < dim; ++e) {
    switch (kind) {
      case SignalKind::uniform:
        s.values(e) = rng.uniform01();
        break;
      case SignalKind::normal: {
        double u1 = rng.uniform01();
        const double u2 = rng.uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        s.values(e) =
            mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        break;
      }
      case SignalKind::height: {
        if (grid.coords.empty()) {
          throw std::invalid_argument("generate_signal: height needs vertex coordinates");
        }
        const auto [tail, head] = edge_endpoints(grid.complex, e);
        s.values(e) = 0.5 * (grid.coords[tail][1] + grid.coords[head][1]);
        break;
      }
      case SignalKind::radial: {
        if (grid.coords.empty()) {
          throw std::invalid_argument("generate_signal: radial needs vertex coordinates");
        }
        const auto [tail, head] = edge_endpoints(grid.complex, e);
        const double mx = 0.5 * (grid.coords[tail][0] + grid.coords[head][0]);
        const double my = 0.5 * (grid.coords[tail][1] + grid.coords[head][1]);
        s.values(e) = std::hypot(mx - 0.5, my - 0.5);
        break;
      }
    }
  }
  return s;
}

std::vector<std::uint64_t> ExperimentSpec::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out(static_cast<std::size_t>(std::max(n_trials, 0)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = base_seed + i;
  return out;
}

namespace {

const char* const kSpecKeys[] = {"grid",        "complex_file", "signal_kind", "normal_mean",
                                 "normal_sd",   "degree",       "k_max",       "n_trials",
                                 "base_seed",   "seeds",        "modes"};
const char* const kGridKeys[] = {"rows", "cols", "jitter_seed"};

void reject_unknown_keys(const ordered_json& obj, const char* const* keys, std::size_t count,
                         const std::string& context, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (std::size_t i = 0; i < count; ++i) {
      if (key == keys[i]) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::runtime_error(context + ": unknown " + where + " field \"" + key + "\"");
    }
  }
}

std::uint64_t to_seed(const ordered_json& j, const std::string& context, const char* field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  throw std::runtime_error(context + ": " + field + " must be a nonnegative integer");
}

}  // namespace

ExperimentSpec parse_experiment_spec(std::istream& in, const std::string& context,
                                     bool apply_env) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
  if (!doc.is_object()) throw std::runtime_error(context + ": spec must be a JSON object");
  reject_unknown_keys(doc, kSpecKeys, std::size(kSpecKeys), context, "spec");

  ExperimentSpec spec;
  if (doc.contains("grid")) {
    const ordered_json& grid = doc.at("grid");
    if (!grid.is_object()) throw std::runtime_error(context + ": grid must be an object");
    reject_unknown_keys(grid, kGridKeys, std::size(kGridKeys), context, "grid");
    if (grid.contains("rows")) spec.grid_rows = grid.at("rows").get<int>();
    if (grid.contains("cols")) spec.grid_cols = grid.at("cols").get<int>();
    if (grid.contains("jitter_seed")) {
      spec.jitter_seed = to_seed(grid.at("jitter_seed"), context, "grid.jitter_seed");
    }
  }
  if (doc.contains("complex_file")) {
    spec.complex_file = doc.at("complex_file").get<std::string>();
  }
  if (doc.contains("signal_kind")) {
    spec.kind = parse_signal_kind(doc.at("signal_kind").get<std::string>());
  }
  if (doc.contains("normal_mean")) spec.normal_mean = doc.at("normal_mean").get<double>();
  if (doc.contains("normal_sd")) spec.normal_sd = doc.at("normal_sd").get<double>();
  if (doc.contains("degree")) spec.degree = doc.at("degree").get<int>();
  if (doc.contains("k_max")) spec.k_max = doc.at("k_max").get<int>();
  if (doc.contains("n_trials")) spec.n_trials = doc.at("n_trials").get<int>();
  if (doc.contains("base_seed")) {
    spec.base_seed = to_seed(doc.at("base_seed"), context, "base_seed");
  }
  if (doc.contains("seeds")) {
    if (!doc.at("seeds").is_array()) {
      throw std::runtime_error(context + ": seeds must be an array");
    }
    for (const auto& entry : doc.at("seeds")) {
      spec.seeds.push_back(to_seed(entry, context, "seeds entry"));
    }
  }
  if (doc.contains("modes")) {
    if (!doc.at("modes").is_array()) {
      throw std::runtime_error(context + ": modes must be an array");
    }
    spec.modes.clear();
    for (const auto& entry : doc.at("modes")) {
      const std::string mode = entry.get<std::string>();
      if (mode != "optimal" && mode != "random") {
        throw std::runtime_error(context + ": unknown mode \"" + mode + "\"");
      }
      spec.modes.push_back(mode);
    }
  }
  if (spec.n_trials < 1 && spec.seeds.empty()) {
    throw std::runtime_error(context + ": n_trials must be positive");
  }

  if (apply_env) {
    if (const char* env = std::getenv("MORSEPACK_SEED")) {
      char* end = nullptr;
      const unsigned long long parsed = std::strtoull(env, &end, 10);
      if (end == env || (end != nullptr && *end != '\0')) {
        throw std::runtime_error("MORSEPACK_SEED must be an unsigned integer, got \"" +
                                 std::string(env) + "\"");
      }
      spec.base_seed = parsed;
      spec.seeds.clear();
    }
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path, bool apply_env) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  return parse_experiment_spec(in, path, apply_env);
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  const auto start = std::chrono::steady_clock::now();

  GridComplex grid;
  if (spec.complex_file) {
    grid.complex = load_complex(*spec.complex_file);
  } else {
    grid = generate_grid_complex(spec.grid_rows, spec.grid_cols, spec.jitter_seed);
  }
  if (spec.degree != 1) {
    throw std::runtime_error("run_experiment: only degree-1 signals are generated");
  }

  const std::vector<std::uint64_t> seeds = spec.resolved_seeds();
  const int exhaustion = grid.complex.dim(spec.degree + 1);
  const int steps = spec.k_max > 0 ? std::min(spec.k_max, exhaustion) : exhaustion;

  struct Task {
    std::string mode;
    std::uint64_t seed = 0;
  };
  std::vector<Task> tasks;
  for (const std::string& mode : spec.modes) {
    for (std::uint64_t seed : seeds) tasks.push_back({mode, seed});
  }
  std::vector<std::vector<LossRecord>> outputs(tasks.size());

  const auto run_one = [&](const Task& task) {
    const Signal s =
        generate_signal(grid, spec.kind, task.seed, spec.normal_mean, spec.normal_sd);
    OptimizerConfig config;
    config.degree = spec.degree;
    config.steps = steps;
    config.seed = task.seed;
    const Trajectory t = task.mode == "optimal"
                             ? k_optimal_pairings(grid.complex, s, config)
                             : random_pairings(grid.complex, s, config);
    return t.records;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(hw, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= tasks.size()) break;
        outputs[i] = run_one(tasks[i]);
      }
    });
  }
  for (std::thread& t : pool) t.join();

  ExperimentReport report;
  report.spec = spec;
  std::size_t task_index = 0;
  for (const std::string& mode : spec.modes) {
    ModeResult& result = report.results[mode];
    result.seeds = seeds;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      result.trials.push_back(std::move(outputs[task_index++]));
    }
    int common = result.trials.empty() ? 0 : std::numeric_limits<int>::max();
    for (const auto& trial : result.trials) {
      common = std::min(common, static_cast<int>(trial.size()));
    }
    result.steps = common;
    for (int k = 0; k < common; ++k) {
      double sum = 0.0;
      for (const auto& trial : result.trials) sum += trial[k].loss_total;
      const double mean = sum / static_cast<double>(result.trials.size());
      double var = 0.0;
      for (const auto& trial : result.trials) {
        const double d = trial[k].loss_total - mean;
        var += d * d;
      }
      const std::size_t n = result.trials.size();
      const double sem =
          n > 1 ? std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
      result.mean.push_back(mean);
      result.stderr_.push_back(sem);
    }
  }

  const auto stop = std::chrono::steady_clock::now();
  report.wall_time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return report;
}

namespace {

ordered_json spec_to_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["grid"] = {{"rows", spec.grid_rows},
               {"cols", spec.grid_cols},
               {"jitter_seed", spec.jitter_seed}};
  if (spec.complex_file) j["complex_file"] = *spec.complex_file;
  j["signal_kind"] = signal_kind_name(spec.kind);
  if (spec.kind == SignalKind::normal) {
    j["normal_mean"] = spec.normal_mean;
    j["normal_sd"] = spec.normal_sd;
  }
  j["degree"] = spec.degree;
  j["k_max"] = spec.k_max;
  j["n_trials"] = spec.n_trials;
  j["base_seed"] = spec.base_seed;
  if (!spec.seeds.empty()) j["seeds"] = spec.seeds;
  j["modes"] = spec.modes;
  return j;
}

}  // namespace

void write_report_json(const ExperimentReport& report, std::ostream& out) {
  ordered_json doc;
  doc["spec"] = spec_to_json(report.spec);
  ordered_json modes = ordered_json::object();
  for (const auto& [mode, result] : report.results) {
    ordered_json m;
    m["seeds"] = result.seeds;
    m["steps"] = result.steps;
    m["mean_loss_total"] = result.mean;
    m["stderr_loss_total"] = result.stderr_;
    ordered_json trials = ordered_json::array();
    for (const auto& trial : result.trials) {
      ordered_json records = ordered_json::array();
      for (const LossRecord& r : trial) {
        records.push_back({{"step", r.step},
                           {"alpha", r.alpha},
                           {"beta", r.beta},
                           {"loss_conditional", r.loss_conditional},
                           {"loss_total", r.loss_total},
                           {"dims", r.dims}});
      }
      trials.push_back(std::move(records));
    }
    m["trials"] = std::move(trials);
    modes[mode] = std::move(m);
  }
  doc["modes"] = std::move(modes);
  doc["wall_time_ms"] = report.wall_time_ms;
  out << doc.dump(2) << "\n";
}

void write_curves_csv(const ExperimentReport& report, std::ostream& out) {
  out << "# morsepack-curves-v1\n";
  out << "mode,step,mean_loss_total,stderr_loss_total,n_trials\n";
  for (const auto& [mode, result] : report.results) {
    for (int k = 0; k < result.steps; ++k) {
      out << mode << ',' << (k + 1) << ',' << ordered_json(result.mean[k]).dump() << ','
          << ordered_json(result.stderr_[k]).dump() << ',' << result.trials.size() << '\n';
    }
  }
}

std::vector<ProjectionRow> project_report(const BasedChainComplex& complex, const Signal& s,
                                          const Eigen::MatrixXd& psi,
                                          const Eigen::MatrixXd& phi) {
  if (s.values.size() != complex.dim(s.degree)) {
    throw std::invalid_argument("project_report: signal length does not match degree");
  }
  if (psi.cols() != complex.dim(s.degree) || phi.rows() != complex.dim(s.degree)) {
    throw std::invalid_argument("project_report: map shapes do not fit the signal degree");
  }
  const HodgeBasis basis = hodge_basis(complex);
  const Eigen::VectorXd reconstructed = phi * (psi * s.values);
  const Eigen::MatrixXd& w = complex.weight(s.degree);
  const bool custom = complex.has_custom_weight(s.degree);
  const auto coeff = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& x) {
    return custom ? v.dot(w * x) : v.dot(x);
  };
  std::vector<ProjectionRow> rows;
  const int n = s.degree;
  const auto push = [&](const std::string& component, int index, double sigma,
                        const Eigen::VectorXd& vec) {
    ProjectionRow row;
    row.component = component;
    row.index = index;
    row.sigma = sigma;
    row.coeff_signal = coeff(vec, s.values);
    row.coeff_reconstruction = coeff(vec, reconstructed);
    row.flagged = std::abs(row.coeff_signal - row.coeff_reconstruction) > 1e-8;
    rows.push_back(std::move(row));
  };
  for (std::size_t i = 0; i < basis.im_up[n].size(); ++i) {
    push("L", static_cast<int>(i), basis.im_up[n][i].sigma, basis.im_up[n][i].vec);
  }
  for (std::size_t i = 0; i < basis.kernel[n].size(); ++i) {
    push("K", static_cast<int>(i), 0.0, basis.kernel[n][i]);
  }
  for (std::size_t i = 0; i < basis.im_down[n].size(); ++i) {
    push("R", static_cast<int>(i), basis.im_down[n][i].sigma, basis.im_down[n][i].vec);
  }
  return rows;
}

void write_projection_csv(const std::vector<ProjectionRow>& rows, std::ostream& out) {
  out << "# morsepack-projection-v1\n";
  out << "component,index,sigma,coeff_signal,coeff_reconstruction,abs_diff,flagged\n";
  for (const ProjectionRow& row : rows) {
    out << row.component << ',' << row.index << ',' << ordered_json(row.sigma).dump() << ','
        << ordered_json(row.coeff_signal).dump() << ','
        << ordered_json(row.coeff_reconstruction).dump() << ','
        << ordered_json(std::abs(row.coeff_signal - row.coeff_reconstruction)).dump() << ','
        << (row.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace morsepack
