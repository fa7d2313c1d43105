#include <doctest.h>

#include "support.hpp"

#include "morsepack/hodge.hpp"
#include "morsepack/morse.hpp"
#include "morsepack/numeric.hpp"
#include "morsepack/optimize.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace morsepack;
using namespace morsepack::testing;

namespace {

Signal degree_signal(int degree, std::initializer_list<double> values) {
  Signal s;
  s.degree = degree;
  s.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(values.size()));
  int i = 0;
  for (double v : values) s.values(i++) = v;
  return s;
}

// One 2-cell glued three times onto a single loop: exactly one admissible
// incidence at degree 1.
BasedChainComplex one_incidence_complex() {
  ComplexBuilder b(2);
  b.add_cell(0, "v");
  b.add_cell(1, "e");
  b.add_cell(2, "f");
  b.add_boundary("e", "f", 3.0);
  return b.build();
}

}  // namespace

TEST_CASE("generator reproduces its reference stream") {
  SplitMix64 zero(0);
  CHECK(zero.next() == 0xe220a8397b1dcdafull);
  CHECK(zero.next() == 0x6e789e6aa1b965f4ull);
  CHECK(zero.next() == 0x06c45d188009454full);

  SplitMix64 forty_two(42);
  CHECK(forty_two.next() == 0xbdd732262feb6e95ull);
  CHECK(forty_two.next() == 0x28efe333b266f103ull);

  SplitMix64 one(1);
  CHECK(one.uniform01() == 0.5665615751722809);

  SplitMix64 five(5);
  CHECK(five.pick(7) == 3);

  SplitMix64 stepped = step_stream(9, 2);
  CHECK(stepped.state == 0xdaa66d2c7ddf7448ull);
  CHECK(stepped.next() == 0xc8e98cd697316060ull);
}

TEST_CASE("every draw advances the state by one golden increment") {
  SplitMix64 rng(17);
  const std::uint64_t start = rng.state;
  rng.next();
  rng.uniform01();
  rng.pick(5);
  CHECK(rng.state - start == 3 * SplitMix64::GOLDEN);
}

TEST_CASE("topological loss of a single collapse") {
  const BasedChainComplex tri = filled_triangle();
  const CellId f = *tri.find_cell("f");
  const CellId e02 = *tri.find_cell("e02");
  Matching m;
  m.pairs.push_back({f, e02});
  const Retraction r = reduce(tri, m);

  const Signal s = degree_signal(1, {0.0, 1.0, 0.0});  // e02 alone
  const double loss = topological_loss(tri, r.psi[1], r.phi[1], s);
  CHECK(loss == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

  // With nothing paired below, the residual is d h s exactly.
  const Eigen::VectorXd via_h = tri.boundary_dense(2) * (r.h[1] * s.values);
  CHECK((s.values - r.phi[1] * (r.psi[1] * s.values) - via_h).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("compact pairing loss agrees with the matrix evaluation") {
  const BasedChainComplex tri = filled_triangle();
  const CellId f = *tri.find_cell("f");
  const CellId e01 = *tri.find_cell("e01");
  const CellId e02 = *tri.find_cell("e02");

  CHECK(single_pairing_loss(tri, f, e02, degree_signal(1, {5.0, 0.0, -2.0})) == 0.0);
  CHECK(single_pairing_loss(tri, f, e02, degree_signal(1, {0.0, 2.0, 0.0})) ==
        doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));

  ComplexBuilder wb(2);
  wb.add_cells(0, {"v0", "v1", "v2"});
  wb.add_cells(1, {"e01", "e02", "e12"});
  wb.add_cell(2, "f");
  wb.add_boundary("v0", "e01", -1.0);
  wb.add_boundary("v1", "e01", 1.0);
  wb.add_boundary("v0", "e02", -1.0);
  wb.add_boundary("v2", "e02", 1.0);
  wb.add_boundary("v1", "e12", -1.0);
  wb.add_boundary("v2", "e12", 1.0);
  wb.add_boundary("e01", "f", 1.0);
  wb.add_boundary("e02", "f", -1.0);
  wb.add_boundary("e12", "f", 1.0);
  wb.set_weight_diagonal(1, Eigen::Vector3d(4.0, 1.0, 1.0));
  const BasedChainComplex weighted = wb.build();
  CHECK(single_pairing_loss(weighted, f, e02, degree_signal(1, {0.0, 1.0, 0.0})) ==
        doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));

  SplitMix64 rng(23);
  for (const auto& c : {tri, weighted, loops_complex()}) {
    for (const auto& m : enumerate_matchings(c)) {
      if (m.size() != 1) continue;
      const auto [alpha, beta] = m.pairs[0];
      if (beta.degree < 0 || alpha.degree > c.max_degree()) continue;
      const Retraction r = reduce(c, m);
      for (int trial = 0; trial < 5; ++trial) {
        Signal s;
        s.degree = beta.degree;
        s.values = random_vector(c.dim(beta.degree), rng);
        const double compact = single_pairing_loss(c, alpha, beta, s);
        const double matrix = topological_loss(c, r.psi[s.degree], r.phi[s.degree], s);
        CHECK(std::abs(compact - matrix) <= 1e-12 * (1.0 + compact));
      }
    }
  }

  const BasedChainComplex loops = loops_complex();  // d_1 = 0
  CHECK_THROWS_AS(single_pairing_loss(loops, *loops.find_cell("e1"), *loops.find_cell("v"),
                                      degree_signal(0, {1.0})),
                  std::invalid_argument);
}

TEST_CASE("dual pairing loss mirrors the primal formula upstairs") {
  const BasedChainComplex tri = filled_triangle();
  const CellId f = *tri.find_cell("f");
  const CellId e01 = *tri.find_cell("e01");
  CHECK(dual_pairing_loss(tri, f, e01, degree_signal(2, {1.0})) == doctest::Approx(1.0));

  const BasedChainComplex loops = loops_complex();
  const CellId lf = *loops.find_cell("f");
  const CellId e1 = *loops.find_cell("e1");
  const Signal s = degree_signal(2, {1.0, 2.0});
  const double loss = dual_pairing_loss(loops, lf, e1, s);
  CHECK(loss == doctest::Approx(std::sqrt(5.0) / 2.0).epsilon(1e-12));

  // Same number from the adjoint reduction maps.
  Matching m;
  m.pairs.push_back({lf, e1});
  const AdjointRetraction ar = adjoint_maps(reduce(loops, m));
  const Eigen::VectorXd residual =
      s.values - ar.psi_dagger[2] * (ar.phi_dagger[2] * s.values);
  CHECK(std::abs(loss - norm(loops, 2, residual)) <= 1e-12);

  // And from the primal formula on the degree-reversed complex.
  const BasedChainComplex dual = dual_complex(loops);
  const CellId dual_alpha = *dual.find_cell("e1");
  const CellId dual_beta = *dual.find_cell("f");
  Signal flipped;
  flipped.degree = 0;
  flipped.values = s.values;
  CHECK(std::abs(loss - single_pairing_loss(dual, dual_alpha, dual_beta, flipped)) <= 1e-12);

  SplitMix64 rng(29);
  const BasedChainComplex spd = with_random_spd_weights(filled_triangle(), rng);
  CHECK_THROWS_AS(dual_pairing_loss(spd, f, e01, degree_signal(2, {1.0})), std::domain_error);
}

TEST_CASE("optimal pairing scores incidences and breaks ties uniformly") {
  const BasedChainComplex tri = filled_triangle();
  const CellId f = *tri.find_cell("f");
  const CellId e01 = *tri.find_cell("e01");
  const CellId e02 = *tri.find_cell("e02");

  SplitMix64 rng(0);
  const PairChoice best = optimal_pairing(tri, degree_signal(1, {3.0, 1.0, 2.0}), rng);
  CHECK(best.alpha == f);
  CHECK(best.beta == e02);
  CHECK(best.loss == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    SplitMix64 local(seed);
    const PairChoice zero = optimal_pairing(tri, degree_signal(1, {1.0, 0.0, 2.0}), local);
    CHECK(zero.beta == e02);
    CHECK(zero.loss == 0.0);
  }

  int hit_e01 = 0, hit_e02 = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    SplitMix64 local(seed);
    const PairChoice tied = optimal_pairing(tri, degree_signal(1, {1.0, 1.0, 2.0}), local);
    if (tied.beta == e01) ++hit_e01;
    if (tied.beta == e02) ++hit_e02;
  }
  CHECK(hit_e01 + hit_e02 == 1000);
  CHECK(hit_e01 >= 450);
  CHECK(hit_e01 <= 550);

  SplitMix64 counter(7);
  const std::uint64_t before = counter.state;
  optimal_pairing(tri, degree_signal(1, {3.0, 1.0, 2.0}), counter);
  CHECK(counter.state - before == 2 * SplitMix64::GOLDEN);

  SplitMix64 starved(11);
  CHECK_THROWS_AS(optimal_pairing(hollow_triangle(), degree_signal(1, {1.0, 1.0, 1.0}), starved),
                  std::runtime_error);
}

TEST_CASE("signal sets sum their per-face scores") {
  const BasedChainComplex tri = filled_triangle();
  const Signal s1 = degree_signal(1, {1.0, 0.0, 0.0});
  const Signal s2 = degree_signal(1, {0.0, 0.0, 1.0});
  SplitMix64 rng(3);
  const PairChoice joint = optimal_pairing(tri, {&s1, &s2}, 1, rng);
  CHECK(joint.beta == *tri.find_cell("e02"));
  CHECK(joint.loss == 0.0);

  SplitMix64 a(19), b(19);
  const Signal s = degree_signal(1, {3.0, 1.0, 2.0});
  const PairChoice lone = optimal_pairing(tri, {&s}, 1, a);
  const PairChoice direct = optimal_pairing(tri, s, b);
  CHECK(lone.alpha == direct.alpha);
  CHECK(lone.beta == direct.beta);
  CHECK(lone.loss == direct.loss);
}

TEST_CASE("zero-step trajectories are the identity") {
  const BasedChainComplex tri = filled_triangle();
  OptimizerConfig config;
  config.degree = 1;
  config.steps = 0;
  const Signal s = degree_signal(1, {3.0, 1.0, 2.0});
  const Trajectory t = k_optimal_pairings(tri, s, config);
  CHECK(t.records.empty());
  CHECK_FALSE(t.exhausted);
  CHECK(t.matching.stages.empty());
  CHECK(t.compressed.values == s.values);
  CHECK(identity_residual(t.retraction.psi[1]) == 0.0);
  CHECK(t.retraction.reduced.dim(0) == 3);
}

TEST_CASE("a one-step optimal trajectory collapses the cheapest incidence") {
  const BasedChainComplex tri = filled_triangle();
  OptimizerConfig config;
  config.degree = 1;
  config.steps = 5;
  config.seed = 12;
  const Signal s = degree_signal(1, {3.0, 1.0, 2.0});
  const Trajectory t = k_optimal_pairings(tri, s, config);

  REQUIRE(t.records.size() == 1);
  CHECK(t.exhausted);  // no 2-cells remain for further steps
  CHECK(t.records[0].step == 1);
  CHECK(t.records[0].alpha == "f");
  CHECK(t.records[0].beta == "e02");
  CHECK(t.records[0].loss_conditional == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(t.records[0].loss_total == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(t.records[0].dims == std::vector<int>{3, 2, 0});

  REQUIRE(t.matching.stages.size() == 1);
  const Retraction replay = sequential_reduce(tri, t.matching);
  for (int n = 0; n <= tri.max_degree(); ++n) {
    CHECK(relative_residual(replay.psi[n], t.retraction.psi[n]) <= 1e-12);
    CHECK(relative_residual(replay.phi[n], t.retraction.phi[n]) <= 1e-12);
    CHECK(relative_residual(replay.h[n], t.retraction.h[n]) <= 1e-12);
  }
  CHECK((t.compressed.values - t.retraction.psi[1] * s.values).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(retraction_residuals(t.retraction).max() <= 1e-9);
}

TEST_CASE("trajectories replay deterministically and bound their total loss") {
  SplitMix64 rng(101);
  const std::vector<BasedChainComplex> fixtures = {
      loops_complex(), with_random_diagonal_weights(loops_complex(), rng)};
  for (const auto& c : fixtures) {
    OptimizerConfig config;
    config.degree = 1;
    config.steps = 4;
    config.seed = 77;
    Signal s;
    s.degree = 1;
    s.values = random_vector(c.dim(1), rng);

    for (const bool optimal : {true, false}) {
      const Trajectory first =
          optimal ? k_optimal_pairings(c, s, config) : random_pairings(c, s, config);
      const Trajectory second =
          optimal ? k_optimal_pairings(c, s, config) : random_pairings(c, s, config);
      REQUIRE(first.records.size() == second.records.size());
      double conditional_sum = 0.0;
      for (std::size_t i = 0; i < first.records.size(); ++i) {
        CHECK(first.records[i].alpha == second.records[i].alpha);
        CHECK(first.records[i].beta == second.records[i].beta);
        CHECK(first.records[i].loss_total == second.records[i].loss_total);
        conditional_sum += first.records[i].loss_conditional;
        CHECK(first.records[i].loss_total <= conditional_sum + 1e-9);
      }

      const Retraction replay = sequential_reduce(c, first.matching);
      for (int n = 0; n <= c.max_degree(); ++n) {
        CHECK(relative_residual(replay.psi[n], first.retraction.psi[n]) <= 1e-9);
        CHECK(relative_residual(replay.phi[n], first.retraction.phi[n]) <= 1e-9);
      }
      CHECK(max_abs(first.compressed.values - first.retraction.psi[1] * s.values) <= 1e-11);
      CHECK(retraction_residuals(first.retraction).max() <= 1e-9);
      const double recomputed =
          topological_loss(c, first.retraction.psi[1], first.retraction.phi[1], s);
      CHECK(std::abs(first.records.back().loss_total - recomputed) <= 1e-12);
    }
  }
}

TEST_CASE("random agrees with optimal when only one incidence exists") {
  const BasedChainComplex c = one_incidence_complex();
  OptimizerConfig config;
  config.degree = 1;
  config.steps = 1;
  config.seed = 5;
  const Signal s = degree_signal(1, {2.0});
  const Trajectory opt = k_optimal_pairings(c, s, config);
  const Trajectory rnd = random_pairings(c, s, config);
  REQUIRE(opt.records.size() == 1);
  REQUIRE(rnd.records.size() == 1);
  CHECK(opt.records[0].alpha == rnd.records[0].alpha);
  CHECK(opt.records[0].beta == rnd.records[0].beta);
  CHECK(opt.records[0].loss_conditional == rnd.records[0].loss_conditional);
}

TEST_CASE("dual-side trajectories run on the degree-reversed complex") {
  const BasedChainComplex tri = filled_triangle();
  OptimizerConfig config;
  config.degree = 1;
  config.steps = 1;
  config.seed = 4;
  config.loss_side = OptimizerConfig::Side::dual;
  const Signal s = degree_signal(1, {3.0, 1.0, 2.0});
  const Trajectory t = k_optimal_pairings(tri, s, config);

  const BasedChainComplex dual = dual_complex(tri);
  REQUIRE(t.records.size() == 1);
  CHECK(t.retraction.source.dim(0) == dual.dim(0));
  CHECK(t.retraction.source.dim(2) == dual.dim(2));
  CHECK(is_morse_matching(dual, t.matching.stages[0]).ok());
  CHECK(t.records[0].loss_conditional >= 0.0);
  CHECK(retraction_residuals(t.retraction).max() <= 1e-9);
}

TEST_CASE("degree reversal is an involution on orthogonal bases") {
  for (const auto& c : {filled_triangle(), loops_complex(), four_cycle()}) {
    const BasedChainComplex dual = dual_complex(c);
    CHECK(validate(dual).ok());
    for (int n = 0; n <= c.max_degree(); ++n) {
      CHECK(dual.dim(n) == c.dim(c.max_degree() - n));
    }
    const BasedChainComplex twice = dual_complex(dual);
    std::ostringstream a, b;
    save_complex(c, a);
    save_complex(twice, b);
    CHECK(a.str() == b.str());
  }
  SplitMix64 rng(31);
  const BasedChainComplex spd = with_random_spd_weights(filled_triangle(), rng);
  CHECK_THROWS_AS(dual_complex(spd), std::domain_error);
}

TEST_CASE("exhaustive reduction lands on homology") {
  const BasedChainComplex tri = filled_triangle();
  const FullReduceResult all = full_reduce(tri);
  CHECK(all.steps == 3);
  CHECK(all.retraction.reduced.dim(0) == 1);
  CHECK(all.retraction.reduced.dim(1) == 0);
  CHECK(all.retraction.reduced.dim(2) == 0);

  SplitMix64 rng(37);
  const std::vector<BasedChainComplex> fixtures = {
      interval_complex(), filled_triangle(), hollow_triangle(), four_cycle(), loops_complex(),
      with_random_diagonal_weights(filled_triangle(), rng)};
  for (const auto& c : fixtures) {
    const std::vector<int> betti = homology_dimensions(c);
    const FullReduceResult r = full_reduce(c);
    int drop = 0;
    for (int n = 0; n <= c.max_degree(); ++n) {
      CHECK(r.retraction.reduced.dim(n) == betti[n]);
      CHECK(r.retraction.reduced.boundary(std::max(n, 1)).nonZeros() == 0);
      drop += c.dim(n) - betti[n];
    }
    CHECK(r.steps * 2 == drop);
    CHECK(retraction_residuals(r.retraction).max() <= 1e-9);
  }

  ComplexBuilder vb(0);
  vb.add_cell(0, "p");
  CHECK(full_reduce(vb.build()).steps == 0);
}

TEST_CASE("free reduction keeps one boundary and counts ranks honestly") {
  const BasedChainComplex tri = filled_triangle();
  const FullReduceResult fr = free_reduce(tri, 1);
  CHECK(fr.steps == 1);
  CHECK(fr.retraction.reduced.dim(0) == 3);
  CHECK(fr.retraction.reduced.dim(1) == 2);
  CHECK(fr.retraction.reduced.dim(2) == 0);
  CHECK(lu_rank(fr.retraction.reduced.boundary_dense(1)) == lu_rank(tri.boundary_dense(1)));

  CHECK(free_reduce(hollow_triangle(), 1).steps == 0);

  SplitMix64 rng(41);
  const std::vector<BasedChainComplex> fixtures = {
      filled_triangle(), four_cycle(), loops_complex(),
      with_random_diagonal_weights(loops_complex(), rng)};
  for (const auto& c : fixtures) {
    const std::vector<int> betti = homology_dimensions(c);
    for (int n = 1; n <= c.max_degree(); ++n) {
      const FullReduceResult r = free_reduce(c, n);
      const int rank = lu_rank(r.retraction.reduced.boundary_dense(n));
      for (int i = 0; i <= c.max_degree(); ++i) {
        if (i >= 1 && i != n) CHECK(r.retraction.reduced.boundary(i).nonZeros() == 0);
        if (i == n) {
          CHECK(r.retraction.reduced.dim(i) == betti[i] + rank);
        } else if (i == n - 1) {
          CHECK(r.retraction.reduced.dim(i) == betti[i] + rank);
        } else {
          CHECK(r.retraction.reduced.dim(i) == betti[i]);
        }
      }
      CHECK(retraction_residuals(r.retraction).max() <= 1e-9);
    }
  }
}

TEST_CASE("trajectory CSV carries its schema header") {
  const BasedChainComplex tri = filled_triangle();
  OptimizerConfig config;
  config.degree = 1;
  config.steps = 1;
  const Trajectory t = k_optimal_pairings(tri, degree_signal(1, {3.0, 1.0, 2.0}), config);
  std::ostringstream out;
  write_trajectory_csv(out, t.records);
  std::istringstream lines(out.str());
  std::string header, columns, row;
  std::getline(lines, header);
  std::getline(lines, columns);
  std::getline(lines, row);
  CHECK(header == "# morsepack-trajectory-v1");
  CHECK(columns == "step,alpha,beta,loss_conditional,loss_total,dims");
  CHECK(row.rfind("1,f,e02,", 0) == 0);
  CHECK(row.find("3;2;0") != std::string::npos);
}
