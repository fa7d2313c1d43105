#include <doctest.h>

#include "support.hpp"

#include "morsepack/cell_complex.hpp"
#include "morsepack/numeric.hpp"

#include <sstream>
#include <stdexcept>
#include <string>

using namespace morsepack;
using namespace morsepack::testing;

namespace {

bool has_violation(const ValidationReport& report, const std::string& check) {
  for (const auto& v : report.violations) {
    if (v.check == check) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate accepts the hand examples") {
  CHECK(validate(interval_complex()).ok());
  CHECK(validate(filled_triangle()).ok());
  CHECK(validate(hollow_triangle()).ok());
  CHECK(validate(four_cycle()).ok());
  CHECK(validate(loops_complex()).ok());
}

TEST_CASE("validate flags a broken boundary square") {
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
  b.add_boundary("e02", "f", 1.0);  // flipped sign breaks d1 d2 = 0
  b.add_boundary("e01", "f", 1.0);
  const auto report = validate(b.build());
  CHECK_FALSE(report.ok());
  CHECK(has_violation(report, "boundary-squared"));
}

TEST_CASE("validate flags bad weights") {
  SplitMix64 rng(3);
  const BasedChainComplex base = interval_complex();

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  ComplexBuilder b1(1);
  b1.add_cells(0, {"a", "b"});
  b1.add_cell(1, "e");
  b1.add_boundary("a", "e", -1.0);
  b1.add_boundary("b", "e", 1.0);
  b1.set_weight(0, asym);
  CHECK(has_violation(validate(b1.build()), "weight-not-symmetric"));

  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  ComplexBuilder b2(1);
  b2.add_cells(0, {"a", "b"});
  b2.add_cell(1, "e");
  b2.add_boundary("a", "e", -1.0);
  b2.add_boundary("b", "e", 1.0);
  b2.set_weight(0, indef);
  CHECK(has_violation(validate(b2.build()), "weight-not-spd"));

  CHECK(validate(with_random_spd_weights(base, rng)).ok());
}

TEST_CASE("boundary squared stays within tolerance on weighted fixtures") {
  SplitMix64 rng(11);
  for (const auto& c : {filled_triangle(), loops_complex()}) {
    const auto w = with_random_spd_weights(c, rng);
    for (int n = 1; n < w.max_degree(); ++n) {
      const Eigen::MatrixXd prod = w.boundary_dense(n) * w.boundary_dense(n + 1);
      const double bound = 1e-10 * (1.0 + max_abs(w.boundary_dense(n)) *
                                              max_abs(w.boundary_dense(n + 1)));
      CHECK(max_abs(prod) <= bound);
    }
  }
}

TEST_CASE("adjoint boundary closed forms on the interval") {
  const BasedChainComplex c = interval_complex();
  const Eigen::MatrixXd adj = adjoint_boundary(c, 1);
  REQUIRE(adj.rows() == 1);
  REQUIRE(adj.cols() == 2);
  CHECK(adj(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(adj(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  ComplexBuilder b(1);
  b.add_cells(0, {"a", "b"});
  b.add_cell(1, "e");
  b.add_boundary("a", "e", -1.0);
  b.add_boundary("b", "e", 1.0);
  b.set_weight_diagonal(0, Eigen::Vector2d(2.0, 1.0));
  const Eigen::MatrixXd weighted = adjoint_boundary(b.build(), 1);
  CHECK(weighted(0, 0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(weighted(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adjoint of a zero boundary is zero") {
  const BasedChainComplex c = loops_complex();  // d1 = 0
  const Eigen::MatrixXd adj = adjoint_boundary(c, 1);
  REQUIRE(adj.rows() == 2);
  REQUIRE(adj.cols() == 1);
  CHECK(max_abs(adj) == 0.0);
  // One past each end is zero-shaped; beyond that is an error.
  CHECK(adjoint_boundary(c, 0).cols() == 0);
  CHECK(adjoint_boundary(c, 3).rows() == 0);
  CHECK_THROWS_AS(adjoint_boundary(c, -1), std::out_of_range);
  CHECK_THROWS_AS(adjoint_boundary(c, 4), std::out_of_range);
}

TEST_CASE("adjoint identity and squared adjoint on random weighted complexes") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = trial % 2 == 0 ? with_random_spd_weights(filled_triangle(), rng)
                                  : with_random_diagonal_weights(loops_complex(), rng);
    for (int n = 1; n <= c.max_degree(); ++n) {
      const Eigen::MatrixXd adj = adjoint_boundary(c, n);
      const Signal x{n, random_vector(c.dim(n), rng)};
      const Signal y{n - 1, random_vector(c.dim(n - 1), rng)};
      const Signal dx{n - 1, c.boundary_dense(n) * x.values};
      const Signal ay{n, adj * y.values};
      const double lhs = inner_product(c, n - 1, dx, y);
      const double rhs = inner_product(c, n, x, ay);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs) + std::abs(rhs)));
    }
    if (c.max_degree() >= 2) {
      const Eigen::MatrixXd sq = adjoint_boundary(c, 2) * adjoint_boundary(c, 1);
      CHECK(max_abs(sq) <= 1e-10 * (1.0 + max_abs(adjoint_boundary(c, 1)) *
                                              max_abs(adjoint_boundary(c, 2))));
    }
  }
}

TEST_CASE("inner products and norms") {
  const BasedChainComplex tri = hollow_triangle();
  Signal unit{0, Eigen::Vector3d(1.0, 0.0, 0.0)};
  CHECK(inner_product(tri, 0, unit, unit) == doctest::Approx(1.0).epsilon(1e-15));

  ComplexBuilder b(1);
  b.add_cells(0, {"v0", "v1", "v2"});
  b.add_cells(1, {"e01", "e02", "e12"});
  b.add_boundary("v0", "e01", -1.0);
  b.add_boundary("v1", "e01", 1.0);
  b.add_boundary("v0", "e02", -1.0);
  b.add_boundary("v2", "e02", 1.0);
  b.add_boundary("v1", "e12", -1.0);
  b.add_boundary("v2", "e12", 1.0);
  b.set_weight_diagonal(1, Eigen::Vector3d(2.0, 3.0, 5.0));
  const auto weighted = b.build();
  const Signal ones{1, Eigen::Vector3d::Ones()};
  CHECK(inner_product(weighted, 1, ones, ones) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(norm(weighted, ones) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));

  SplitMix64 rng(23);
  const auto c = with_random_spd_weights(tri, rng);
  for (int i = 0; i < 100; ++i) {
    const Signal x{1, random_vector(3, rng)};
    const Signal y{1, random_vector(3, rng)};
    CHECK(std::abs(inner_product(c, 1, x, y) - inner_product(c, 1, y, x)) <= 1e-12);
  }

  const Signal wrong{0, Eigen::Vector2d(1.0, 2.0)};
  CHECK_THROWS_AS(inner_product(tri, 1, unit, wrong), std::invalid_argument);
}

TEST_CASE("complex save/load round trip is byte identical") {
  SplitMix64 rng(29);
  for (const auto& c : {interval_complex(), filled_triangle(),
                        with_random_diagonal_weights(loops_complex(), rng),
                        with_random_spd_weights(four_cycle(), rng)}) {
    std::ostringstream first;
    save_complex(c, first);
    std::istringstream in(first.str());
    const BasedChainComplex reloaded = parse_complex(in, "round-trip");
    std::ostringstream second;
    save_complex(reloaded, second);
    CHECK(first.str() == second.str());
    CHECK(validate(reloaded).ok());
    for (int n = 0; n <= c.max_degree(); ++n) {
      CHECK(reloaded.cell_names(n) == c.cell_names(n));
      CHECK(relative_residual(reloaded.weight(n), c.weight(n)) == 0.0);
      CHECK(relative_residual(reloaded.boundary_dense(n), c.boundary_dense(n)) == 0.0);
    }
  }
}

TEST_CASE("parser defaults, rejections, and dangling references") {
  {
    std::istringstream in(R"({"max_degree": 1, "cells": {"0": ["a", "b"], "1": ["e"]},
                              "boundary": {"1": [["a", "e", -1.0], ["b", "e", 1.0]]}})");
    const auto c = parse_complex(in, "defaults");
    CHECK_FALSE(c.has_custom_weight(0));
    CHECK(c.weight(0) == Eigen::MatrixXd::Identity(2, 2));
  }
  {
    std::istringstream in(R"({"max_degree": 0, "cells": {"0": ["a"]}, "extra": 1})");
    CHECK_THROWS_WITH_AS(parse_complex(in, "ctx"), "ctx: unknown field 'extra'",
                         std::runtime_error);
  }
  {
    std::istringstream in(R"({"max_degree": 1, "cells": {"0": ["a"], "1": ["e"]},
                              "boundary": {"1": [["ghost", "e", 1.0]]}})");
    try {
      parse_complex(in, "dangling");
      FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
  }
  {
    std::istringstream in(R"({"max_degree": 1, "cells": {"0": ["a", "a"], "1": ["e"]}})");
    CHECK_THROWS_AS(parse_complex(in, "dup"), std::runtime_error);
  }
}

TEST_CASE("signal save/load round trip") {
  const BasedChainComplex c = hollow_triangle();
  const Signal s{1, Eigen::Vector3d(0.25, -1.5, 3.0)};
  std::ostringstream out;
  save_signal(c, s, out);
  std::istringstream in(out.str());
  const Signal back = parse_signal(c, in, "signal");
  CHECK(back.degree == 1);
  CHECK((back.values - s.values).cwiseAbs().maxCoeff() == 0.0);

  std::istringstream bad(R"({"degree": 1, "values": {"nope": 1.0}})");
  try {
    parse_signal(c, bad, "bad");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }
}

TEST_CASE("cell lookup and dimensions") {
  const BasedChainComplex c = filled_triangle();
  CHECK(c.total_cells() == 7);
  CHECK(c.dim(0) == 3);
  CHECK(c.dim(1) == 3);
  CHECK(c.dim(2) == 1);
  CHECK(c.dim(3) == 0);
  CHECK(c.dim(-1) == 0);
  const auto found = c.find_cell("e02");
  REQUIRE(found.has_value());
  CHECK(found->degree == 1);
  CHECK(found->index == 1);
  CHECK(c.cell_name(*found) == "e02");
  CHECK_FALSE(c.find_cell("zz").has_value());
  CHECK(c.is_orthogonal_base());
  SplitMix64 rng(5);
  CHECK_FALSE(with_random_spd_weights(c, rng).is_orthogonal_base());
  CHECK(with_random_diagonal_weights(c, rng).is_orthogonal_base());
}
