#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "smle/opt/solvers.hpp"

using namespace smle;
using namespace smle::opt;

namespace {

// Mixed problems: continuous vars in a box, binaries switching big-M rows.
MilpProblem random_milp(Rng& rng, std::size_t num_cont, std::size_t num_bin) {
  const std::size_t n = num_cont + num_bin;
  MilpProblem p{LpProblem(n), {}};
  for (std::size_t j = 0; j < num_cont; ++j) p.lp.set_bounds(j, -2, 2);
  for (std::size_t j = num_cont; j < n; ++j) {
    p.binaries.push_back(j);
    p.lp.set_bounds(j, 0, 1);
  }
  p.lp.c = testing::random_vector(rng, n);
  p.lp.sense = rng.uniform01() < 0.5 ? Sense::Maximize : Sense::Minimize;
  const std::size_t rows = 2 + rng.below(6);
  for (std::size_t i = 0; i < rows; ++i) p.lp.add_row(testing::random_vector(rng, n), Relation::LessEq, rng.uniform(-0.5, 1.5));
  for (std::size_t b = 0; b + 1 < num_bin; b += 2)
    p.lp.add_row({{num_cont + b, 1.0}, {num_cont + b + 1, 1.0}}, Relation::LessEq, 1.0);
  return p;
}

MiqpProblem random_miqp(Rng& rng, std::size_t num_cont, std::size_t num_bin) {
  const std::size_t n = num_cont + num_bin;
  MiqpProblem p{QpProblem(n), {}};
  const Matrix l = testing::random_matrix(rng, n, n);
  p.qp.h = matmul(l, l.transposed());
  p.qp.c = testing::random_vector(rng, n, -2, 2);
  for (std::size_t j = 0; j < num_cont; ++j) p.qp.set_bounds(j, -3, 3);
  for (std::size_t j = num_cont; j < n; ++j) {
    p.binaries.push_back(j);
    p.qp.set_bounds(j, 0, 1);
  }
  // Each binary relaxes one constraint on a continuous variable via big-M.
  for (std::size_t b = 0; b < num_bin; ++b) {
    const std::size_t j = b % num_cont;
    p.qp.add_row({{j, 1.0}, {num_cont + b, -4.0}}, Relation::LessEq, rng.uniform(-1, 0));
  }
  p.qp.add_row(testing::random_vector(rng, n), Relation::LessEq, 1.0);
  return p;
}

}  // namespace

TEST_CASE("fixed binaries reduce to the LP") {
  LpProblem lp(3);
  lp.c = {1, 2, -1};
  lp.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}}, Relation::LessEq, 2.5);
  lp.set_bounds(0, 1, 1);
  lp.set_bounds(1, 0, 0);
  lp.set_bounds(2, 0, 3);
  lp.sense = Sense::Maximize;
  const Solution a = solve_milp({lp, {0, 1}});
  const Solution b = solve_lp(lp);
  REQUIRE(a.status == Status::Optimal);
  CHECK(a.objective == doctest::Approx(b.objective));
  CHECK(a.nodes == 1);
}

TEST_CASE("integer grid rounding down") {
  // x = b0 + 2 b1, maximize x s.t. x <= 2.5
  LpProblem lp(3);
  lp.c = {1, 0, 0};
  lp.sense = Sense::Maximize;
  lp.add_row({{0, 1.0}, {1, -1.0}, {2, -2.0}}, Relation::Equal, 0);
  lp.add_row({{0, 1.0}}, Relation::LessEq, 2.5);
  const Solution s = solve_milp({lp, {1, 2}});
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(2.0));
}

TEST_CASE("infeasible and out-of-range binaries") {
  LpProblem lp(1);
  lp.add_row({{0, 1.0}}, Relation::Equal, 0.5);
  CHECK(solve_milp({lp, {0}}).status == Status::Infeasible);
  CHECK_THROWS_AS(solve_milp({lp, {3}}), DimensionError);
}

TEST_CASE("node budget surfaces as IterLimit") {
  Rng rng(4);
  MilpProblem p = random_milp(rng, 2, 12);
  SolverOptions o;
  o.max_nodes = 2;
  const Solution s = solve_milp(p, o);
  CHECK((s.status == Status::IterLimit || s.nodes <= 2));
}

TEST_CASE("random MILPs match exhaustive enumeration") {
  Rng rng(606);
  int feasible = 0;
  for (int t = 0; t < 100; ++t) {
    const MilpProblem p = random_milp(rng, 1 + rng.below(3), 1 + rng.below(12));
    const Solution s = solve_milp(p);
    const auto oracle = testing::milp_by_enumeration(p);
    if (!oracle) {
      CHECK(s.status == Status::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(s.status == Status::Optimal);
    CHECK(std::abs(s.objective - *oracle) <= 1e-6);
    CHECK(p.lp.max_violation(s.x) <= 1e-9);
    for (std::size_t j : p.binaries) CHECK((s.x[j] == 0.0 || s.x[j] == 1.0));
  }
  CHECK(feasible >= 30);
}

TEST_CASE("MIQP without binaries equals QP") {
  Rng rng(12);
  MiqpProblem p = random_miqp(rng, 3, 1);
  p.binaries.clear();
  const Solution a = solve_miqp(p), b = solve_qp(p.qp);
  REQUIRE(a.status == Status::Optimal);
  CHECK(a.objective == doctest::Approx(b.objective));
}

TEST_CASE("one binary toggles a constraint") {
  // min (x-2)^2 with x <= 0 unless b=1, paying 1 for b.
  MiqpProblem p{QpProblem(2), {1}};
  p.qp.h(0, 0) = 2.0;
  p.qp.c = {-4.0, 1.0};
  p.qp.constant = 4.0;
  p.qp.add_row({{0, 1.0}, {1, -10.0}}, Relation::LessEq, 0.0);
  const Solution s = solve_miqp(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(s.x[1] == 1.0);
  p.qp.c[1] = 5.0;
  const Solution t = solve_miqp(p);
  CHECK(t.objective == doctest::Approx(4.0));
  CHECK(t.x[1] == 0.0);
}

TEST_CASE("random MIQPs match exhaustive enumeration") {
  Rng rng(9001);
  for (int t = 0; t < 100; ++t) {
    const MiqpProblem p = random_miqp(rng, 1 + rng.below(3), 1 + rng.below(10));
    const Solution s = solve_miqp(p);
    const auto oracle = testing::miqp_by_enumeration(p);
    if (!oracle) {
      CHECK(s.status == Status::Infeasible);
      continue;
    }
    REQUIRE(s.status == Status::Optimal);
    CHECK(std::abs(s.objective - *oracle) <= 1e-6);
    CHECK(p.qp.max_violation(s.x) <= 1e-9);
  }
}

TEST_CASE("MIQP rejects non-PSD Hessian") {
  MiqpProblem p{QpProblem(1), {0}};
  p.qp.h(0, 0) = -1.0;
  CHECK_THROWS_AS(solve_miqp(p), std::invalid_argument);
}

TEST_CASE("projection-shaped MIQPs with degenerate pair rows match enumeration") {
  // Free continuous block with identity curvature; each binary relaxes one
  // big-M row, and pairs of binaries share an exclusion row.
  Rng rng(313);
  for (int t = 0; t < 60; ++t) {
    const std::size_t d = 1 + rng.below(3), groups = 2 + rng.below(2), points = 1 + rng.below(3);
    const std::size_t nc = d * groups, nb = groups * points;
    if (nb > 12) continue;
    MiqpProblem p{QpProblem(nc + nb), {}};
    for (std::size_t j = 0; j < nc; ++j) p.qp.h(j, j) = 2.0;
    for (std::size_t j = nc; j < nc + nb; ++j) {
      p.binaries.push_back(j);
      p.qp.set_bounds(j, 0, 1);
    }
    const double big_m = 2.0;
    for (std::size_t i = 0; i < points; ++i) {
      // A shared leading coordinate keeps every pattern feasible.
      Vector c = testing::random_vector(rng, d);
      c[0] = 1.0;
      for (std::size_t k = 0; k < groups; ++k) {
        Vector row(nc + nb, 0.0);
        for (std::size_t s = 0; s < d; ++s) row[k * d + s] = c[s];
        row[nc + i * groups + k] = -big_m;
        p.qp.add_row(row, Relation::LessEq, -1e-3 * big_m - rng.uniform(-0.2, 1.0));
      }
      for (std::size_t k = 0; k + 1 < groups; ++k)
        p.qp.add_row({{nc + i * groups + k, 1.0}, {nc + i * groups + k + 1, 1.0}}, Relation::LessEq, 1.0);
    }
    const Solution s = solve_miqp(p);
    const auto oracle = testing::miqp_by_enumeration(p);
    REQUIRE(oracle);
    REQUIRE(s.status == Status::Optimal);
    CHECK(std::abs(s.objective - *oracle) <= 1e-6);
    CHECK(p.qp.max_violation(s.x) <= 1e-9);
  }
}
