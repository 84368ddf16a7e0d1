#include <cmath>

#include "doctest.h"
#include "kkt_check.hpp"
#include "oracles.hpp"
#include "smle/opt/solvers.hpp"

using namespace smle;
using namespace smle::opt;

namespace {

QpProblem projection(const Vector& x0) {
  const std::size_t n = x0.size();
  QpProblem p(n);
  for (std::size_t j = 0; j < n; ++j) {
    p.h(j, j) = 2.0;
    p.c[j] = -2.0 * x0[j];
  }
  p.constant = l2sq(x0);
  return p;
}

void require_kkt(const QpProblem& p, const Solution& s) {
  const auto r = testing::qp_kkt(p, s);
  CHECK(r.primal <= 1e-9);
  CHECK(r.stationarity <= 1e-8);
  CHECK(r.dual_sign <= 1e-8);
  CHECK(r.complementarity <= 1e-8);
}

}  // namespace

TEST_CASE("unconstrained projection returns the point") {
  const QpProblem p = projection({1.5, -2.0, 0.25});
  const Solution s = solve_qp(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[0] == doctest::Approx(1.5));
  CHECK(s.x[1] == doctest::Approx(-2.0));
  CHECK(s.x[2] == doctest::Approx(0.25));
  CHECK(s.objective == doctest::Approx(0.0));
}

TEST_CASE("half-space projection in one dimension") {
  QpProblem p = projection({2.0});
  p.add_row({{0, 1.0}}, Relation::LessEq, 0.0);
  const Solution s = solve_qp(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[0] == doctest::Approx(0.0));
  CHECK(s.objective == doctest::Approx(4.0));
  CHECK(s.duals[0] == doctest::Approx(4.0));
  require_kkt(p, s);
}

TEST_CASE("non-PSD Hessian is rejected") {
  QpProblem p(2);
  p.h = Matrix::from_rows({{1, 0}, {0, -1}});
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);
  p.h = Matrix::from_rows({{1, 2}, {0, 1}});
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);
}

TEST_CASE("infeasible QP") {
  QpProblem p = projection({0.0, 0.0});
  p.add_row({{0, 1.0}, {1, 1.0}}, Relation::GreaterEq, 3.0);
  p.set_bounds(0, -1, 1);
  p.set_bounds(1, -1, 1);
  const Solution s = solve_qp(p);
  REQUIRE(s.status == Status::Infeasible);
  CHECK(testing::check_farkas(p, s.farkas).value < -1e-9);
}

TEST_CASE("singular Hessian with bounds") {
  // min (x0 - x1)^2 - x0 over the box: flat valley direction.
  QpProblem p(2);
  p.h = Matrix::from_rows({{2, -2}, {-2, 2}});
  p.c = {-1, 0};
  p.set_bounds(0, -1, 1);
  p.set_bounds(1, -1, 1);
  const Solution s = solve_qp(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(-1.0));
  require_kkt(p, s);

  QpProblem q = p;
  q.set_bounds(0, -kInf, kInf);
  q.set_bounds(1, -kInf, kInf);
  CHECK(solve_qp(q).status == Status::Unbounded);
}

TEST_CASE("equality constrained least squares") {
  QpProblem p = projection({1.0, 2.0, 3.0});
  p.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}}, Relation::Equal, 0.0);
  const Solution s = solve_qp(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[0] == doctest::Approx(-1.0));
  CHECK(s.x[1] == doctest::Approx(0.0));
  CHECK(s.x[2] == doctest::Approx(1.0));
  require_kkt(p, s);
}

TEST_CASE("projection onto random polytopes matches a grid oracle") {
  Rng rng(31);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + rng.below(2);
    const Vector x0 = testing::random_vector(rng, n, -2, 2);
    QpProblem p = projection(x0);
    for (std::size_t j = 0; j < n; ++j) p.set_bounds(j, -1, 1);
    const std::size_t rows = 1 + rng.below(4);
    for (std::size_t i = 0; i < rows; ++i) p.add_row(testing::random_vector(rng, n), Relation::LessEq, rng.uniform(-0.3, 1));
    const Solution s = solve_qp(p);
    const auto grid = testing::grid_minimize(
        [&](const Vector& x) { return std::sqrt(l2sq(sub(x, x0))); },
        [&](const Vector& x) { return p.max_violation(x) <= 0.0; }, Vector(n, -1.0), Vector(n, 1.0),
        n == 2 ? 201 : 41, 24);
    if (!grid) {
      // Grid can miss thin regions; the solver must then still be consistent.
      if (s.status == Status::Infeasible) CHECK(testing::check_farkas(p, s.farkas).value < -1e-9);
      continue;
    }
    REQUIRE(s.status == Status::Optimal);
    require_kkt(p, s);
    const double dist = std::sqrt(l2sq(sub(s.x, x0)));
    CHECK(dist <= grid->value + 1e-9);
    CHECK(grid->value - dist <= 1e-4);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("random convex QPs pass the KKT checker") {
  Rng rng(5150);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const std::size_t rank = rng.below(n + 1);
    const Matrix l = testing::random_matrix(rng, n, std::max<std::size_t>(rank, 1));
    QpProblem p(n);
    if (rank > 0) p.h = matmul(l, l.transposed());
    p.c = testing::random_vector(rng, n);
    for (std::size_t j = 0; j < n; ++j) p.set_bounds(j, -2, 2);
    const Vector center = testing::random_vector(rng, n, -0.5, 0.5);
    const std::size_t rows = rng.below(2 * n + 1);
    for (std::size_t i = 0; i < rows; ++i) {
      const Vector a = testing::random_vector(rng, n);
      if (rng.uniform01() < 0.1) p.add_row(a, Relation::Equal, dot(a, center));
      else p.add_row(a, Relation::LessEq, dot(a, center) + rng.uniform(0, 1));
    }
    const Solution s = solve_qp(p);
    REQUIRE(s.status == Status::Optimal);
    require_kkt(p, s);
    CHECK(s.objective == doctest::Approx(p.evaluate(s.x)));
  }
}

TEST_CASE("QP solve is deterministic") {
  Rng rng(1);
  QpProblem p = projection(testing::random_vector(rng, 4, -3, 3));
  for (int i = 0; i < 5; ++i) p.add_row(testing::random_vector(rng, 4), Relation::LessEq, 0.2);
  const Solution a = solve_qp(p), b = solve_qp(p);
  CHECK(a.x == b.x);
  CHECK(a.duals == b.duals);
}
