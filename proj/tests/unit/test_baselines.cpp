#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "smle/baselines/baselines.hpp"
#include "smle/model/presets.hpp"

using namespace smle;

namespace {

double score(std::span<const double> w, std::span<const double> y) { return dot(w, y); }

// Exhaustive search in lexicographic order (class 0 most significant); first
// pattern within the tie tolerance of the best wins.
Vector enumerate_map(std::span<const double> prob, const MutexProperty& f, double eps) {
  const std::size_t m = prob.size();
  Vector w(m);
  for (std::size_t j = 0; j < m; ++j)
    w[j] = std::log(std::max(eps, prob[j])) - std::log(std::max(eps, 1.0 - prob[j]));
  std::vector<Vector> feasible;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    Vector y(m);
    for (std::size_t j = 0; j < m; ++j) y[j] = (mask >> (m - 1 - j)) & 1 ? 1.0 : 0.0;
    bool ok = true;
    for (auto [h, k] : f.pairs) ok = ok && y[h] + y[k] <= 1.0;
    if (ok) feasible.push_back(std::move(y));
  }
  double best = -1e300;
  for (const Vector& y : feasible) best = std::max(best, score(w, y));
  for (const Vector& y : feasible)
    if (score(w, y) >= best - 1e-9 * std::max(1.0, std::abs(best))) return y;
  return {};
}

MutexProperty random_mutex(std::size_t m, std::size_t pairs, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t h = 0; h < m; ++h)
    for (std::size_t k = h + 1; k < m; ++k) all.emplace_back(h, k);
  rng.shuffle(all);
  all.resize(std::min(pairs, all.size()));
  return MutexProperty(m, all);
}

double straight_r2(const Matrix& p, const Matrix& t) {
  double acc = 0.0;
  for (std::size_t c = 0; c < t.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) mean += t(i, c) / double(t.rows());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      num += std::pow(t(i, c) - p(i, c), 2);
      den += std::pow(t(i, c) - mean, 2);
    }
    acc += (1.0 - num / den) / double(t.cols());
  }
  return acc;
}

}  // namespace

TEST_CASE("r2") {
  Rng rng(1);
  const Matrix t = testing::random_matrix(rng, 50, 3);
  CHECK(r2(t, t) == 1.0);
  Matrix mean(50, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < 50; ++i) s += t(i, c) / 50.0;
    for (std::size_t i = 0; i < 50; ++i) mean(i, c) = s;
  }
  CHECK(r2(mean, t) == doctest::Approx(0.0).epsilon(1e-12));
  for (int k = 0; k < 10; ++k) {
    const Matrix p = testing::random_matrix(rng, 50, 3);
    CHECK(std::abs(r2(p, t) - straight_r2(p, t)) <= 1e-12);
  }
  CHECK_THROWS(r2(Matrix(4, 1), Matrix(4, 1)));
  CHECK_THROWS_AS(r2(Matrix(4, 1), Matrix(3, 1)), DimensionError);
}

TEST_CASE("avg_acc") {
  Rng rng(2);
  Matrix a(40, 5);
  for (double& v : a.data()) v = rng.below(2);
  Matrix comp = a;
  for (double& v : comp.data()) v = 1.0 - v;
  CHECK(avg_acc(a, a) == 1.0);
  CHECK(avg_acc(comp, a) == 0.0);
  Matrix b(40, 5);
  for (double& v : b.data()) v = rng.below(2);
  double per_class = 0.0;
  for (std::size_t c = 0; c < 5; ++c) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < 40; ++i) hit += a(i, c) == b(i, c);
    per_class += double(hit) / 40.0 / 5.0;
  }
  CHECK(avg_acc(b, a) == doctest::Approx(per_class).epsilon(1e-15));
  CHECK_THROWS_AS(avg_acc(Matrix(3, 2), Matrix(3, 3)), DimensionError);
}

TEST_CASE("violation_rate") {
  const PolytopeProperty p{Matrix::from_rows({{1}}), {0.0}, Matrix::from_rows({{1}}), {0.0}};
  const Matrix x = Matrix::from_rows({{-1}, {-0.5}, {0.5}, {1}});
  // Rows 2 and 3 are outside Q and never count.
  CHECK(violation_rate(Matrix::from_rows({{1}, {-1}, {5}, {5}}), x, p) == 0.5);
  CHECK(violation_rate(Matrix::from_rows({{-1}, {-1}, {5}, {5}}), x, p) == 0.0);
  const MutexProperty f(2, {{0, 1}});
  CHECK(violation_rate(Matrix::from_rows({{0.0, 0.0}, {-1, 3}}), Matrix(2, 1), f) == 0.5);
  CHECK(violation_rate(Matrix::from_rows({{1, 1}, {0, 1}}), Matrix(2, 1), f, true) == 0.5);
  CHECK_THROWS(violation_rate(Matrix(0, 1), Matrix(0, 1), p));
}

TEST_CASE("map_regression examples") {
  const PolytopeProperty half{Matrix(0, 1), {}, Matrix::from_rows({{1}}), {0.0}};
  CHECK(map_regression(Vector{-0.3}, half) == Vector{-0.3});
  CHECK(map_regression(Vector{2.0}, half)[0] == doctest::Approx(0.0).epsilon(1e-12));
  const PolytopeProperty empty{Matrix(0, 1), {}, Matrix::from_rows({{1}, {-1}}), {-1.0, -1.0}};
  CHECK_THROWS_AS(map_regression(Vector{0.0}, empty), MapInfeasible);
}

TEST_CASE("map_regression: grid oracle, feasibility and idempotence") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const PolytopeProperty p = gen_random_polytope(2, 2, rng);
    const Vector y = testing::random_vector(rng, 2, -2, 2);
    const Vector proj = map_regression(y, p);
    CHECK(holds_r(p, proj, 1e-9));
    const Vector again = map_regression(proj, p);
    CHECK(linf(sub(again, proj)) <= 1e-9);
    // Any closer feasible point lies in this window around y.
    const double radius = std::sqrt(l2sq(sub(proj, y))) + 0.5;
    const auto grid = testing::grid_minimize([&](const Vector& v) { return std::sqrt(l2sq(sub(v, y))); },
                                             [&](const Vector& v) { return holds_r(p, v, 0.0); },
                                             {y[0] - radius, y[1] - radius}, {y[0] + radius, y[1] + radius}, 201, 24);
    REQUIRE(grid);
    CHECK(std::abs(std::sqrt(l2sq(sub(proj, y))) - grid->value) <= 1e-3);
  }
}

TEST_CASE("map_classification examples") {
  const MutexProperty f(2, {{0, 1}});
  CHECK(map_classification(Vector{0.9, 0.2}, f) == Vector{1, 0});
  CHECK(map_classification(Vector{0.1, 0.2}, f) == Vector{0, 0});
  CHECK(map_classification(Vector{0.9, 0.8}, f) == Vector{1, 0});
  CHECK(map_classification(Vector{0.8, 0.9}, f) == Vector{0, 1});
  // Equal evidence ties break toward the lexicographically smallest vector.
  CHECK(map_classification(Vector{0.7, 0.7}, f) == Vector{0, 1});
  CHECK(map_classification(Vector{0.5, 0.5}, f) == Vector{0, 0});
  CHECK_THROWS(map_classification(Vector{1.2, 0.0}, f));
  CHECK_THROWS_AS(map_classification(Vector{0.2}, f), DimensionError);
}

TEST_CASE("map_classification matches exhaustive enumeration") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 2 + rng.below(11);
    const MutexProperty f = random_mutex(m, 1 + rng.below(2 * m), rng);
    Vector prob(m);
    for (double& v : prob) {
      v = rng.uniform01();
      // Exact ties and clipped extremes.
      if (rng.below(6) == 0) v = 0.5;
      if (rng.below(8) == 0) v = rng.below(2);
    }
    const Vector got = map_classification(prob, f);
    REQUIRE(got == enumerate_map(prob, f, 1e-6));
    CHECK(mutex_holds(f, sub(scale(got, 2.0), Vector(m, 1.0))));
    // Idempotence: the output read as probabilities maps to itself.
    CHECK(map_classification(got, f) == got);
  }
}

TEST_CASE("preprocess_labels") {
  const PolytopeProperty p{Matrix::from_rows({{1, 0}}), {0.0}, Matrix::from_rows({{0, 1}}), {0.5}};
  Dataset d{Matrix::from_rows({{-0.5, 0}, {-0.2, 1}, {0.4, 0.3}, {0.9, 0}}),
            Matrix::from_rows({{0, 0.1}, {0, 0.2}, {0, 3.0}, {0, 0.4}})};
  const MapConfig cfg = MapConfig::for_property(p);
  CHECK(preprocess_labels(d, p, cfg).y == d.y);
  d.y(1, 1) = 2.0;
  const Dataset out = preprocess_labels(d, p, cfg);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t c = 0; c < 2; ++c)
      if (i != 1 || c != 1) CHECK(out.y(i, c) == d.y(i, c));
  CHECK(out.y(1, 1) == doctest::Approx(0.5));
  CHECK(out.x == d.x);
  // Row 2 violates R but lies outside Q.
  CHECK(out.y(2, 1) == 3.0);

  Rng rng(5);
  Dataset big{testing::random_matrix(rng, 300, 2), testing::random_matrix(rng, 300, 2, -2, 2)};
  const PolytopeProperty rp = gen_random_polytope(2, 2, rng);
  CHECK(violation_rate(preprocess_labels(big, rp, cfg).y, big.x, rp) == 0.0);

  Dataset cls{Matrix(200, 1), Matrix(200, 5)};
  for (double& v : cls.y.data()) v = rng.below(2);
  const MutexProperty f(5, {{0, 1}, {1, 2}, {3, 4}});
  const Dataset pc = preprocess_labels(cls, f, MapConfig::for_property(f));
  CHECK(violation_rate(pc.y, pc.x, f, true) == 0.0);
}

TEST_CASE("postprocess_predict is always feasible") {
  Rng rng(6);
  const Mlp net = build_plain(ArchSpec::synthetic(), 2, 2, rng);
  const Matrix x = testing::random_matrix(rng, 1000, 2);
  for (int t = 0; t < 3; ++t) {
    const PolytopeProperty p = gen_random_polytope(2, 2, rng);
    const Matrix y = postprocess_predict(net, x, p, MapConfig::for_property(p));
    CHECK(violation_rate(y, x, p) == 0.0);
  }
  const Mlp cls = build_plain(ArchSpec::classification(), 2, 6, rng);
  const MutexProperty f(6, {{0, 1}, {2, 3}, {1, 4}, {0, 5}});
  const Matrix labels = postprocess_predict(cls, x, f, MapConfig::for_property(f));
  CHECK(violation_rate(labels, x, f, true) == 0.0);
  for (double v : labels.data()) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("oracle_eval") {
  Rng rng(7);
  Dataset d{testing::random_matrix(rng, 200, 2), testing::random_matrix(rng, 200, 2)};
  const PolytopeProperty vacuous{Matrix(0, 2), {}, Matrix(1, 2), {1.0}};
  CHECK(oracle_eval(d, vacuous, MapConfig{}).r2 == 1.0);

  const PolytopeProperty constant{Matrix(0, 2), {}, Matrix::from_rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}),
                                  {0.3, -0.3, 0.1, -0.1}};
  CHECK(*oracle_eval(d, constant, MapConfig{}).r2 <= 0.0);

  // Nested polytopes: adding rows can only lower the oracle score.
  for (int t = 0; t < 10; ++t) {
    PolytopeProperty p = gen_random_polytope(2, 2, rng);
    p.Q = Matrix(0, 2);
    p.q.clear();
    const Vector anchor = map_regression(Vector{0.0, 0.0}, p);
    double prev = 1.0;
    for (int extra = 0; extra < 4; ++extra) {
      const double s = *oracle_eval(d, p, MapConfig{}).r2;
      CHECK(s <= prev + 1e-12);
      prev = s;
      // Keep the anchor feasible so every polytope in the chain is nonempty.
      const Vector a = testing::random_vector(rng, 2);
      p.R.append_row(a);
      p.r.push_back(dot(a, anchor) + rng.uniform(0.0, 0.5));
    }
  }

  Dataset cls{Matrix(50, 1), Matrix(50, 4)};
  for (double& v : cls.y.data()) v = rng.below(2);
  const MutexProperty f(4, {{0, 1}});
  const Metrics m = oracle_eval(cls, f, MapConfig::for_property(f));
  REQUIRE(m.avg_acc);
  CHECK(*m.avg_acc <= 1.0);
  CHECK(m.violation_rate == 0.0);
}

TEST_CASE("MapConfig validation") {
  MapConfig c;
  CHECK_NOTHROW(c.validate());
  c.clip_eps = 0.0;
  CHECK_THROWS(c.validate());
  c.clip_eps = 0.01;
  CHECK_THROWS(c.validate());
}
