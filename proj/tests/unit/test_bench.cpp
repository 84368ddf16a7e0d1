#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "smle/bench/suite.hpp"
#include "smle/model/serialize.hpp"

using namespace smle;

namespace {

std::size_t count_fields(const std::string& line) {
  std::size_t n = 1;
  bool in_quotes = false;
  for (char c : line) {
    if (c == '"') in_quotes = !in_quotes;
    if (c == ',' && !in_quotes) ++n;
  }
  return n;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

RunConfig small_synthetic(std::uint64_t task_seed, std::uint64_t prop_seed) {
  SyntheticTask t{2, {1, 2}, 300, task_seed};
  RunConfig c = RunConfig::defaults_for(t);
  c.property = RandomPolytopeSource{prop_seed};
  c.seed = 3;
  return c;
}

PolytopeProperty vacuous(std::size_t n, std::size_t m) {
  // Every y satisfies 0·y <= 1.
  return {Matrix(1, n), Vector{1.0}, Matrix(1, m), Vector{1.0}};
}

}  // namespace

TEST_CASE("synthetic_target examples") {
  CHECK(synthetic_target(Vector{0.5, 0.5}, {1, 2}) == Vector{1.0, 1.0});
  CHECK(synthetic_target(Vector{0.0, 0.0, 0.0}, {1, 2, 3, 4}) == Vector{0.0, 0.0, 0.0, 0.0});
  const Vector y = synthetic_target(Vector{0.3, -0.1, 0.6}, {3, 4});
  CHECK(y[0] == doctest::Approx(std::pow(0.8, 3)).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(std::pow(0.8, 4)).epsilon(1e-14));
}

TEST_CASE("synthetic inputs match uniform[-1,1] moments") {
  const SyntheticTask t{3, {1}, 20000, 42};
  const Dataset d = gen_synthetic_raw(t);
  REQUIRE(d.size() == 20000);
  const double n = static_cast<double>(d.size());
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(std::abs(d.x(i, j)) <= 1.0);
      s += d.x(i, j);
      s2 += d.x(i, j) * d.x(i, j);
    }
    // E[x] = 0, Var[x] = 1/3; E[x²] = 1/3, Var[x²] = 1/5 − 1/9.
    CHECK(std::abs(s / n) <= 3.0 * std::sqrt(1.0 / 3.0 / n));
    CHECK(std::abs(s2 / n - 1.0 / 3.0) <= 3.0 * std::sqrt((0.2 - 1.0 / 9.0) / n));
  }
  for (std::size_t i = 0; i < 50; ++i) CHECK(d.y(i, 0) == doctest::Approx(d.x(i, 0) + d.x(i, 1) + d.x(i, 2)));
}

TEST_CASE("standardization is fitted on the train split only") {
  const SyntheticTask t{2, {1, 2}, 500, 9};
  const Dataset raw = gen_synthetic_raw(t);
  const TaskData d = gen_synthetic(t);
  CHECK(d.train.size() == 400);
  CHECK(d.test.size() == 100);
  for (std::size_t j = 0; j < 2; ++j) {
    double mu = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < 400; ++i) mu += raw.y(i, j);
    mu /= 400.0;
    for (std::size_t i = 0; i < 400; ++i) m2 += (raw.y(i, j) - mu) * (raw.y(i, j) - mu);
    const double sd = std::sqrt(m2 / 400.0);
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(d.test.y(i, j) == doctest::Approx((raw.y(400 + i, j) - mu) / sd).epsilon(1e-12));
      CHECK(d.test.x(i, j) == raw.x(400 + i, j));
    }
  }
}

TEST_CASE("Standardizer round trip and constant columns") {
  const Matrix m = Matrix::from_rows({{1.0, 5.0}, {3.0, 5.0}, {5.0, 5.0}});
  const Standardizer s = Standardizer::fit(m);
  CHECK(s.mean == Vector{3.0, 5.0});
  CHECK(s.scale[0] == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(s.scale[1] == 1.0);
  const Matrix back = s.invert(s.apply(m));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(back(i, j) == doctest::Approx(m(i, j)).epsilon(1e-14));
  CHECK_THROWS(Standardizer::fit(Matrix(0, 2)));
}

TEST_CASE("multilabel generator plants co-occurrence rates") {
  MultilabelTask t;
  t.m = 8;
  t.samples = 10000;
  t.seed = 5;
  t.planted = {{0, 1, 0.0}, {2, 3, 0.1}, {4, 5, 0.25}};
  const Dataset d = gen_multilabel_raw(t);
  const double n = static_cast<double>(d.size());
  std::vector<double> marginal(t.m, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t c = 0; c < t.m; ++c) {
      const double v = d.y(i, c);
      REQUIRE((v == 0.0 || v == 1.0));
      marginal[c] += v / n;
    }
  for (std::size_t c = 0; c < t.m; ++c) CHECK(std::abs(marginal[c] - t.width) <= 0.05);
  for (const PlantedPair& p : t.planted) {
    double both = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) both += d.y(i, p.h) * d.y(i, p.k);
    if (p.rate == 0.0) CHECK(both == 0.0);
    CHECK(std::abs(both / n - p.rate) <= 0.05);
  }
}

TEST_CASE("multilabel generator gives non-trivial mutex properties") {
  MultilabelTask t;
  t.seed = 2;
  const TaskData d = gen_synthetic_multilabel(t);
  const std::size_t all_pairs = t.m * (t.m - 1) / 2;
  std::size_t prev = 0;
  for (double q : {0.0, 0.3, 0.6}) {
    const MutexProperty f = gen_mutex_property(d.train.y, q);
    CHECK(!f.pairs.empty());
    CHECK(f.pairs.size() < all_pairs);
    CHECK(f.pairs.size() >= prev);
    prev = f.pairs.size();
  }
}

TEST_CASE("multilabel task validation") {
  MultilabelTask t;
  t.m = 3;
  CHECK_THROWS(t.validate());
  t = {};
  t.planted = {{0, 1, 0.5}};
  CHECK_THROWS(t.validate());
  t.planted = {{0, 1, 0.1}, {1, 2, 0.1}};
  CHECK_THROWS(t.validate());
  t.planted = {{0, 0, 0.1}};
  CHECK_THROWS(t.validate());
}

TEST_CASE("RunConfig JSON round trip") {
  RunConfig c = small_synthetic(4, 2);
  c.train.lr = 0.003;
  c.pdcg.n_xs = 3;
  const nlohmann::json j = to_json(c);
  CHECK(to_json(run_config_from_json(j)) == j);

  MultilabelTask ml;
  ml.m = 6;
  ml.seed = 8;
  ml.planted = {{0, 1, 0.0}};
  RunConfig cm = RunConfig::defaults_for(ml);
  cm.seed = 1;
  cm.property = MutexQuantileSource{0.3};
  CHECK(to_json(run_config_from_json(to_json(cm))) == to_json(cm));

  RunConfig ci = c;
  ci.property = PropertySpec{vacuous(2, 2)};
  CHECK(to_json(run_config_from_json(to_json(ci))) == to_json(ci));

  nlohmann::json no_seed = j;
  no_seed.erase("seed");
  CHECK_THROWS(run_config_from_json(no_seed));
  nlohmann::json bad = j;
  bad["train"]["val_split"] = 1.5;
  CHECK_THROWS(run_config_from_json(bad));
}

TEST_CASE("oracle on a vacuous property is perfect") {
  RunConfig c = small_synthetic(1, 0);
  c.property = PropertySpec{vacuous(2, 2)};
  const RunOutcome o = run_experiment(c, Method::Oracle);
  REQUIRE(o.metrics.r2);
  CHECK(*o.metrics.r2 == 1.0);
  CHECK(o.metrics.violation_rate == 0.0);
  CHECK(o.metrics.guarantee == GuaranteeTag::NotApplicable);
}

TEST_CASE("run_experiment is deterministic apart from wall time") {
  const RunConfig c = small_synthetic(2, 1);
  for (Method m : {Method::Smle, Method::Preprocess, Method::Postprocess, Method::Unconstrained}) {
    CAPTURE(to_string(m));
    RunOutcome a = run_experiment(c, m);
    RunOutcome b = run_experiment(c, m);
    a.metrics.wall_time = b.metrics.wall_time = 0.0;
    CHECK(a.metrics == b.metrics);
    if (m == Method::Smle) {
      CHECK(serialize(*a.smle_model) == serialize(*b.smle_model));
    } else {
      CHECK(*a.plain_model == *b.plain_model);
    }
  }
}

TEST_CASE("smle runs always report a guarantee and guaranteed runs never violate") {
  for (std::uint64_t p : {0, 1, 2}) {
    const RunOutcome o = run_experiment(small_synthetic(3, p), Method::Smle);
    CHECK(o.metrics.guarantee != GuaranteeTag::NotApplicable);
    CHECK(*o.metrics.r2 <= 1.0);
    if (o.metrics.guarantee == GuaranteeTag::Guaranteed) {
      CHECK(o.metrics.violation_rate == 0.0);
      CHECK(is_verified(verify(*o.smle_model, o.property)));
    }
  }
  MultilabelTask t;
  t.samples = 300;
  t.seed = 4;
  RunConfig c = RunConfig::defaults_for(t);
  c.seed = 2;
  c.train.max_epochs = 20;
  const RunOutcome o = run_experiment(c, Method::Smle);
  CHECK(o.metrics.guarantee != GuaranteeTag::NotApplicable);
  REQUIRE(o.metrics.avg_acc);
  CHECK(*o.metrics.avg_acc >= 0.0);
  CHECK(*o.metrics.avg_acc <= 1.0);
}

TEST_CASE("baselines report metrics in range") {
  const RunConfig c = small_synthetic(5, 0);
  for (Method m : {Method::Preprocess, Method::Postprocess, Method::Oracle, Method::Unconstrained}) {
    const Metrics r = run_experiment(c, m).metrics;
    CHECK(r.guarantee == GuaranteeTag::NotApplicable);
    CHECK(*r.r2 <= 1.0);
    CHECK(r.violation_rate >= 0.0);
    CHECK(r.violation_rate <= 1.0);
    if (m == Method::Postprocess || m == Method::Oracle) CHECK(r.violation_rate == 0.0);
  }
}

TEST_CASE("errors carry method, task and property context") {
  RunConfig c = small_synthetic(1, 0);
  c.property = PropertySpec{vacuous(3, 2)};
  try {
    run_experiment(c, Method::Preprocess);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("preprocess") != std::string::npos);
    CHECK(msg.find("synthetic-n2-k12-s1") != std::string::npos);
    CHECK(msg.find("inline-polytope") != std::string::npos);
  }
  CHECK_THROWS(method_from_string("lasso"));
  CHECK(method_from_string("postprocess") == Method::Postprocess);
}

TEST_CASE("rank_polytopes orders by decreasing oracle score") {
  const TaskData d = gen_synthetic(SyntheticTask{2, {1, 2}, 300, 6});
  const auto ranked = rank_polytopes(d, 6);
  REQUIRE(ranked.size() == 6);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    seeds.insert(ranked[i].seed);
    if (i > 0) CHECK(ranked[i - 1].oracle_r2 >= ranked[i].oracle_r2);
    const PropertySpec p = resolve_property(RandomPolytopeSource{ranked[i].seed}, d);
    CHECK(*oracle_eval(d.test, p, MapConfig::for_property(p)).r2 == ranked[i].oracle_r2);
  }
  CHECK(seeds.size() == 6);
}

TEST_CASE("suite builders") {
  SuiteOptions opt;
  opt.quick = true;
  const auto syn = synthetic_suite(opt);
  CHECK(syn.size() == 2 * 2 * 3 * 5);
  const auto mux = mutex_suite(opt);
  CHECK(mux.size() == 2 * 2 * 5);
  std::set<std::string> ids;
  for (const auto& c : syn) ids.insert(c.id);
  for (const auto& c : mux) ids.insert(c.id);
  CHECK(ids.size() == syn.size() + mux.size());
  for (const auto& c : mux) CHECK(std::holds_alternative<MutexQuantileSource>(c.cfg.property));
  CHECK(syn.front().difficulty == 0);

  opt.pool = 4;
  opt.picks = 2;
  CHECK(synthetic_suite(opt).size() == 2 * 2 * 2 * 5);
  opt.picks = 9;
  CHECK(synthetic_suite(opt).size() == 2 * 2 * 3 * 5);
}

TEST_CASE("run_suite writes ordered csv rows, logs and models") {
  const auto dir = std::filesystem::temp_directory_path() / "smle_suite_test";
  std::filesystem::remove_all(dir);

  std::vector<Cell> cells;
  const RunConfig good = small_synthetic(7, 0);
  cells.push_back({"a_smle", good, Method::Smle, 0});
  cells.push_back({"b_oracle", good, Method::Oracle, 0});
  RunConfig broken = good;
  broken.property = PropertySpec{vacuous(5, 2)};
  cells.push_back({"c_broken", broken, Method::Preprocess, 1});
  cells.push_back({"d_post", good, Method::Postprocess, 0});

  const auto results = run_suite(cells, dir, 2);
  REQUIRE(results.size() == 4);
  const auto lines = read_lines(dir / "metrics.csv");
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == csv_header());
  const std::size_t cols = count_fields(lines[0]);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(results[i].cell.id == cells[i].id);
    CHECK(lines[i + 1] == csv_row(results[i]));
    CHECK(count_fields(lines[i + 1]) == cols);
    CHECK(lines[i + 1].rfind(std::string(kMetricsSchema) + "," + cells[i].id + ",", 0) == 0);
    CHECK(std::filesystem::exists(dir / "runs" / (cells[i].id + ".jsonl")));
  }
  CHECK(std::filesystem::exists(dir / "models" / "a_smle.smle"));
  CHECK(!std::filesystem::exists(dir / "models" / "b_oracle.smle"));
  CHECK(results[2].error.find("preprocess") != std::string::npos);
  CHECK(!results[2].metrics);
  CHECK(suite_exit_code(results) == 1);

  std::vector<CellResult> ok{results[0], results[1], results[3]};
  CHECK(suite_exit_code(ok) == (results[0].metrics->guarantee == GuaranteeTag::Guaranteed ? 0 : 1));
  ok[0].metrics->guarantee = GuaranteeTag::Unguaranteed;
  CHECK(suite_exit_code(ok) == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv quoting keeps the column count") {
  CellResult r{{"x", small_synthetic(1, 0), Method::Oracle, 0}, std::nullopt, "bad \"thing\", with comma\nnewline"};
  const std::string row = csv_row(r);
  CHECK(count_fields(row) == count_fields(csv_header()));
  CHECK(row.find('\n') == std::string::npos);
}
