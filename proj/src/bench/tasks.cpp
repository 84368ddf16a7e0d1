#include "smle/bench/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smle/core/rng.hpp"

namespace smle {

void SyntheticTask::validate() const {
  if (n < 1) throw std::invalid_argument("SyntheticTask: n must be >= 1");
  if (K.empty()) throw std::invalid_argument("SyntheticTask: K must be non-empty");
  for (int k : K)
    if (k < 1) throw std::invalid_argument("SyntheticTask: exponents must be >= 1");
  if (samples < 10) throw std::invalid_argument("SyntheticTask: need at least 10 samples");
}

Vector synthetic_target(std::span<const double> x, const std::vector<int>& K) {
  double s = 0.0;
  for (double v : x) s += v;
  Vector y;
  for (int k : K) y.push_back(std::pow(s, k));
  return y;
}

Standardizer Standardizer::fit(const Matrix& m) {
  if (m.rows() == 0) throw std::invalid_argument("Standardizer: no rows");
  Standardizer s{Vector(m.cols(), 0.0), Vector(m.cols(), 0.0)};
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) s.mean[c] += m(i, c) / double(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) s.scale[c] += std::pow(m(i, c) - s.mean[c], 2) / double(m.rows());
  for (double& v : s.scale) v = v > 0.0 ? std::sqrt(v) : 1.0;
  return s;
}

Matrix Standardizer::apply(const Matrix& m) const {
  require_dims(m.cols() == mean.size(), "Standardizer: column mismatch");
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out(i, c) = (m(i, c) - mean[c]) / scale[c];
  return out;
}

Matrix Standardizer::invert(const Matrix& m) const {
  require_dims(m.cols() == mean.size(), "Standardizer: column mismatch");
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out(i, c) = m(i, c) * scale[c] + mean[c];
  return out;
}

Dataset gen_synthetic_raw(const SyntheticTask& task) {
  task.validate();
  Rng rng(task.seed);
  Dataset d{Matrix(task.samples, task.n), Matrix(task.samples, task.K.size())};
  for (std::size_t i = 0; i < task.samples; ++i) {
    for (std::size_t j = 0; j < task.n; ++j) d.x(i, j) = rng.uniform(-1.0, 1.0);
    const Vector y = synthetic_target(d.x.row(i), task.K);
    std::copy(y.begin(), y.end(), d.y.row(i).begin());
  }
  return d;
}

namespace {

std::size_t split_point(std::size_t rows, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must be in (0,1)");
  const auto test = static_cast<std::size_t>(std::round(double(rows) * test_fraction));
  if (test == 0 || test >= rows) throw std::invalid_argument("split leaves an empty side");
  return rows - test;
}

}  // namespace

TaskData gen_synthetic(const SyntheticTask& task, double test_fraction) {
  const Dataset raw = gen_synthetic_raw(task);
  const std::size_t cut = split_point(raw.size(), test_fraction);
  TaskData out{raw.slice(0, cut), raw.slice(cut, raw.size()), {}};
  out.y_scale = Standardizer::fit(out.train.y);
  out.train.y = out.y_scale.apply(out.train.y);
  out.test.y = out.y_scale.apply(out.test.y);
  return out;
}

std::vector<PlantedPair> MultilabelTask::resolved_pairs() const {
  if (!planted.empty()) return planted;
  static constexpr double kRates[] = {0.0, 0.1, 0.2};
  std::vector<PlantedPair> out;
  for (std::size_t i = 0; 2 * i + 1 < m; ++i) out.push_back({2 * i, 2 * i + 1, kRates[i % 3]});
  return out;
}

void MultilabelTask::validate() const {
  if (m < 4) throw std::invalid_argument("MultilabelTask: m must be >= 4");
  if (n < 1) throw std::invalid_argument("MultilabelTask: n must be >= 1");
  if (samples < 10) throw std::invalid_argument("MultilabelTask: need at least 10 samples");
  if (!(width > 0.0 && width <= 0.5)) throw std::invalid_argument("MultilabelTask: width must be in (0, 0.5]");
  std::vector<bool> used(m, false);
  for (const PlantedPair& p : resolved_pairs()) {
    if (p.h >= m || p.k >= m || p.h == p.k) throw std::invalid_argument("MultilabelTask: bad planted pair");
    if (used[p.h] || used[p.k]) throw std::invalid_argument("MultilabelTask: a class may be planted in one pair only");
    used[p.h] = used[p.k] = true;
    if (!(p.rate >= 0.0 && p.rate <= width))
      throw std::invalid_argument("MultilabelTask: planted rate must be in [0, width]");
  }
}

Dataset gen_multilabel_raw(const MultilabelTask& task) {
  task.validate();
  // Window start per class and the feature it reads.
  std::vector<double> start(task.m);
  std::vector<std::size_t> feature(task.m);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<bool> placed(task.m, false);
  std::vector<double> rate;
  for (const PlantedPair& p : task.resolved_pairs()) {
    groups.push_back({p.h, p.k});
    rate.push_back(p.rate);
    placed[p.h] = placed[p.k] = true;
  }
  for (std::size_t c = 0; c < task.m; ++c)
    if (!placed[c]) {
      groups.push_back({c});
      rate.push_back(0.0);
    }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double span = groups[g].size() == 2 ? 2.0 * task.width - rate[g] : task.width;
    const double slack = 1.0 - span;
    const double offset = std::fmod(0.13 * double(g / task.n), slack + 1e-12);
    feature[groups[g][0]] = g % task.n;
    start[groups[g][0]] = offset;
    if (groups[g].size() == 2) {
      feature[groups[g][1]] = g % task.n;
      start[groups[g][1]] = offset + task.width - rate[g];
    }
  }

  Rng rng(task.seed);
  Dataset d{Matrix(task.samples, task.n), Matrix(task.samples, task.m)};
  for (std::size_t i = 0; i < task.samples; ++i) {
    for (std::size_t j = 0; j < task.n; ++j) d.x(i, j) = rng.uniform(-1.0, 1.0);
    for (std::size_t c = 0; c < task.m; ++c) {
      const double u = 0.5 * (d.x(i, feature[c]) + 1.0);
      d.y(i, c) = u >= start[c] && u < start[c] + task.width ? 1.0 : 0.0;
    }
  }
  return d;
}

TaskData gen_synthetic_multilabel(const MultilabelTask& task, double test_fraction) {
  const Dataset raw = gen_multilabel_raw(task);
  const std::size_t cut = split_point(raw.size(), test_fraction);
  TaskData out{raw.slice(0, cut), raw.slice(cut, raw.size()), {}};
  out.y_scale = {Vector(task.m, 0.0), Vector(task.m, 1.0)};
  return out;
}

nlohmann::json to_json(const SyntheticTask& t) {
  return {{"kind", "synthetic"}, {"n", t.n}, {"K", t.K}, {"samples", t.samples}, {"seed", t.seed}};
}

nlohmann::json to_json(const MultilabelTask& t) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const PlantedPair& p : t.planted) pairs.push_back({{"h", p.h}, {"k", p.k}, {"rate", p.rate}});
  return {{"kind", "multilabel"}, {"m", t.m},         {"n", t.n},          {"samples", t.samples},
          {"seed", t.seed},       {"width", t.width}, {"planted", pairs}};
}

SyntheticTask synthetic_task_from_json(const nlohmann::json& j) {
  SyntheticTask t;
  t.n = j.value("n", t.n);
  t.K = j.value("K", t.K);
  t.samples = j.value("samples", t.samples);
  t.seed = j.at("seed").get<std::uint64_t>();
  t.validate();
  return t;
}

MultilabelTask multilabel_task_from_json(const nlohmann::json& j) {
  MultilabelTask t;
  t.m = j.value("m", t.m);
  t.n = j.value("n", t.n);
  t.samples = j.value("samples", t.samples);
  t.seed = j.at("seed").get<std::uint64_t>();
  t.width = j.value("width", t.width);
  if (j.contains("planted"))
    for (const auto& p : j.at("planted")) t.planted.push_back({p.at("h"), p.at("k"), p.at("rate")});
  t.validate();
  return t;
}

}  // namespace smle
