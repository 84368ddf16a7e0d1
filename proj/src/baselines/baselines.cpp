#include "smle/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "smle/opt/solvers.hpp"

namespace smle {

void MapConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps <= 1e-3)) throw std::invalid_argument("MapConfig: clip_eps must be in (0, 1e-3]");
}

MapConfig MapConfig::for_property(const PropertySpec& prop) {
  MapConfig c;
  c.likelihood = std::holds_alternative<PolytopeProperty>(prop) ? Likelihood::GaussianMse : Likelihood::CategoricalBce;
  return c;
}

Vector map_regression(std::span<const double> y, const PolytopeProperty& prop, const opt::SolverOptions& solver) {
  prop.validate();
  require_dims(y.size() == prop.output_dim(), "map_regression: |y| != R width");
  if (holds_r(prop, y, 0.0)) return Vector(y.begin(), y.end());
  const std::size_t m = y.size();
  opt::QpProblem qp(m);
  for (std::size_t i = 0; i < m; ++i) {
    qp.h(i, i) = 2.0;
    qp.c[i] = -2.0 * y[i];
  }
  qp.constant = l2sq(y);
  for (std::size_t k = 0; k < prop.R.rows(); ++k) qp.add_row(prop.R.row(k), opt::Relation::LessEq, prop.r[k]);
  const opt::Solution s = opt::solve_qp(qp, solver);
  if (s.status == opt::Status::Infeasible) throw MapInfeasible("map_regression: {y : R y <= r} is empty");
  if (s.status != opt::Status::Optimal)
    throw std::runtime_error("map_regression: QP ended with status " + opt::to_string(s.status));
  return s.x;
}

Vector map_classification(std::span<const double> y_prob, const MutexProperty& prop, double clip_eps) {
  prop.validate();
  require_dims(y_prob.size() == prop.num_classes, "map_classification: |y| != class count");
  if (!(clip_eps > 0.0)) throw std::invalid_argument("map_classification: clip_eps must be positive");
  const std::size_t m = y_prob.size();
  // Choosing y'_j = 1 gains log max(ε, p) − log max(ε, 1 − p).
  Vector w(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(y_prob[j] >= 0.0 && y_prob[j] <= 1.0)) throw std::invalid_argument("map_classification: probability outside [0,1]");
    w[j] = std::log(std::max(clip_eps, y_prob[j])) - std::log(std::max(clip_eps, 1.0 - y_prob[j]));
  }
  Vector best(m);
  for (std::size_t j = 0; j < m; ++j) best[j] = w[j] > 0.0 ? 1.0 : 0.0;
  bool feasible = true;
  for (auto [h, k] : prop.pairs) feasible = feasible && best[h] + best[k] <= 1.0;
  if (feasible) return best;

  opt::MilpProblem p{opt::LpProblem(m), {}};
  p.lp.sense = opt::Sense::Maximize;
  p.lp.c = w;
  for (std::size_t j = 0; j < m; ++j) {
    p.lp.set_bounds(j, 0.0, 1.0);
    p.binaries.push_back(j);
  }
  for (auto [h, k] : prop.pairs) p.lp.add_row({{h, 1.0}, {k, 1.0}}, opt::Relation::LessEq, 1.0);
  opt::SolverOptions o;
  o.abs_gap = 1e-12;
  const opt::Solution s = opt::solve_milp(p, o);
  if (s.status != opt::Status::Optimal)
    throw std::runtime_error("map_classification: MILP ended with status " + opt::to_string(s.status));
  for (std::size_t j = 0; j < m; ++j) best[j] = std::round(s.x[j]);
  const double target = dot(w, best) - 1e-9 * std::max(1.0, std::abs(dot(w, best)));

  // Lexicographic refinement among optimal vectors.
  p.lp.add_row(w, opt::Relation::GreaterEq, target);
  for (std::size_t j = 0; j < m; ++j) {
    if (best[j] == 1.0) {
      opt::MilpProblem trial = p;
      trial.lp.set_bounds(j, 0.0, 0.0);
      const opt::Solution t = opt::solve_milp(trial, o);
      if (t.status == opt::Status::Optimal)
        for (std::size_t i = 0; i < m; ++i) best[i] = std::round(t.x[i]);
    }
    p.lp.set_bounds(j, best[j], best[j]);
  }
  return best;
}

Dataset preprocess_labels(const Dataset& data, const PropertySpec& prop, const MapConfig& cfg) {
  data.validate();
  cfg.validate();
  Dataset out = data;
  if (const auto* p = std::get_if<PolytopeProperty>(&prop)) {
    require_dims(p->input_dim() == data.input_dim() && p->output_dim() == data.output_dim(),
                 "preprocess_labels: property dims do not match the dataset");
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!holds_q(*p, data.x.row(i))) continue;
      const Vector y = map_regression(data.y.row(i), *p);
      std::copy(y.begin(), y.end(), out.y.row(i).begin());
    }
  } else {
    const auto& m = std::get<MutexProperty>(prop);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Vector y = map_classification(data.y.row(i), m, cfg.clip_eps);
      std::copy(y.begin(), y.end(), out.y.row(i).begin());
    }
  }
  return out;
}

Matrix postprocess_outputs(const Matrix& raw, const Matrix& x, const PropertySpec& prop, const MapConfig& cfg) {
  cfg.validate();
  require_dims(raw.rows() == x.rows(), "postprocess: row mismatch");
  Matrix out = raw;
  if (const auto* p = std::get_if<PolytopeProperty>(&prop)) {
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      if (!holds_q(*p, x.row(i))) continue;
      const Vector y = map_regression(raw.row(i), *p);
      std::copy(y.begin(), y.end(), out.row(i).begin());
    }
    return out;
  }
  const auto& m = std::get<MutexProperty>(prop);
  Vector prob(raw.cols());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const auto row = raw.row(i);
    for (std::size_t k = 0; k < prob.size(); ++k) prob[k] = 1.0 / (1.0 + std::exp(-row[k]));
    const Vector y = map_classification(prob, m, cfg.clip_eps);
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  return out;
}

Matrix postprocess_predict(const Mlp& model, const Matrix& x, const PropertySpec& prop, const MapConfig& cfg) {
  return postprocess_outputs(predict(model, x), x, prop, cfg);
}

Metrics oracle_eval(const Dataset& data, const PropertySpec& prop, const MapConfig& cfg) {
  const Dataset mapped = preprocess_labels(data, prop, cfg);
  Metrics out;
  if (std::holds_alternative<PolytopeProperty>(prop)) out.r2 = r2(mapped.y, data.y);
  else out.avg_acc = avg_acc(mapped.y, data.y);
  out.violation_rate = violation_rate(mapped.y, data.x, prop, true);
  out.validate();
  return out;
}

}  // namespace smle
