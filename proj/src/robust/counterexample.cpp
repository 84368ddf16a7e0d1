#include <algorithm>
#include <cmath>

#include "builder.hpp"
#include "smle/opt/solvers.hpp"
#include "smle/robust/robust.hpp"

namespace smle {

using detail::Builder;
using detail::Terms;

CeQueue::CeQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("CeQueue: capacity must be >= 1");
}

void CeQueue::push(Counterexample ce) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(ce));
}

opt::SolverOptions PdcgConfig::default_solver_options() {
  opt::SolverOptions o;
  o.abs_gap = 1e-10;
  return o;
}

void PdcgConfig::validate(bool mutex) const {
  if (n_it < 1) throw std::invalid_argument("PdcgConfig: n_it must be >= 1");
  if (n_xs < 1) throw std::invalid_argument("PdcgConfig: n_xs must be >= 1");
  if (!(eps >= 0.0 && eps <= 1e-3)) throw std::invalid_argument("PdcgConfig: eps must be in [0, 1e-3]");
  if (mutex && !(eps > 0.0)) throw std::invalid_argument("PdcgConfig: the mutex grounding needs eps > 0");
  if (!(big_m > 0.0)) throw std::invalid_argument("PdcgConfig: big_m must be positive");
  if (!(mutex_tau > 0.0) || !(ce_tol >= 0.0)) throw std::invalid_argument("PdcgConfig: tolerances");
}

void check_dims(const SmleModel& model, const PropertySpec& prop) {
  if (const auto* p = std::get_if<PolytopeProperty>(&prop)) {
    p->validate();
    require_dims(p->input_dim() == model.input_dim(), "property Q width != model input dim");
    require_dims(p->output_dim() == model.output_dim(), "property R width != model output dim");
  } else {
    const auto& m = std::get<MutexProperty>(prop);
    m.validate();
    require_dims(m.num_classes == model.output_dim(), "mutex class count != model output dim");
  }
}

Box reachable_z_box(const SmleModel& model) {
  if (model.h_low.kind == AuxKind::Constant) {
    Box out;
    for (std::size_t i = 0; i < model.embed_dim(); ++i)
      out.emplace_back(model.h_low.constant[i], std::max(model.h_low.constant[i], model.h_up.constant[i]));
    return out;
  }
  const Box l = interval_affine(model.h_low.affine.weight, model.h_low.affine.bias, model.input_box);
  const Box u = interval_affine(model.h_up.affine.weight, model.h_up.affine.bias, model.input_box);
  Box out;
  for (std::size_t i = 0; i < l.size(); ++i) out.emplace_back(l[i].lo, std::max(l[i].hi, u[i].hi));
  return out;
}

double big_m_for(const SmleModel& model) {
  model.validate();
  const Box y = interval_affine(model.g.weight, model.g.bias, reachable_z_box(model));
  double m = 0.0;
  for (const Interval& iv : y) m = std::max(m, iv.magnitude());
  return std::max(2.0 * m, 1e-12);
}

namespace {

// ŷ_k over the z̄ box.
Interval yhat_interval(const AffineMap& g, std::size_t k, const Box& zbox) {
  double lo = g.bias[k], hi = g.bias[k];
  for (std::size_t j = 0; j < zbox.size(); ++j) {
    const double w = g.weight(k, j);
    lo += std::min(w * zbox[j].lo, w * zbox[j].hi);
    hi += std::max(w * zbox[j].lo, w * zbox[j].hi);
  }
  return {lo, hi};
}

bool q_meets_box(const PolytopeProperty& p, const Box& box) {
  opt::LpProblem lp(box.size());
  for (std::size_t i = 0; i < p.Q.rows(); ++i) lp.add_row(p.Q.row(i), opt::Relation::LessEq, p.q[i]);
  for (std::size_t j = 0; j < box.size(); ++j) lp.set_bounds(j, box[j].lo, box[j].hi);
  const opt::Solution s = opt::solve_lp(lp);
  if (s.status == opt::Status::IterLimit) throw SolverLimitError("input-region feasibility LP hit its pivot budget");
  return s.status == opt::Status::Optimal;
}

Vector any_point_in_q(const PolytopeProperty* p, const Box& box) {
  opt::LpProblem lp(box.size());
  if (p)
    for (std::size_t i = 0; i < p->Q.rows(); ++i) lp.add_row(p->Q.row(i), opt::Relation::LessEq, p->q[i]);
  for (std::size_t j = 0; j < box.size(); ++j) lp.set_bounds(j, box[j].lo, box[j].hi);
  const opt::Solution s = opt::solve_lp(lp);
  return s.status == opt::Status::Optimal ? s.x : Vector(box.size(), 0.0);
}

opt::Solution solve_or_throw(const opt::MilpProblem& p, const opt::SolverOptions& o, const char* tag) {
  if (opt::dump_enabled()) opt::dump_problem(p, tag);
  const opt::Solution s = opt::solve_milp(p, o);
  if (s.status == opt::Status::IterLimit || s.status == opt::Status::Unbounded)
    throw SolverLimitError(std::string(tag) + ": counterexample MILP ended with status " + opt::to_string(s.status));
  return s;
}

Counterexample extract(const opt::Solution& s, const detail::Reach& r, const SmleModel& model,
                       const PolytopeProperty* q) {
  Counterexample ce;
  ce.z_bar.assign(s.x.begin() + static_cast<std::ptrdiff_t>(r.z0),
                  s.x.begin() + static_cast<std::ptrdiff_t>(r.z0 + r.nz));
  // Remove solver-tolerance drift outside the box.
  for (std::size_t i = 0; i < r.nz; ++i) ce.z_bar[i] = std::clamp(ce.z_bar[i], r.zbox[i].lo, r.zbox[i].hi);
  if (r.nx > 0)
    ce.x.assign(s.x.begin() + static_cast<std::ptrdiff_t>(r.x0), s.x.begin() + static_cast<std::ptrdiff_t>(r.x0 + r.nx));
  else
    ce.x = any_point_in_q(q, model.input_box);
  ce.strength = s.objective;
  return ce;
}

}  // namespace

std::optional<Counterexample> gen_ce_linear(const SmleModel& model, const PolytopeProperty& prop,
                                            const PdcgConfig& cfg) {
  check_dims(model, prop);
  const bool constant_aux = model.h_low.kind == AuxKind::Constant;
  if (constant_aux && !q_meets_box(prop, model.input_box)) return std::nullopt;

  Builder b;
  const detail::Reach reach = detail::add_reach(b, model, constant_aux ? nullptr : &prop);
  bool any_row = false;
  for (std::size_t k = 0; k < prop.R.rows(); ++k) {
    // v_k = R_k ŷ − r_k = c + dᵀ z̄.
    double c = -prop.r[k];
    Vector d(reach.nz, 0.0);
    for (std::size_t o = 0; o < model.output_dim(); ++o) {
      const double rk = prop.R(k, o);
      if (rk == 0.0) continue;
      c += rk * model.g.bias[o];
      axpy(rk, model.g.weight.row(o), d);
    }
    double vlo = c, vhi = c;
    for (std::size_t j = 0; j < reach.nz; ++j) {
      vlo += std::min(d[j] * reach.zbox[j].lo, d[j] * reach.zbox[j].hi);
      vhi += std::max(d[j] * reach.zbox[j].lo, d[j] * reach.zbox[j].hi);
    }
    if (vhi <= 0.0) continue;
    any_row = true;
    Terms v;
    for (std::size_t j = 0; j < reach.nz; ++j)
      if (d[j] != 0.0) v.emplace_back(reach.z0 + j, d[j]);
    if (vlo >= 0.0) {
      for (auto [j, coef] : v) b.add_objective(j, coef);
      b.constant += c;
      continue;
    }
    // s = max(0, v) via U: s <= vhi U, s <= v − vlo (1 − U).
    const std::size_t s = b.add_var(0.0, vhi);
    const std::size_t u = b.add_var(0.0, 1.0, true);
    b.add_objective(s, 1.0);
    b.add_row({{s, 1.0}, {u, -vhi}}, opt::Relation::LessEq, 0.0);
    Terms row{{s, 1.0}, {u, -vlo}};
    for (auto [j, coef] : v) row.emplace_back(j, -coef);
    b.add_row(row, opt::Relation::LessEq, c - vlo);
  }
  if (!any_row) return std::nullopt;

  const opt::Solution s = solve_or_throw(b.milp(opt::Sense::Maximize), cfg.solver, "linear-ce");
  if (s.status == opt::Status::Infeasible || s.objective <= cfg.ce_tol) return std::nullopt;
  return extract(s, reach, model, &prop);
}

std::optional<Counterexample> gen_ce_mutex(const SmleModel& model, const MutexProperty& prop,
                                           const PdcgConfig& cfg) {
  check_dims(model, prop);
  const double tau = cfg.mutex_tau;
  Builder b;
  const detail::Reach reach = detail::add_reach(b, model, nullptr);
  std::vector<Interval> y;
  for (std::size_t k = 0; k < model.output_dim(); ++k) y.push_back(yhat_interval(model.g, k, reach.zbox));

  std::vector<std::size_t> plus(model.output_dim(), SIZE_MAX);
  const auto indicator = [&](std::size_t k) {
    if (plus[k] != SIZE_MAX) return plus[k];
    plus[k] = b.add_var(0.0, 1.0, true);
    // M I⁺ − M <= ŷ + tau, with M tight for this logit.
    const double m = std::max(0.0, -y[k].lo - tau);
    if (m > 0.0) {
      Terms row{{plus[k], m}};
      for (auto [j, coef] : detail::yhat_terms(model.g, k, reach)) row.emplace_back(j, -coef);
      b.add_row(row, opt::Relation::LessEq, m + tau + model.g.bias[k]);
    }
    return plus[k];
  };

  bool any_pair = false;
  std::vector<std::size_t> active;
  for (auto [h, k] : prop.pairs) {
    const double top = std::min(y[h].hi, y[k].hi);
    if (top + tau <= 0.5 * tau) continue;
    any_pair = true;
    const std::size_t ih = indicator(h), ik = indicator(k);
    const std::size_t im = b.add_var(0.0, 1.0, true);
    active.push_back(im);
    b.add_row({{im, 2.0}, {ih, -1.0}, {ik, -1.0}}, opt::Relation::LessEq, 0.0);
    b.add_row({{im, 1.0}, {ih, -1.0}}, opt::Relation::LessEq, 0.0);
    b.add_row({{im, 1.0}, {ik, -1.0}}, opt::Relation::LessEq, 0.0);
    // t <= min(ŷ_h, ŷ_k)
    const double bottom = std::min(y[h].lo, y[k].lo);
    const std::size_t t = b.add_var(bottom, top);
    for (std::size_t c : {h, k}) {
      Terms row{{t, 1.0}};
      for (auto [j, coef] : detail::yhat_terms(model.g, c, reach)) row.emplace_back(j, -coef);
      b.add_row(row, opt::Relation::LessEq, model.g.bias[c]);
    }
    // w = I^m (t + tau)
    const double wmax = top + tau;
    const double kbig = std::max(0.0, -bottom - tau);
    const std::size_t w = b.add_var(0.0, wmax);
    b.add_objective(w, 1.0);
    b.add_row({{w, 1.0}, {im, -wmax}}, opt::Relation::LessEq, 0.0);
    b.add_row({{w, 1.0}, {t, -1.0}, {im, kbig}}, opt::Relation::LessEq, tau + kbig);
  }
  if (!any_pair) return std::nullopt;

  const opt::Solution s = solve_or_throw(b.milp(opt::Sense::Maximize), cfg.solver, "mutex-ce");
  if (s.status == opt::Status::Infeasible || s.objective <= 0.5 * tau) return std::nullopt;
  Counterexample ce = extract(s, reach, model, nullptr);
  for (std::size_t im : active) ce.strength -= tau * std::round(s.x[im]);
  return ce;
}

VerifyOutcome verify(const SmleModel& model, const PropertySpec& prop, const PdcgConfig& cfg) {
  std::optional<Counterexample> ce;
  if (const auto* p = std::get_if<PolytopeProperty>(&prop)) ce = gen_ce_linear(model, *p, cfg);
  else ce = gen_ce_mutex(model, std::get<MutexProperty>(prop), cfg);
  if (!ce) return Verified{};
  return Inconclusive{std::move(*ce)};
}

Vector closed_form_translation(std::span<const double> r_row, double r_k, std::span<const double> y_hat) {
  require_dims(r_row.size() == y_hat.size(), "closed_form_translation: |R_k| != |y_hat|");
  const double nn = l2sq(r_row);
  if (nn == 0.0) throw std::invalid_argument("closed_form_translation: zero constraint row");
  const double v = dot(r_row, y_hat) - r_k;
  Vector delta(r_row.size(), 0.0);
  if (v <= 0.0) return delta;
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = -r_row[i] * v / nn;
  return delta;
}

}  // namespace smle
