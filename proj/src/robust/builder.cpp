#include "builder.hpp"

#include <algorithm>

namespace smle::detail {

std::size_t Builder::add_var(double lo, double hi, bool binary) {
  lower_.push_back(lo);
  upper_.push_back(hi);
  obj_.push_back(0.0);
  if (binary) binaries_.push_back(lower_.size() - 1);
  return lower_.size() - 1;
}

void Builder::add_row(const Terms& terms, opt::Relation rel, double rhs) { rows_.push_back({terms, {rel, rhs}}); }

opt::LinearSystem Builder::system() const {
  opt::LinearSystem sys(num_vars());
  sys.lower = lower_;
  sys.upper = upper_;
  Vector dense(num_vars());
  for (const auto& [terms, rr] : rows_) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (auto [j, v] : terms) dense[j] += v;
    sys.add_row(dense, rr.first, rr.second);
  }
  return sys;
}

opt::MilpProblem Builder::milp(opt::Sense sense) const {
  opt::MilpProblem p{opt::LpProblem(num_vars()), binaries_};
  static_cast<opt::LinearSystem&>(p.lp) = system();
  p.lp.c = obj_;
  p.lp.constant = constant;
  p.lp.sense = sense;
  return p;
}

opt::MiqpProblem Builder::miqp() const {
  opt::MiqpProblem p{opt::QpProblem(num_vars()), binaries_};
  static_cast<opt::LinearSystem&>(p.qp) = system();
  p.qp.c = obj_;
  p.qp.constant = constant;
  for (auto [j, h] : quad_) p.qp.h(j, j) += h;
  return p;
}

Reach add_reach(Builder& b, const SmleModel& model, const PolytopeProperty* q) {
  Reach r;
  r.nz = model.embed_dim();
  const bool affine = model.h_low.kind == AuxKind::Affine;
  const Box& box = model.input_box;

  if (!affine) {
    r.z0 = b.num_vars();
    for (std::size_t i = 0; i < r.nz; ++i) {
      const double lo = model.h_low.constant[i];
      const double hi = std::max(lo, model.h_up.constant[i]);
      r.zbox.emplace_back(lo, hi);
      b.add_var(lo, hi);
    }
    return r;
  }

  const AffineMap& L = model.h_low.affine;
  const AffineMap& U = model.h_up.affine;
  const Box lint = interval_affine(L.weight, L.bias, box);
  const Box uint = interval_affine(U.weight, U.bias, box);
  Matrix dw(L.weight.rows(), L.weight.cols());
  for (std::size_t k = 0; k < dw.data().size(); ++k) dw.data()[k] = U.weight.data()[k] - L.weight.data()[k];
  const Box dint = interval_affine(dw, sub(U.bias, L.bias), box);

  r.nx = box.size();
  r.x0 = b.num_vars();
  for (const Interval& iv : box) b.add_var(iv.lo, iv.hi);
  if (q) {
    for (std::size_t i = 0; i < q->Q.rows(); ++i) {
      Terms t;
      for (std::size_t j = 0; j < r.nx; ++j)
        if (q->Q(i, j) != 0.0) t.emplace_back(r.x0 + j, q->Q(i, j));
      b.add_row(t, opt::Relation::LessEq, q->q[i]);
    }
  }
  r.z0 = b.num_vars();
  for (std::size_t i = 0; i < r.nz; ++i) {
    r.zbox.emplace_back(lint[i].lo, std::max(lint[i].hi, uint[i].hi));
    b.add_var(r.zbox[i].lo, r.zbox[i].hi);
  }

  // z̄_i − A x {rel} b for one aux row.
  const auto aux_row = [&](std::size_t i, const AffineMap& a, Terms extra, opt::Relation rel, double rhs) {
    Terms t{{r.z0 + i, 1.0}};
    for (std::size_t j = 0; j < r.nx; ++j)
      if (a.weight(i, j) != 0.0) t.emplace_back(r.x0 + j, -a.weight(i, j));
    for (auto e : extra) t.push_back(e);
    b.add_row(t, rel, rhs + a.bias[i]);
  };

  for (std::size_t i = 0; i < r.nz; ++i) {
    aux_row(i, L, {}, opt::Relation::GreaterEq, 0.0);
    const double dlo = dint[i].lo, dhi = dint[i].hi;
    if (dlo >= 0.0) {
      aux_row(i, U, {}, opt::Relation::LessEq, 0.0);
    } else if (dhi <= 0.0) {
      aux_row(i, L, {}, opt::Relation::LessEq, 0.0);
    } else {
      // B = 1 selects the lower bound (degenerate side), B = 0 the upper one.
      const std::size_t bi = b.add_var(0.0, 1.0, true);
      aux_row(i, L, {{bi, dhi}}, opt::Relation::LessEq, dhi);
      aux_row(i, U, {{bi, dlo}}, opt::Relation::LessEq, 0.0);
    }
  }
  return r;
}

Terms yhat_terms(const AffineMap& g, std::size_t k, const Reach& reach) {
  Terms t;
  for (std::size_t j = 0; j < reach.nz; ++j)
    if (g.weight(k, j) != 0.0) t.emplace_back(reach.z0 + j, g.weight(k, j));
  return t;
}

}  // namespace smle::detail
