#include <cmath>

#include "builder.hpp"
#include "smle/opt/solvers.hpp"
#include "smle/robust/robust.hpp"

namespace smle {

using detail::Builder;
using detail::Terms;

namespace {

// Orthonormal basis of span{(1, z̄_i)}, modified Gram-Schmidt with one
// re-orthogonalization pass.
std::vector<Vector> basis(const CeQueue& queue) {
  std::vector<Vector> out;
  for (const Counterexample& ce : queue.items()) {
    Vector a{1.0};
    a.insert(a.end(), ce.z_bar.begin(), ce.z_bar.end());
    const double norm0 = std::sqrt(l2sq(a));
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& u : out) axpy(-dot(u, a), u, a);
    const double norm = std::sqrt(l2sq(a));
    if (norm <= 1e-10 * norm0) continue;
    out.push_back(scale(a, 1.0 / norm));
  }
  return out;
}

struct Reduced {
  std::vector<Vector> u;        // basis
  std::vector<Vector> coords;   // c_i = Uᵀ a_i per queued item
  std::vector<Vector> y_hat;    // current logits per queued item
};

Reduced reduce(const AffineMap& g, const CeQueue& queue) {
  if (queue.empty()) throw std::invalid_argument("projection: empty counterexample queue");
  Reduced r;
  r.u = basis(queue);
  for (const Counterexample& ce : queue.items()) {
    require_dims(ce.z_bar.size() == g.in_dim(), "projection: counterexample width != head input dim");
    Vector a{1.0};
    a.insert(a.end(), ce.z_bar.begin(), ce.z_bar.end());
    Vector c;
    for (const Vector& u : r.u) c.push_back(dot(u, a));
    r.coords.push_back(std::move(c));
    r.y_hat.push_back(g.apply(ce.z_bar));
  }
  return r;
}

// θ'_k = θ_k + U β_k for every output k present in `beta`.
AffineMap lift(const AffineMap& g, const Reduced& r, const std::vector<std::pair<std::size_t, Vector>>& beta) {
  AffineMap out = g;
  for (const auto& [k, b] : beta)
    for (std::size_t d = 0; d < r.u.size(); ++d) {
      out.bias[k] += b[d] * r.u[d][0];
      for (std::size_t j = 0; j < g.in_dim(); ++j) out.weight(k, j) += b[d] * r.u[d][j + 1];
    }
  return out;
}

}  // namespace

Projection project_linear(const AffineMap& g, const CeQueue& queue, const PolytopeProperty& prop, double eps,
                          const opt::SolverOptions& solver) {
  prop.validate();
  require_dims(prop.output_dim() == g.out_dim(), "project_linear: R width != head output dim");
  const Reduced r = reduce(g, queue);
  const std::size_t m = g.out_dim();
  const std::size_t d = r.u.size();

  Builder b;
  for (std::size_t v = 0; v < m * d; ++v) {
    b.add_var(-opt::kInf, opt::kInf);
    b.add_quadratic(v, 2.0);
  }
  for (std::size_t i = 0; i < r.coords.size(); ++i)
    for (std::size_t j = 0; j < prop.R.rows(); ++j) {
      Terms row;
      for (std::size_t k = 0; k < m; ++k) {
        if (prop.R(j, k) == 0.0) continue;
        for (std::size_t t = 0; t < d; ++t) row.emplace_back(k * d + t, prop.R(j, k) * r.coords[i][t]);
      }
      const double rhs = prop.r[j] - eps - dot(prop.R.row(j), r.y_hat[i]);
      if (row.empty()) {
        if (rhs < 0.0) throw ProjectionInfeasible("project_linear: a zero row of R is violated");
        continue;
      }
      b.add_row(row, opt::Relation::LessEq, rhs);
    }

  const opt::MiqpProblem p = b.miqp();
  if (opt::dump_enabled()) opt::dump_problem(p, "linear-projection");
  const opt::Solution s = opt::solve_qp(p.qp, solver);
  if (s.status == opt::Status::Infeasible)
    throw ProjectionInfeasible("project_linear: no head satisfies R y <= r - eps on the queued points");
  Projection out{g, 0.0, s.status};
  if (s.status != opt::Status::Optimal) return out;
  std::vector<std::pair<std::size_t, Vector>> beta;
  for (std::size_t k = 0; k < m; ++k)
    beta.emplace_back(k, Vector(s.x.begin() + static_cast<std::ptrdiff_t>(k * d),
                                s.x.begin() + static_cast<std::ptrdiff_t>((k + 1) * d)));
  out.g = lift(g, r, beta);
  out.objective = l2sq(s.x);
  return out;
}

Projection project_mutex(const AffineMap& g, const CeQueue& queue, const MutexProperty& prop, double eps,
                         double big_m, const opt::SolverOptions& solver) {
  prop.validate();
  require_dims(prop.num_classes == g.out_dim(), "project_mutex: class count != head output dim");
  if (!(big_m > 0.0)) throw std::invalid_argument("project_mutex: big_m must be positive");
  const Reduced r = reduce(g, queue);
  const std::size_t d = r.u.size();

  std::vector<std::size_t> classes;
  for (auto [h, k] : prop.pairs) classes.insert(classes.end(), {h, k});
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  Builder b;
  std::vector<std::size_t> beta0(g.out_dim(), SIZE_MAX);
  for (std::size_t k : classes) {
    beta0[k] = b.num_vars();
    for (std::size_t t = 0; t < d; ++t) b.add_quadratic(b.add_var(-opt::kInf, opt::kInf), 2.0);
  }
  for (std::size_t i = 0; i < r.coords.size(); ++i) {
    std::vector<std::size_t> plus(g.out_dim(), SIZE_MAX);
    for (std::size_t k : classes) {
      plus[k] = b.add_var(0.0, 1.0, true);
      // ŷ'_ik <= M I⁺_ik − εM
      Terms row{{plus[k], -big_m}};
      for (std::size_t t = 0; t < d; ++t) row.emplace_back(beta0[k] + t, r.coords[i][t]);
      b.add_row(row, opt::Relation::LessEq, -eps * big_m - r.y_hat[i][k]);
    }
    for (auto [h, k] : prop.pairs) b.add_row({{plus[h], 1.0}, {plus[k], 1.0}}, opt::Relation::LessEq, 1.0);
  }

  const opt::MiqpProblem p = b.miqp();
  if (opt::dump_enabled()) opt::dump_problem(p, "mutex-projection");
  const opt::Solution s = opt::solve_miqp(p, solver);
  if (s.status == opt::Status::Infeasible)
    throw std::logic_error("project_mutex: MIQP reported infeasible; all-negative logits should always be feasible");
  Projection out{g, 0.0, s.status};
  if (s.status != opt::Status::Optimal) return out;
  std::vector<std::pair<std::size_t, Vector>> beta;
  double obj = 0.0;
  for (std::size_t k : classes) {
    Vector bk(s.x.begin() + static_cast<std::ptrdiff_t>(beta0[k]),
              s.x.begin() + static_cast<std::ptrdiff_t>(beta0[k] + d));
    obj += l2sq(bk);
    beta.emplace_back(k, std::move(bk));
  }
  out.g = lift(g, r, beta);
  out.objective = obj;
  return out;
}

}  // namespace smle
