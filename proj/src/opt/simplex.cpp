#include <algorithm>
#include <cmath>

#include "smle/opt/solvers.hpp"

namespace smle::opt {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;
constexpr std::size_t kDegenerateRunBeforeBland = 50;

// How an original variable is expressed through nonnegative standard columns.
struct VarMap {
  enum class Kind { Shift, Mirror, Split } kind = Kind::Shift;
  std::size_t col = 0;   // primary standard column
  std::size_t col2 = 0;  // negative part for Split
  double offset = 0.0;   // lo for Shift, hi for Mirror
};

struct StdRow {
  Vector coeffs;  // over structural standard columns
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
  double sign = 1.0;          // multiplier applied to the source row
  std::ptrdiff_t source = -1;  // original row index, -1 for a bound row
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0), obj_(cols + 1, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double rhs(std::size_t i) const { return at(i, n_); }
  double reduced_cost(std::size_t j) const { return obj_[j]; }
  double objective() const { return -obj_[n_]; }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  std::vector<std::size_t> basis;

  void set_costs(const Vector& cost) {
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = cost[j];
    obj_[n_] = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) obj_[j] -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / at(r, s);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) *= inv;
    at(r, s) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, s);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, s) = 0.0;
    }
    const double f = obj_[s];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= n_; ++j) obj_[j] -= f * at(r, j);
      obj_[s] = 0.0;
    }
    basis[r] = s;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
  std::vector<double> obj_;
};

enum class PhaseResult { Optimal, Unbounded, IterLimit };

// Runs primal simplex on the tableau with the currently loaded costs.
// Columns with `enterable[j] == false` never enter the basis.
PhaseResult run_phase(Tableau& tab, const std::vector<bool>& enterable, std::size_t& pivots,
                      std::size_t max_pivots) {
  bool bland = false;
  std::size_t degenerate_run = 0;
  while (true) {
    std::size_t enter = tab.cols();
    double best = -kCostTol;
    for (std::size_t j = 0; j < tab.cols(); ++j) {
      if (!enterable[j]) continue;
      const double d = tab.reduced_cost(j);
      if (bland) {
        if (d < -kCostTol) {
          enter = j;
          break;
        }
      } else if (d < best) {
        best = d;
        enter = j;
      }
    }
    if (enter == tab.cols()) return PhaseResult::Optimal;
    if (pivots >= max_pivots) return PhaseResult::IterLimit;

    std::size_t leave = tab.rows();
    double best_ratio = kInf;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const double a = tab.at(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = std::max(tab.rhs(i), 0.0) / a;
      if (leave == tab.rows() || ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        leave = i;
      } else if (ratio <= best_ratio + 1e-12) {
        const bool better = bland ? tab.basis[i] < tab.basis[leave] : a > tab.at(leave, enter);
        if (better) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
    }
    if (leave == tab.rows()) return PhaseResult::Unbounded;

    if (best_ratio <= 1e-12) {
      if (++degenerate_run >= kDegenerateRunBeforeBland) bland = true;
    } else {
      degenerate_run = 0;
    }
    tab.pivot(leave, enter);
    ++pivots;
  }
}

}  // namespace

Solution solve_lp(const LpProblem& p, const SolverOptions& opt) {
  p.validate();
  const std::size_t n = p.num_vars();
  const double dir = p.sense == Sense::Minimize ? 1.0 : -1.0;

  for (std::size_t j = 0; j < n; ++j) {
    if (p.lower[j] > p.upper[j]) {
      // Contradictory bounds: certificate is empty over rows but the box itself is empty.
      Solution s;
      s.status = Status::Infeasible;
      s.farkas.assign(p.num_rows(), 0.0);
      return s;
    }
  }

  // Variable substitution into nonnegative standard columns.
  std::vector<VarMap> vmap(n);
  std::size_t ns = 0;
  std::vector<std::pair<std::size_t, double>> bound_rows;  // (std col, upper - lower)
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = p.lower[j];
    const double hi = p.upper[j];
    if (std::isfinite(lo)) {
      vmap[j] = {VarMap::Kind::Shift, ns++, 0, lo};
      if (std::isfinite(hi)) bound_rows.emplace_back(vmap[j].col, hi - lo);
    } else if (std::isfinite(hi)) {
      vmap[j] = {VarMap::Kind::Mirror, ns++, 0, hi};
    } else {
      vmap[j] = {VarMap::Kind::Split, ns, ns + 1, 0.0};
      ns += 2;
    }
  }

  auto map_row = [&](std::span<const double> row, double rhs) {
    Vector coeffs(ns, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = row[j];
      if (a == 0.0) continue;
      const VarMap& vm = vmap[j];
      switch (vm.kind) {
        case VarMap::Kind::Shift:
          coeffs[vm.col] += a;
          rhs -= a * vm.offset;
          break;
        case VarMap::Kind::Mirror:
          coeffs[vm.col] -= a;
          rhs -= a * vm.offset;
          break;
        case VarMap::Kind::Split:
          coeffs[vm.col] += a;
          coeffs[vm.col2] -= a;
          break;
      }
    }
    return std::pair{coeffs, rhs};
  };

  std::vector<StdRow> rows;
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    auto [coeffs, rhs] = map_row(p.a.row(i), p.b[i]);
    rows.push_back({std::move(coeffs), p.rel[i], rhs, 1.0, static_cast<std::ptrdiff_t>(i)});
  }
  for (auto [col, width] : bound_rows) {
    Vector coeffs(ns, 0.0);
    coeffs[col] = 1.0;
    rows.push_back({std::move(coeffs), Relation::LessEq, width, 1.0, -1});
  }
  for (StdRow& r : rows) {
    if (r.rhs < 0.0) {
      for (double& v : r.coeffs) v = -v;
      r.rhs = -r.rhs;
      r.sign = -1.0;
      if (r.rel == Relation::LessEq) r.rel = Relation::GreaterEq;
      else if (r.rel == Relation::GreaterEq) r.rel = Relation::LessEq;
    }
  }

  // Column layout: [structural | slack/surplus | artificial].
  const std::size_t m = rows.size();
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (const StdRow& r : rows) {
    if (r.rel != Relation::Equal) ++n_slack;
    if (r.rel != Relation::LessEq) ++n_art;
  }
  const std::size_t total = ns + n_slack + n_art;
  Tableau tab(m, total);
  tab.basis.assign(m, 0);
  std::vector<std::size_t> identity_col(m);
  std::vector<bool> is_art(total, false);
  std::size_t next_slack = ns;
  std::size_t next_art = ns + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    const StdRow& r = rows[i];
    for (std::size_t j = 0; j < ns; ++j) tab.at(i, j) = r.coeffs[j];
    tab.rhs(i) = r.rhs;
    if (r.rel == Relation::LessEq) {
      tab.at(i, next_slack) = 1.0;
      identity_col[i] = next_slack++;
    } else {
      if (r.rel == Relation::GreaterEq) tab.at(i, next_slack++) = -1.0;
      tab.at(i, next_art) = 1.0;
      is_art[next_art] = true;
      identity_col[i] = next_art++;
    }
    tab.basis[i] = identity_col[i];
  }

  Solution sol;
  std::size_t pivots = 0;
  double rhs_scale = 1.0;
  for (const StdRow& r : rows) rhs_scale = std::max(rhs_scale, r.rhs);

  auto row_multipliers_to_original = [&](const Vector& std_mult) {
    Vector out(p.num_rows(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (rows[i].source >= 0) out[static_cast<std::size_t>(rows[i].source)] = rows[i].sign * std_mult[i];
    return out;
  };

  // Phase 1.
  if (n_art > 0) {
    Vector cost1(total, 0.0);
    for (std::size_t j = 0; j < total; ++j)
      if (is_art[j]) cost1[j] = 1.0;
    tab.set_costs(cost1);
    std::vector<bool> enterable(total, true);
    const PhaseResult pr = run_phase(tab, enterable, pivots, opt.max_pivots);
    sol.iterations = pivots;
    if (pr == PhaseResult::IterLimit) {
      sol.status = Status::IterLimit;
      return sol;
    }
    if (tab.objective() > opt.feas_tol * rhs_scale) {
      // y1 = c_B B⁻¹ read off the identity columns; λ = -y1 certifies infeasibility.
      Vector lambda(m);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t col = identity_col[i];
        lambda[i] = -(cost1[col] - tab.reduced_cost(col));
      }
      sol.status = Status::Infeasible;
      sol.farkas = row_multipliers_to_original(lambda);
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_art[tab.basis[i]]) continue;
      std::size_t best = total;
      double best_abs = kPivotTol;
      for (std::size_t j = 0; j < total; ++j) {
        if (is_art[j]) continue;
        if (std::abs(tab.at(i, j)) > best_abs) {
          best_abs = std::abs(tab.at(i, j));
          best = j;
        }
      }
      if (best != total) tab.pivot(i, best);
    }
  }

  // Phase 2.
  Vector cost2(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double cj = dir * p.c[j];
    const VarMap& vm = vmap[j];
    switch (vm.kind) {
      case VarMap::Kind::Shift: cost2[vm.col] += cj; break;
      case VarMap::Kind::Mirror: cost2[vm.col] -= cj; break;
      case VarMap::Kind::Split:
        cost2[vm.col] += cj;
        cost2[vm.col2] -= cj;
        break;
    }
  }
  tab.set_costs(cost2);
  std::vector<bool> enterable(total);
  for (std::size_t j = 0; j < total; ++j) enterable[j] = !is_art[j];
  const PhaseResult pr = run_phase(tab, enterable, pivots, opt.max_pivots);
  sol.iterations = pivots;
  if (pr == PhaseResult::IterLimit) {
    sol.status = Status::IterLimit;
    return sol;
  }
  if (pr == PhaseResult::Unbounded) {
    sol.status = Status::Unbounded;
    return sol;
  }

  Vector xs(total, 0.0);
  for (std::size_t i = 0; i < m; ++i) xs[tab.basis[i]] = std::max(tab.rhs(i), 0.0);
  sol.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& vm = vmap[j];
    switch (vm.kind) {
      case VarMap::Kind::Shift: sol.x[j] = vm.offset + xs[vm.col]; break;
      case VarMap::Kind::Mirror: sol.x[j] = vm.offset - xs[vm.col]; break;
      case VarMap::Kind::Split: sol.x[j] = xs[vm.col] - xs[vm.col2]; break;
    }
    sol.x[j] = std::clamp(sol.x[j], p.lower[j], p.upper[j]);
  }
  // y = c_B B⁻¹ from the identity columns (cost 0 in phase 2); λ = -y.
  Vector lambda(m);
  for (std::size_t i = 0; i < m; ++i) lambda[i] = tab.reduced_cost(identity_col[i]);
  sol.duals = row_multipliers_to_original(lambda);
  sol.objective = p.evaluate(sol.x);
  sol.status = Status::Optimal;
  return sol;
}

}  // namespace smle::opt
