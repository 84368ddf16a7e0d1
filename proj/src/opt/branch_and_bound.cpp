#include <algorithm>
#include <cmath>
#include <functional>

#include "smle/opt/solvers.hpp"

namespace smle::opt {

namespace {

struct Node {
  std::vector<std::pair<std::size_t, double>> fixes;
};

// Relaxation callback: solve with the supplied bound vectors. The returned
// objective must be in minimization form.
using Relaxation = std::function<Solution(const Vector& lower, const Vector& upper)>;

void clamp_binaries(LinearSystem& sys, const std::vector<std::size_t>& binaries) {
  for (std::size_t j : binaries) {
    require_dims(j < sys.num_vars(), "branch and bound: binary index out of range");
    sys.lower[j] = std::max(sys.lower[j], 0.0);
    sys.upper[j] = std::min(sys.upper[j], 1.0);
  }
}

Solution branch_and_bound(const LinearSystem& sys, const std::vector<std::size_t>& binaries,
                          const Relaxation& relax, const SolverOptions& opt) {
  Solution best;
  best.status = Status::Infeasible;
  double incumbent = kInf;
  std::size_t nodes = 0;
  std::size_t iterations = 0;

  std::vector<Node> stack;
  stack.push_back({});
  while (!stack.empty()) {
    if (nodes >= opt.max_nodes) {
      best.status = Status::IterLimit;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++nodes;

    Vector lo = sys.lower;
    Vector hi = sys.upper;
    for (auto [j, v] : node.fixes) lo[j] = hi[j] = v;

    Solution r = relax(lo, hi);
    iterations += r.iterations;
    if (r.status == Status::Infeasible) continue;
    if (r.status == Status::Unbounded) {
      best.status = Status::Unbounded;
      best.x.clear();
      break;
    }
    if (r.status == Status::IterLimit) {
      best.status = Status::IterLimit;
      break;
    }
    if (r.objective >= incumbent - opt.abs_gap) continue;

    std::size_t branch_var = sys.num_vars();
    double most_frac = opt.integrality_tol;
    for (std::size_t j : binaries) {
      const double frac = std::abs(r.x[j] - std::round(r.x[j]));
      if (frac > most_frac) {
        most_frac = frac;
        branch_var = j;
      }
    }

    if (branch_var == sys.num_vars()) {
      // Integral within tolerance: pin the binaries exactly and re-solve.
      bool already_pinned = true;
      for (std::size_t j : binaries) {
        const double v = std::round(r.x[j]);
        if (lo[j] != v || hi[j] != v) already_pinned = false;
        lo[j] = hi[j] = v;
      }
      if (!already_pinned) {
        r = relax(lo, hi);
        iterations += r.iterations;
        if (r.status != Status::Optimal) continue;
      }
      if (r.objective < incumbent) {
        incumbent = r.objective;
        best = r;
        best.status = Status::Optimal;
      }
      continue;
    }

    // Depth-first: the child nearer the relaxation value is explored first.
    const double preferred = r.x[branch_var] >= 0.5 ? 1.0 : 0.0;
    Node other = node;
    other.fixes.emplace_back(branch_var, 1.0 - preferred);
    node.fixes.emplace_back(branch_var, preferred);
    stack.push_back(std::move(other));
    stack.push_back(std::move(node));
  }
  best.nodes = nodes;
  best.iterations = iterations;
  return best;
}

}  // namespace

Solution solve_milp(const MilpProblem& p, const SolverOptions& opt) {
  p.lp.validate();
  LpProblem work = p.lp;
  clamp_binaries(work, p.binaries);
  const double dir = work.sense == Sense::Minimize ? 1.0 : -1.0;
  LpProblem scratch = work;
  Relaxation relax = [&](const Vector& lo, const Vector& hi) {
    scratch.lower = lo;
    scratch.upper = hi;
    Solution s = solve_lp(scratch, opt);
    s.objective *= dir;
    return s;
  };
  Solution s = branch_and_bound(work, p.binaries, relax, opt);
  if (!s.x.empty()) s.objective = p.lp.evaluate(s.x);
  return s;
}

Solution solve_miqp(const MiqpProblem& p, const SolverOptions& opt) {
  p.qp.validate();
  if (!is_symmetric_psd(p.qp.h)) throw std::invalid_argument("solve_miqp: H is not symmetric positive semidefinite");
  QpProblem work = p.qp;
  clamp_binaries(work, p.binaries);
  QpProblem scratch = work;
  Relaxation relax = [&](const Vector& lo, const Vector& hi) {
    scratch.lower = lo;
    scratch.upper = hi;
    return solve_qp(scratch, opt);
  };
  Solution s = branch_and_bound(work, p.binaries, relax, opt);
  if (!s.x.empty()) s.objective = p.qp.evaluate(s.x);
  return s;
}

}  // namespace smle::opt
