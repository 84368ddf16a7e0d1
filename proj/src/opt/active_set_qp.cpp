#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "smle/opt/solvers.hpp"

namespace smle::opt {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class VarState { Free, AtLower, AtUpper };

// Inequalities are held as `g x <= h` (>= rows negated); equalities separately.
struct Row {
  VectorXd a;
  double b = 0.0;
  bool equality = false;
  std::size_t source = 0;
  double sign = 1.0;
};

class ActiveSetSolver {
 public:
  ActiveSetSolver(const QpProblem& p, const SolverOptions& opt) : p_(p), opt_(opt), n_(p.num_vars()) {
    h_ = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        p.h.data().data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    c_ = Eigen::Map<const VectorXd>(p.c.data(), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < p.num_rows(); ++i) {
      Row r;
      r.a = Eigen::Map<const VectorXd>(p.a.row(i).data(), static_cast<Eigen::Index>(n_));
      r.b = p.b[i];
      r.source = i;
      r.equality = p.rel[i] == Relation::Equal;
      if (p.rel[i] == Relation::GreaterEq) {
        r.a = -r.a;
        r.b = -r.b;
        r.sign = -1.0;
      }
      rows_.push_back(std::move(r));
    }
    double hmax = 1.0;
    for (double v : p.h.data()) hmax = std::max(hmax, std::abs(v));
    curvature_tol_ = 1e-11 * hmax;
  }

  Solution run() {
    Solution sol;
    if (!initialize(sol)) return sol;

    for (std::size_t iter = 0;; ++iter) {
      if (iter >= opt_.max_qp_iterations) {
        sol.status = Status::IterLimit;
        sol.iterations = iter;
        fill_solution(sol);
        return sol;
      }
      const std::vector<std::size_t> free = free_vars();
      const MatrixXd aw = working_matrix(free);
      const VectorXd g = h_ * x_ + c_;
      VectorXd gf(static_cast<Eigen::Index>(free.size()));
      for (std::size_t k = 0; k < free.size(); ++k) gf[static_cast<Eigen::Index>(k)] = g[static_cast<Eigen::Index>(free[k])];

      const MatrixXd z = null_space(aw, free.size());
      VectorXd step = VectorXd::Zero(static_cast<Eigen::Index>(n_));
      bool ray = false;
      if (z.cols() > 0) {
        MatrixXd hff(static_cast<Eigen::Index>(free.size()), static_cast<Eigen::Index>(free.size()));
        for (std::size_t a = 0; a < free.size(); ++a)
          for (std::size_t b = 0; b < free.size(); ++b)
            hff(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                h_(static_cast<Eigen::Index>(free[a]), static_cast<Eigen::Index>(free[b]));
        const MatrixXd hr = z.transpose() * hff * z;
        const VectorXd gr = z.transpose() * gf;
        VectorXd pr;
        Eigen::LLT<MatrixXd> llt(hr);
        bool pd = llt.info() == Eigen::Success;
        if (pd) {
          const auto& l = llt.matrixLLT();
          for (Eigen::Index i = 0; i < l.rows(); ++i)
            if (l(i, i) * l(i, i) <= curvature_tol_) pd = false;
        }
        if (pd) {
          pr = -llt.solve(gr);
        } else {
          Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hr);
          const VectorXd& lam = eig.eigenvalues();
          const MatrixXd& v = eig.eigenvectors();
          VectorXd flat = VectorXd::Zero(gr.size());
          pr = VectorXd::Zero(gr.size());
          for (Eigen::Index i = 0; i < lam.size(); ++i) {
            const double proj = v.col(i).dot(gr);
            if (lam[i] <= curvature_tol_) flat += proj * v.col(i);
            else pr -= (proj / lam[i]) * v.col(i);
          }
          if (flat.norm() > 1e-12 * (1.0 + gr.norm())) {
            pr = -flat;
            ray = true;
          }
        }
        const VectorXd pf = z * pr;
        for (std::size_t k = 0; k < free.size(); ++k)
          step[static_cast<Eigen::Index>(free[k])] = pf[static_cast<Eigen::Index>(k)];
      }

      const double xscale = 1.0 + x_.lpNorm<Eigen::Infinity>();
      if (!ray && step.lpNorm<Eigen::Infinity>() <= 1e-13 * xscale) {
        // Stationary on the working set: check multiplier signs.
        compute_multipliers(aw, gf, g);
        std::ptrdiff_t worst_row = -1;
        std::ptrdiff_t worst_var = -1;
        double worst = -opt_.feas_tol;
        for (std::size_t k = 0; k < working_.size(); ++k) {
          if (rows_[working_[k]].equality) continue;
          if (row_mult_[k] < worst) {
            worst = row_mult_[k];
            worst_row = static_cast<std::ptrdiff_t>(k);
            worst_var = -1;
          }
        }
        for (std::size_t j = 0; j < n_; ++j) {
          if (state_[j] == VarState::Free || fixed_both(j)) continue;
          if (bound_mult_[j] < worst) {
            worst = bound_mult_[j];
            worst_var = static_cast<std::ptrdiff_t>(j);
            worst_row = -1;
          }
        }
        if (worst_row < 0 && worst_var < 0) {
          sol.status = Status::Optimal;
          sol.iterations = iter;
          fill_solution(sol);
          return sol;
        }
        if (worst_row >= 0) working_.erase(working_.begin() + worst_row);
        else state_[static_cast<std::size_t>(worst_var)] = VarState::Free;
        continue;
      }

      // Ratio test.
      double alpha = ray ? kInf : 1.0;
      std::ptrdiff_t block_row = -1;
      std::ptrdiff_t block_var = -1;
      VarState block_state = VarState::Free;
      std::vector<bool> in_working(rows_.size(), false);
      for (std::size_t r : working_) in_working[r] = true;
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (in_working[r] || rows_[r].equality) continue;
        const double ap = rows_[r].a.dot(step);
        if (ap <= 1e-12 * (1.0 + rows_[r].a.lpNorm<Eigen::Infinity>()) * step.lpNorm<Eigen::Infinity>()) continue;
        const double slack = std::max(0.0, rows_[r].b - rows_[r].a.dot(x_));
        const double t = slack / ap;
        if (t < alpha) {
          alpha = t;
          block_row = static_cast<std::ptrdiff_t>(r);
          block_var = -1;
        }
      }
      const double step_tol = 1e-12 * step.lpNorm<Eigen::Infinity>();
      for (std::size_t j = 0; j < n_; ++j) {
        if (state_[j] != VarState::Free) continue;
        const double pj = step[static_cast<Eigen::Index>(j)];
        if (std::abs(pj) <= step_tol) continue;
        const double xj = x_[static_cast<Eigen::Index>(j)];
        if (pj < 0.0 && std::isfinite(p_.lower[j])) {
          const double t = std::max(0.0, xj - p_.lower[j]) / -pj;
          if (t < alpha) {
            alpha = t;
            block_var = static_cast<std::ptrdiff_t>(j);
            block_state = VarState::AtLower;
            block_row = -1;
          }
        } else if (pj > 0.0 && std::isfinite(p_.upper[j])) {
          const double t = std::max(0.0, p_.upper[j] - xj) / pj;
          if (t < alpha) {
            alpha = t;
            block_var = static_cast<std::ptrdiff_t>(j);
            block_state = VarState::AtUpper;
            block_row = -1;
          }
        }
      }
      if (!std::isfinite(alpha)) {
        sol.status = Status::Unbounded;
        sol.iterations = iter;
        return sol;
      }
      x_ += alpha * step;
      if (block_row >= 0) {
        working_.push_back(static_cast<std::size_t>(block_row));
      } else if (block_var >= 0) {
        const auto j = static_cast<std::size_t>(block_var);
        state_[j] = block_state;
        x_[static_cast<Eigen::Index>(j)] = block_state == VarState::AtLower ? p_.lower[j] : p_.upper[j];
        prune_dependent_rows();
      }
    }
  }

 private:
  bool fixed_both(std::size_t j) const { return p_.lower[j] == p_.upper[j]; }

  std::vector<std::size_t> free_vars() const {
    std::vector<std::size_t> f;
    for (std::size_t j = 0; j < n_; ++j)
      if (state_[j] == VarState::Free) f.push_back(j);
    return f;
  }

  MatrixXd working_matrix(const std::vector<std::size_t>& free) const {
    MatrixXd aw(static_cast<Eigen::Index>(working_.size()), static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < working_.size(); ++k)
      for (std::size_t f = 0; f < free.size(); ++f)
        aw(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) =
            rows_[working_[k]].a[static_cast<Eigen::Index>(free[f])];
    return aw;
  }

  static MatrixXd null_space(const MatrixXd& aw, std::size_t nfree) {
    const auto nf = static_cast<Eigen::Index>(nfree);
    if (aw.rows() == 0) return MatrixXd::Identity(nf, nf);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(aw.transpose());
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    if (rank >= nf) return MatrixXd(nf, 0);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(nf, nf);
    return q.rightCols(nf - rank);
  }

  // Pinning a variable can leave working rows that are combinations of the
  // others over the remaining free columns; keep an independent subset.
  void prune_dependent_rows() {
    const auto free = free_vars();
    std::vector<std::size_t> kept;
    std::swap(kept, working_);
    for (std::size_t r : kept) {
      working_.push_back(r);
      const MatrixXd aw = working_matrix(free);
      if (rank_of(aw) < aw.rows()) working_.pop_back();
    }
  }

  static Eigen::Index rank_of(const MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    return qr.rank();
  }

  bool working_independent_with(std::size_t candidate_row) {
    working_.push_back(candidate_row);
    const auto free = free_vars();
    const MatrixXd aw = working_matrix(free);
    const bool ok = rank_of(aw) == aw.rows();
    working_.pop_back();
    return ok;
  }

  bool initialize(Solution& sol) {
    // Feasible starting vertex from a zero-objective LP over the same constraints.
    LpProblem lp(n_);
    static_cast<LinearSystem&>(lp) = static_cast<const LinearSystem&>(p_);
    lp.c.assign(n_, 0.0);
    const Solution start = solve_lp(lp, opt_);
    if (start.status != Status::Optimal) {
      sol.status = start.status;
      sol.farkas = start.farkas;
      sol.iterations = start.iterations;
      return false;
    }
    x_ = Eigen::Map<const VectorXd>(start.x.data(), static_cast<Eigen::Index>(n_));
    state_.assign(n_, VarState::Free);

    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (rows_[r].equality && working_independent_with(r)) working_.push_back(r);
    for (std::size_t j = 0; j < n_; ++j) {
      const double xj = x_[static_cast<Eigen::Index>(j)];
      VarState s = VarState::Free;
      if (std::isfinite(p_.lower[j]) && std::abs(xj - p_.lower[j]) <= 1e-12 * (1.0 + std::abs(xj))) s = VarState::AtLower;
      else if (std::isfinite(p_.upper[j]) && std::abs(xj - p_.upper[j]) <= 1e-12 * (1.0 + std::abs(xj))) s = VarState::AtUpper;
      if (s == VarState::Free) continue;
      state_[j] = s;
      const auto free = free_vars();
      const MatrixXd aw = working_matrix(free);
      if (rank_of(aw) < aw.rows()) {
        state_[j] = VarState::Free;
      } else {
        x_[static_cast<Eigen::Index>(j)] = s == VarState::AtLower ? p_.lower[j] : p_.upper[j];
      }
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].equality) continue;
      const double resid = rows_[r].a.dot(x_) - rows_[r].b;
      if (std::abs(resid) <= 1e-10 * (1.0 + std::abs(rows_[r].b)) && working_independent_with(r)) working_.push_back(r);
    }
    return true;
  }

  void compute_multipliers(const MatrixXd& aw, const VectorXd& gf, const VectorXd& g) {
    // Stationarity on free variables: gf + awᵀ λ = 0.
    VectorXd lam = VectorXd::Zero(aw.rows());
    if (aw.rows() > 0) lam = aw.transpose().colPivHouseholderQr().solve(-gf);
    row_mult_.assign(working_.size(), 0.0);
    for (std::size_t k = 0; k < working_.size(); ++k) row_mult_[k] = lam[static_cast<Eigen::Index>(k)];
    VectorXd r = g;
    for (std::size_t k = 0; k < working_.size(); ++k) r += row_mult_[k] * rows_[working_[k]].a;
    bound_mult_.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == VarState::AtLower) bound_mult_[j] = r[static_cast<Eigen::Index>(j)];
      else if (state_[j] == VarState::AtUpper) bound_mult_[j] = -r[static_cast<Eigen::Index>(j)];
    }
  }

  void fill_solution(Solution& sol) {
    sol.x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      sol.x[j] = std::clamp(x_[static_cast<Eigen::Index>(j)], p_.lower[j], p_.upper[j]);
    sol.duals.assign(p_.num_rows(), 0.0);
    if (sol.status == Status::Optimal) {
      for (std::size_t k = 0; k < working_.size(); ++k) {
        const Row& r = rows_[working_[k]];
        sol.duals[r.source] = r.sign * row_mult_[k];
      }
    }
    sol.objective = p_.evaluate(sol.x);
  }

  const QpProblem& p_;
  const SolverOptions& opt_;
  std::size_t n_;
  MatrixXd h_;
  VectorXd c_;
  std::vector<Row> rows_;
  double curvature_tol_ = 1e-11;

  VectorXd x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> working_;
  std::vector<double> row_mult_;
  std::vector<double> bound_mult_;
};

}  // namespace

bool is_symmetric_psd(const Matrix& h, double tol) {
  if (h.rows() != h.cols()) return false;
  const auto n = static_cast<Eigen::Index>(h.rows());
  if (n == 0) return true;
  double scale = 1.0;
  for (double v : h.data()) scale = std::max(scale, std::abs(v));
  MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = h(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      const double b = h(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
      if (std::abs(a - b) > tol * scale) return false;
      m(i, j) = 0.5 * (a + b);
    }
  m.diagonal().array() += tol * scale;
  Eigen::LLT<MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

Solution solve_qp(const QpProblem& p, const SolverOptions& opt) {
  p.validate();
  if (!is_symmetric_psd(p.h)) throw std::invalid_argument("solve_qp: H is not symmetric positive semidefinite");
  ActiveSetSolver solver(p, opt);
  return solver.run();
}

}  // namespace smle::opt
