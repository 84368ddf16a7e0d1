#include "smle/opt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>

namespace smle::opt {

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterLimit: return "IterLimit";
  }
  return "?";
}

LinearSystem::LinearSystem(std::size_t num_vars)
    : a(0, num_vars), lower(num_vars, -kInf), upper(num_vars, kInf) {}

void LinearSystem::add_row(std::span<const double> coeffs, Relation r, double rhs) {
  require_dims(coeffs.size() == num_vars(), "add_row: coefficient count != num_vars");
  a.append_row(coeffs);
  b.push_back(rhs);
  rel.push_back(r);
}

void LinearSystem::add_row(std::initializer_list<std::pair<std::size_t, double>> terms, Relation r,
                           double rhs) {
  Vector row(num_vars(), 0.0);
  for (auto [j, v] : terms) {
    require_dims(j < num_vars(), "add_row: column out of range");
    row[j] += v;
  }
  add_row(row, r, rhs);
}

void LinearSystem::set_bounds(std::size_t j, double lo, double hi) {
  require_dims(j < num_vars(), "set_bounds: column out of range");
  lower[j] = lo;
  upper[j] = hi;
}

double LinearSystem::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, lower[j] - x[j]);
    worst = std::max(worst, x[j] - upper[j]);
  }
  for (std::size_t i = 0; i < num_rows(); ++i) {
    const double lhs = dot(a.row(i), x);
    switch (rel[i]) {
      case Relation::LessEq: worst = std::max(worst, lhs - b[i]); break;
      case Relation::GreaterEq: worst = std::max(worst, b[i] - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - b[i])); break;
    }
  }
  return worst;
}

void LinearSystem::validate() const {
  const std::size_t n = num_vars();
  require_dims(upper.size() == n, "LinearSystem: bound vectors differ in length");
  require_dims(a.cols() == n || (a.rows() == 0), "LinearSystem: constraint width != num_vars");
  require_dims(a.rows() == b.size() && b.size() == rel.size(), "LinearSystem: row count mismatch");
  for (std::size_t j = 0; j < n; ++j)
    if (std::isnan(lower[j]) || std::isnan(upper[j]))
      throw std::invalid_argument("LinearSystem: NaN bound");
  if (!all_finite(a.data()) || !all_finite(b)) throw std::invalid_argument("LinearSystem: non-finite data");
}

double LpProblem::evaluate(std::span<const double> x) const { return dot(c, x) + constant; }

void LpProblem::validate() const {
  LinearSystem::validate();
  require_dims(c.size() == num_vars(), "LpProblem: |c| != num_vars");
  if (!all_finite(c)) throw std::invalid_argument("LpProblem: non-finite objective");
}

double QpProblem::evaluate(std::span<const double> x) const {
  const Vector hx = matvec(h, x);
  return 0.5 * dot(x, hx) + dot(c, x) + constant;
}

void QpProblem::validate() const {
  LinearSystem::validate();
  require_dims(c.size() == num_vars(), "QpProblem: |c| != num_vars");
  require_dims(h.rows() == num_vars() && h.cols() == num_vars(), "QpProblem: H shape");
  if (!all_finite(c) || !all_finite(h.data())) throw std::invalid_argument("QpProblem: non-finite data");
}

namespace {

void write_rows_and_bounds(std::ostream& os, const LinearSystem& p,
                           std::span<const std::size_t> binaries) {
  os << "Subject To\n";
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    os << " c" << i << ":";
    for (std::size_t j = 0; j < p.num_vars(); ++j)
      if (p.a(i, j) != 0.0) os << (p.a(i, j) < 0 ? " - " : " + ") << std::abs(p.a(i, j)) << " x" << j;
    const char* rel = p.rel[i] == Relation::LessEq ? " <= " : p.rel[i] == Relation::Equal ? " = " : " >= ";
    os << rel << p.b[i] << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    if (std::isinf(p.lower[j]) && std::isinf(p.upper[j])) {
      os << " x" << j << " free\n";
    } else {
      os << " " << (std::isinf(p.lower[j]) ? "-inf" : std::to_string(p.lower[j])) << " <= x" << j
         << " <= " << (std::isinf(p.upper[j]) ? "+inf" : std::to_string(p.upper[j])) << "\n";
    }
  }
  if (!binaries.empty()) {
    os << "Binaries\n";
    for (std::size_t j : binaries) os << " x" << j << "\n";
  }
  os << "End\n";
}

}  // namespace

void write_lp_format(std::ostream& os, const LpProblem& p, std::span<const std::size_t> binaries) {
  os.precision(17);
  os << (p.sense == Sense::Minimize ? "Minimize\n" : "Maximize\n") << " obj:";
  for (std::size_t j = 0; j < p.num_vars(); ++j)
    if (p.c[j] != 0.0) os << (p.c[j] < 0 ? " - " : " + ") << std::abs(p.c[j]) << " x" << j;
  if (p.constant != 0.0) os << " + " << p.constant;
  os << "\n";
  write_rows_and_bounds(os, p, binaries);
}

void write_lp_format(std::ostream& os, const QpProblem& p, std::span<const std::size_t> binaries) {
  os.precision(17);
  os << "Minimize\n obj:";
  for (std::size_t j = 0; j < p.num_vars(); ++j)
    if (p.c[j] != 0.0) os << (p.c[j] < 0 ? " - " : " + ") << std::abs(p.c[j]) << " x" << j;
  os << " + [";
  for (std::size_t i = 0; i < p.num_vars(); ++i)
    for (std::size_t j = i; j < p.num_vars(); ++j) {
      const double v = i == j ? p.h(i, i) : p.h(i, j) + p.h(j, i);
      if (v != 0.0) os << (v < 0 ? " - " : " + ") << std::abs(v) << " x" << i << (i == j ? "^2" : " * x" + std::to_string(j));
    }
  os << " ] / 2";
  if (p.constant != 0.0) os << " + " << p.constant;
  os << "\n";
  write_rows_and_bounds(os, p, binaries);
}

bool dump_enabled() { return std::getenv("SMLE_SOLVER_DUMP") != nullptr; }

namespace {
std::mutex dump_mutex;

template <typename P>
void dump_impl(const P& p, std::span<const std::size_t> binaries, const std::string& tag) {
  const char* path = std::getenv("SMLE_SOLVER_DUMP");
  if (path == nullptr) return;
  std::lock_guard lock(dump_mutex);
  std::ofstream os(path, std::ios::app);
  os << "\\ " << tag << "\n";
  write_lp_format(os, p, binaries);
}
}  // namespace

void dump_problem(const MilpProblem& p, const std::string& tag) { dump_impl(p.lp, p.binaries, tag); }
void dump_problem(const MiqpProblem& p, const std::string& tag) { dump_impl(p.qp, p.binaries, tag); }

}  // namespace smle::opt
