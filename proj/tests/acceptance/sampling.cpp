#include "sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "smle/opt/solvers.hpp"

namespace smle::acceptance {

namespace {

// Rows of {x : A x <= b} including the box.
void polytope_rows(const PolytopeProperty& p, Matrix& a, Vector& b) {
  const std::size_t n = p.input_dim();
  a = Matrix(0, 0);
  b.clear();
  for (std::size_t k = 0; k < p.Q.rows(); ++k) {
    a.append_row(p.Q.row(k));
    b.push_back(p.q[k]);
  }
  for (std::size_t j = 0; j < n; ++j)
    for (double s : {1.0, -1.0}) {
      Vector row(n, 0.0);
      row[j] = s;
      a.append_row(row);
      b.push_back(1.0);
    }
}

Vector chebyshev_centre(const Matrix& a, const Vector& b) {
  const std::size_t n = a.cols();
  opt::LpProblem lp(n + 1);
  for (std::size_t j = 0; j < n; ++j) lp.set_bounds(j, -1.0, 1.0);
  lp.set_bounds(n, 0.0, 2.0);
  lp.c[n] = 1.0;
  lp.sense = opt::Sense::Maximize;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Vector row(a.row(i).begin(), a.row(i).end());
    row.push_back(std::sqrt(l2sq(a.row(i))));
    lp.add_row(row, opt::Relation::LessEq, b[i]);
  }
  const opt::Solution s = opt::solve_lp(lp);
  if (!s.optimal()) throw std::runtime_error("sample_q: Q does not meet the box");
  return Vector(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(n));
}

}  // namespace

QSample sample_q(const PolytopeProperty& p, std::size_t count, Rng& rng) {
  const std::size_t n = p.input_dim();
  QSample out{Matrix(0, 0), false};
  Vector x(n);

  // Probe the acceptance rate first.
  constexpr std::size_t kProbe = 20000;
  std::size_t accepted = 0;
  std::vector<Vector> probe_hits;
  for (std::size_t t = 0; t < kProbe; ++t) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    if (holds_q(p, x, 0.0)) {
      ++accepted;
      if (probe_hits.size() < count) probe_hits.push_back(x);
    }
  }
  const double rate = static_cast<double>(accepted) / kProbe;
  if (rate >= 0.01) {
    for (const Vector& h : probe_hits) out.x.append_row(h);
    while (out.x.rows() < count) {
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      if (holds_q(p, x, 0.0)) out.x.append_row(x);
    }
    return out;
  }

  out.hit_and_run = true;
  Matrix a;
  Vector b;
  polytope_rows(p, a, b);
  x = chebyshev_centre(a, b);
  Vector d(n);
  constexpr std::size_t kThin = 5;
  for (std::size_t step = 0; out.x.rows() < count; ++step) {
    for (double& v : d) v = rng.normal();
    double lo = -1e300, hi = 1e300;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double ad = dot(a.row(i), d);
      const double slack = b[i] - dot(a.row(i), x);
      if (ad > 1e-15) hi = std::min(hi, slack / ad);
      if (ad < -1e-15) lo = std::max(lo, slack / ad);
    }
    if (hi > lo) {
      const double t = rng.uniform(lo, hi);
      for (std::size_t j = 0; j < n; ++j) x[j] += t * d[j];
    }
    // Round-off can leave the walk a hair outside; such points are not kept.
    if (step >= 100 && step % kThin == 0 && holds_q(p, x, 0.0)) {
      bool in_box = true;
      for (double v : x) in_box = in_box && std::abs(v) <= 1.0;
      if (in_box) out.x.append_row(x);
    }
  }
  return out;
}

}  // namespace smle::acceptance
