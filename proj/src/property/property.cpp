#include "smle/property/property.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "smle/opt/solvers.hpp"

namespace smle {

void PolytopeProperty::validate() const {
  require_dims(Q.rows() == q.size(), "PolytopeProperty: |q| != Q.rows");
  require_dims(R.rows() == r.size(), "PolytopeProperty: |r| != R.rows");
  require_dims(Q.cols() > 0 && R.cols() > 0, "PolytopeProperty: Q and R need column counts");
  if (!all_finite(Q.data()) || !all_finite(q) || !all_finite(R.data()) || !all_finite(r))
    throw std::invalid_argument("PolytopeProperty: non-finite coefficients");
}

MutexProperty::MutexProperty(std::size_t classes, std::vector<std::pair<std::size_t, std::size_t>> forbidden)
    : num_classes(classes), pairs(std::move(forbidden)) {
  for (auto& [h, k] : pairs)
    if (h > k) std::swap(h, k);
  std::sort(pairs.begin(), pairs.end());
  validate();
}

void MutexProperty::validate() const {
  if (pairs.empty()) throw std::invalid_argument("MutexProperty: no forbidden pairs");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [h, k] : pairs) {
    const auto a = std::min(h, k), b = std::max(h, k);
    require_dims(b < num_classes, "MutexProperty: class index out of range");
    if (a == b) throw std::invalid_argument("MutexProperty: pair with identical classes");
    if (!seen.insert({a, b}).second) throw std::invalid_argument("MutexProperty: duplicate pair");
  }
}

namespace {

bool rows_hold(const Matrix& a, const Vector& b, std::span<const double> v, double tol) {
  require_dims(v.size() == a.cols(), "property check: dimension mismatch");
  for (std::size_t i = 0; i < a.rows(); ++i)
    if (dot(a.row(i), v) > b[i] + tol) return false;
  return true;
}

bool feasible(const Matrix& a, const Vector& b, const Box* box) {
  opt::LpProblem lp(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) lp.add_row(a.row(i), opt::Relation::LessEq, b[i]);
  if (box)
    for (std::size_t j = 0; j < box->size(); ++j) lp.set_bounds(j, (*box)[j].lo, (*box)[j].hi);
  return opt::solve_lp(lp).status == opt::Status::Optimal;
}

}  // namespace

bool holds_q(const PolytopeProperty& p, std::span<const double> x, double tol) { return rows_hold(p.Q, p.q, x, tol); }
bool holds_r(const PolytopeProperty& p, std::span<const double> y, double tol) { return rows_hold(p.R, p.r, y, tol); }

double violation(const PolytopeProperty& p, std::span<const double> y) {
  require_dims(y.size() == p.R.cols(), "violation: dimension mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < p.R.rows(); ++k) total += std::max(0.0, dot(p.R.row(k), y) - p.r[k]);
  return total;
}

bool mutex_holds(const MutexProperty& p, std::span<const double> logits) {
  require_dims(logits.size() == p.num_classes, "mutex_holds: dimension mismatch");
  for (auto [h, k] : p.pairs)
    if (logits[h] >= 0.0 && logits[k] >= 0.0) return false;
  return true;
}

std::size_t polytope_rows(std::size_t n) {
  if (n == 0) throw std::invalid_argument("polytope_rows: zero dimension");
  return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 2;
}

PolytopeProperty gen_random_polytope(std::size_t n, std::size_t m, Rng& rng, const Box& input_box,
                                     std::size_t max_tries) {
  require_dims(input_box.size() == n, "gen_random_polytope: |input_box| != n");
  const std::size_t rq = polytope_rows(n), rr = polytope_rows(m);
  for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
    PolytopeProperty p{Matrix(rq, n), Vector(rq), Matrix(rr, m), Vector(rr)};
    for (double& v : p.Q.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : p.q) v = rng.uniform(-1.0, 1.0);
    for (double& v : p.R.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : p.r) v = rng.uniform(-1.0, 1.0);
    if (feasible(p.Q, p.q, &input_box) && feasible(p.R, p.r, nullptr)) return p;
  }
  throw std::runtime_error("gen_random_polytope: no feasible property within the retry budget");
}

PolytopeProperty gen_random_polytope(std::size_t n, std::size_t m, Rng& rng) {
  return gen_random_polytope(n, m, rng, Box(n, Interval(-1.0, 1.0)));
}

std::vector<double> pair_frequencies(const Matrix& labels) {
  const std::size_t c = labels.cols();
  if (c < 2) throw std::invalid_argument("pair_frequencies: fewer than 2 classes");
  require_dims(labels.rows() > 0, "pair_frequencies: no rows");
  std::vector<double> out;
  for (std::size_t h = 0; h < c; ++h) {
    for (std::size_t k = h + 1; k < c; ++k) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < labels.rows(); ++i) {
        const double a = labels(i, h), b = labels(i, k);
        if ((a != 0.0 && a != 1.0) || (b != 0.0 && b != 1.0))
          throw std::invalid_argument("pair_frequencies: labels must be binary");
        count += a == 1.0 && b == 1.0;
      }
      out.push_back(static_cast<double>(count) / static_cast<double>(labels.rows()));
    }
  }
  return out;
}

MutexProperty gen_mutex_property(const Matrix& labels, double quantile) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw std::invalid_argument("gen_mutex_property: quantile outside [0,1]");
  const std::vector<double> freq = pair_frequencies(labels);
  std::vector<double> sorted = freq;
  std::sort(sorted.begin(), sorted.end());
  const double pos = quantile * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double threshold = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t idx = 0;
  for (std::size_t h = 0; h < labels.cols(); ++h)
    for (std::size_t k = h + 1; k < labels.cols(); ++k, ++idx)
      if (freq[idx] <= threshold) pairs.emplace_back(h, k);
  return MutexProperty(labels.cols(), std::move(pairs));
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(m.row_vector(i));
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t cols) {
  Matrix m(0, cols);
  for (const auto& row : j) {
    const auto v = row.get<Vector>();
    require_dims(v.size() == cols, "property json: ragged matrix");
    m.append_row(v);
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const PropertySpec& p) {
  if (const auto* poly = std::get_if<PolytopeProperty>(&p)) {
    return {{"kind", "polytope"},       {"input_dim", poly->input_dim()}, {"output_dim", poly->output_dim()},
            {"Q", matrix_json(poly->Q)}, {"q", poly->q},                  {"R", matrix_json(poly->R)},
            {"r", poly->r}};
  }
  const auto& mx = std::get<MutexProperty>(p);
  nlohmann::json pairs = nlohmann::json::array();
  for (auto [h, k] : mx.pairs) pairs.push_back({h, k});
  return {{"kind", "mutex"}, {"num_classes", mx.num_classes}, {"pairs", pairs}};
}

PropertySpec property_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "polytope") {
    // Column counts come from explicit dims when present so that 0-row Q still loads.
    const auto cols = [&](const char* m, const char* dim) -> std::size_t {
      if (j.contains(dim)) return j.at(dim).get<std::size_t>();
      const auto& rows = j.at(m);
      if (rows.empty()) throw std::invalid_argument(std::string("property json: cannot infer width of ") + m);
      return rows.at(0).size();
    };
    PolytopeProperty p{matrix_from_json(j.at("Q"), cols("Q", "input_dim")), j.at("q").get<Vector>(),
                       matrix_from_json(j.at("R"), cols("R", "output_dim")), j.at("r").get<Vector>()};
    p.validate();
    return p;
  }
  if (kind == "mutex") {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& pr : j.at("pairs")) {
      if (pr.size() != 2) throw std::invalid_argument("property json: pairs must have two entries");
      pairs.emplace_back(pr.at(0).get<std::size_t>(), pr.at(1).get<std::size_t>());
    }
    return MutexProperty(j.at("num_classes").get<std::size_t>(), std::move(pairs));
  }
  throw std::invalid_argument("property json: unknown kind " + kind);
}

void save_property(const PropertySpec& p, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << to_json(p).dump(2) << "\n";
}

PropertySpec load_property(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return property_from_json(nlohmann::json::parse(is));
}

}  // namespace smle
