#pragma once

// Incremental MILP/MIQP assembly for the robust formulations.

#include <utility>
#include <vector>

#include "smle/core/interval.hpp"
#include "smle/model/smle_model.hpp"
#include "smle/opt/problem.hpp"
#include "smle/property/property.hpp"

namespace smle::detail {

using Terms = std::vector<std::pair<std::size_t, double>>;

class Builder {
 public:
  std::size_t add_var(double lo, double hi, bool binary = false);
  void add_row(const Terms& terms, opt::Relation rel, double rhs);
  void add_objective(std::size_t j, double c) { obj_[j] += c; }
  void add_quadratic(std::size_t j, double h) { quad_.emplace_back(j, h); }
  double constant = 0.0;

  std::size_t num_vars() const { return lower_.size(); }
  opt::MilpProblem milp(opt::Sense sense) const;
  /// Quadratic terms are diagonal.
  opt::MiqpProblem miqp() const;

 private:
  opt::LinearSystem system() const;

  Vector lower_, upper_, obj_;
  std::vector<std::size_t> binaries_;
  std::vector<std::pair<Terms, std::pair<opt::Relation, double>>> rows_;
  std::vector<std::pair<std::size_t, double>> quad_;
};

/// x and z̄ variables constrained to the overapproximation
/// {(x, z̄) : x in box, Q x <= q, l(x) <= z̄ <= max(l(x), u(x))}.
/// With constant aux models x is not modeled.
struct Reach {
  std::size_t x0 = 0;
  std::size_t nx = 0;
  std::size_t z0 = 0;
  std::size_t nz = 0;
  Box zbox;
};

Reach add_reach(Builder& b, const SmleModel& model, const PolytopeProperty* q);

/// ŷ_k = c_k + d_kᵀ z̄ as terms over the z̄ variables.
Terms yhat_terms(const AffineMap& g, std::size_t k, const Reach& reach);

}  // namespace smle::detail
