#pragma once

#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "smle/core/linalg.hpp"

namespace smle::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { LessEq, Equal, GreaterEq };
enum class Status { Optimal, Infeasible, Unbounded, IterLimit };

std::string to_string(Status s);

/// Rows `a x (rel) b` plus per-variable bounds. Bounds default to free.
struct LinearSystem {
  Matrix a;
  Vector b;
  std::vector<Relation> rel;
  Vector lower;
  Vector upper;

  explicit LinearSystem(std::size_t num_vars = 0);

  std::size_t num_vars() const { return lower.size(); }
  std::size_t num_rows() const { return b.size(); }

  void add_row(std::span<const double> coeffs, Relation r, double rhs);
  /// Sparse convenience: pairs of (column, coefficient).
  void add_row(std::initializer_list<std::pair<std::size_t, double>> terms, Relation r, double rhs);
  void set_bounds(std::size_t j, double lo, double hi);

  /// Largest violation of rows and bounds at x.
  double max_violation(std::span<const double> x) const;
  void validate() const;
};

struct LpProblem : LinearSystem {
  Vector c;
  double constant = 0.0;
  Sense sense = Sense::Minimize;

  explicit LpProblem(std::size_t num_vars = 0) : LinearSystem(num_vars), c(num_vars, 0.0) {}
  double evaluate(std::span<const double> x) const;
  void validate() const;
};

/// minimize 0.5 xᵀ H x + cᵀ x + constant over the linear system. H must be symmetric PSD.
struct QpProblem : LinearSystem {
  Matrix h;
  Vector c;
  double constant = 0.0;

  explicit QpProblem(std::size_t num_vars = 0)
      : LinearSystem(num_vars), h(num_vars, num_vars), c(num_vars, 0.0) {}
  double evaluate(std::span<const double> x) const;
  void validate() const;
};

struct MilpProblem {
  LpProblem lp;
  std::vector<std::size_t> binaries;
};

struct MiqpProblem {
  QpProblem qp;
  std::vector<std::size_t> binaries;
};

/// Lagrange multipliers follow one convention for every solver: with f the
/// function being minimized (the negated objective for Maximize LPs),
///   ∇f(x) + Aᵀ duals − ν_lower + ν_upper = 0,  ν >= 0,
/// so duals >= 0 on `<=` rows and <= 0 on `>=` rows.
///
/// `farkas` is set on Infeasible LP/QP verdicts: multipliers y with the same
/// row-sign convention such that yᵀb − min_{lower<=x<=upper} (yᵀA) x < 0.
struct Solution {
  Status status = Status::IterLimit;
  Vector x;
  double objective = 0.0;
  Vector duals;
  Vector farkas;
  std::size_t iterations = 0;
  std::size_t nodes = 0;

  bool optimal() const { return status == Status::Optimal; }
};

struct SolverOptions {
  double feas_tol = 1e-9;
  std::size_t max_pivots = 100000;
  std::size_t max_qp_iterations = 20000;
  std::size_t max_nodes = 100000;
  double abs_gap = 1e-6;
  double integrality_tol = 1e-6;
};

/// Exposed "solver tolerance ε" used by tolerance-aware formulations.
inline constexpr double kSolverTolerance = 1e-6;

/// LP-format-like text dump, for cross-checking against external solvers.
void write_lp_format(std::ostream& os, const LpProblem& p, std::span<const std::size_t> binaries = {});
void write_lp_format(std::ostream& os, const QpProblem& p, std::span<const std::size_t> binaries = {});

/// Returns true if SMLE_SOLVER_DUMP is set; problems are then appended to that path.
bool dump_enabled();
void dump_problem(const MilpProblem& p, const std::string& tag);
void dump_problem(const MiqpProblem& p, const std::string& tag);

}  // namespace smle::opt
