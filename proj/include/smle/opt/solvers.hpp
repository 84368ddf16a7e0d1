#pragma once

#include "smle/opt/problem.hpp"

namespace smle::opt {

/// Dense two-phase primal simplex. Dantzig pricing, switching to Bland's rule
/// once a run of degenerate pivots is detected.
Solution solve_lp(const LpProblem& p, const SolverOptions& opt = {});

/// Primal active-set method for convex QPs. Handles singular (PSD) Hessians by
/// stepping along zero-curvature descent directions.
/// Throws std::invalid_argument when H is not symmetric PSD.
Solution solve_qp(const QpProblem& p, const SolverOptions& opt = {});

/// Depth-first branch and bound over LP relaxations, most-fractional branching.
Solution solve_milp(const MilpProblem& p, const SolverOptions& opt = {});

/// Same search over QP relaxations.
Solution solve_miqp(const MiqpProblem& p, const SolverOptions& opt = {});

/// Cholesky-with-tolerance PSD test.
bool is_symmetric_psd(const Matrix& h, double tol = 1e-9);

}  // namespace smle::opt
