#pragma once

#include <iosfwd>

#include "d2pc/numerics.hpp"

namespace d2pc {

// Convex quadratic program
//
//   minimize    0.5 z' H z + f' z
//   subject to  lower <= M z <= upper   (componentwise)
//
// H must be symmetric positive semidefinite. Rows with lower == upper are
// equality constraints; lower/upper entries may be -inf/+inf. A problem with
// zero constraint rows is valid (pure quadratic minimization).
struct QpProblem {
  Matrix H;      // d x d
  Vector f;      // d
  Matrix M;      // c x d, c may be 0
  Vector lower;  // c
  Vector upper;  // c

  [[nodiscard]] Eigen::Index dimension() const { return H.rows(); }
  [[nodiscard]] Eigen::Index constraints() const { return M.rows(); }

  // Shape, symmetry (relative tolerance), finiteness and bound-ordering
  // checks. Throws InvalidInputError. Positive semidefiniteness is checked
  // by the solver, which needs a factorization anyway.
  void validate() const;
};

enum class QpStatus {
  Solved,         // residuals below tolerance
  MaxIterations,  // iteration budget exhausted before convergence
  Failure,        // infeasibility certificate or numerical breakdown
};

struct QpSettings {
  double eps_primal = 1e-6;
  double eps_dual = 1e-6;
  double eps_infeasible = 1e-8;
  int max_iterations = 10000;

  // Operator splitting parameters. rho is scaled per row: equality rows get
  // 1e3 * rho, free rows (both bounds infinite) a small constant.
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  int check_interval = 25;
  bool adaptive_rho = true;
  double adaptive_rho_tolerance = 10.0;

  // Ruiz equilibration of the problem data before iterating.
  bool scaling = true;
  int scaling_iterations = 10;

  // Active-set solution refinement after convergence.
  bool polish = true;
  double polish_delta = 1e-6;
  int polish_refine_iterations = 30;

  // Warm starting; sizes must match the problem when enabled.
  bool warm_start = false;
  Vector z0;
  Vector y0;
};

struct QpSolution {
  QpStatus status = QpStatus::Failure;
  Vector z;  // primal iterate, a minimizer when status == Solved
  Vector y;  // multipliers for the rows of M
  double objective = 0.0;
  int iterations = 0;

  // Residuals normalized by 1 + the magnitude of the quantities involved;
  // Solved guarantees primal_residual <= eps_primal and dual_residual <=
  // eps_dual.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;
};

// Operator-splitting solver with equilibration and polish. Deterministic:
// identical inputs and settings produce identical output.
[[nodiscard]] QpSolution solve(const QpProblem& problem,
                               const QpSettings& settings = {});

// Plain-text dump of all problem data at full precision.
void dump(const QpProblem& problem, std::ostream& os);

} // namespace d2pc
