#pragma once

#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "pmc/mc_operator.hpp"

namespace pmc {

enum class ContinuationMode { BoundaryData, HAmplitude };

struct SolveOptions {
  double tol = 1e-9;
  int max_iterations = 60;
  double armijo_factor = 0.5;
  double min_step = 1e-6;
  ContinuationMode continuation = ContinuationMode::BoundaryData;
  /// Continuation parameters; the last entry must be 1.
  std::vector<double> schedule{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  /// Consecutive failed continuation attempts after which the run stalls.
  int max_consecutive_failures = 2;
};

struct ContinuationStep {
  double lambda = 0.0;
  bool converged = false;
  double max_boundary_gradient = 0.0;
  int max_gradient_vertex = -1;
  int iterations = 0;
  double final_residual = 0.0;
};

struct SolveReport {
  bool converged = false;
  bool stalled = false;
  bool jacobian_singular = false;
  int iterations = 0;
  std::vector<double> residual_history;  ///< max |Q u| over interior vertices, per Newton iterate
  double max_boundary_gradient = 0.0;
  int max_gradient_vertex = -1;
  std::vector<ContinuationStep> continuation_trace;
  double last_converged_lambda = 0.0;
  /// Solution at the last converged continuation parameter.
  std::optional<ScalarField> solution;
};

/// Sparse Jacobian of u -> Q u with boundary rows replaced by the identity.
Eigen::SparseMatrix<double> q_jacobian(const Discretization& disc, const PrescribedH& H, const ScalarField& u);

/// Discrete Laplace-Beltrami extension: Delta w = 0 at interior vertices,
/// w = boundary entries of `data` on the boundary.
ScalarField harmonic_extension(const Discretization& disc, const ScalarField& data);

/// sup over boundary vertices of the model norm of the one-sided gradient.
double max_boundary_gradient(const Discretization& disc, const ScalarField& u, int* argmax = nullptr);

/// Dirichlet problem Q u = 0, u = g on the boundary, by damped Newton with
/// continuation. Boundary entries of `boundary_data` are used; interior
/// entries are ignored. `initial` (if given) seeds the first continuation
/// step.
SolveReport solve_dirichlet(const Discretization& disc, const PrescribedH& H, const ScalarField& boundary_data,
                            const SolveOptions& options = {}, const ScalarField* initial = nullptr);

enum class ComparisonVerdict { Holds, Violated, Inapplicable };

struct ComparisonResult {
  ComparisonVerdict verdict = ComparisonVerdict::Holds;
  int worst_vertex = -1;
  double gap = 0.0;  ///< max (u - v) over checked vertices, or the precondition defect
};

/// Discrete comparison: if Q u >= Q v at vertices in `interior_mask` and
/// u <= v at vertices in `boundary_mask`, report whether u <= v on every
/// vertex in either mask. Unmasked vertices are ignored.
ComparisonResult discrete_comparison_check(const ScalarField& u, const ScalarField& v, const ScalarField& Qu,
                                           const ScalarField& Qv, const std::vector<char>& interior_mask,
                                           const std::vector<char>& boundary_mask, double slack = 1e-10);

}  // namespace pmc
