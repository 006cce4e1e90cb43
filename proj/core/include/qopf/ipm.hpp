#pragma once

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qopf/backend.hpp"
#include "qopf/linear_solvers.hpp"
#include "qopf/opf_problem.hpp"

namespace qopf {

struct SolverOptions {
  double sigma = 0.1;       // centering parameter
  double xi = 0.99995;      // fraction-to-boundary factor
  double kappa_sc = 0.6;    // step-control shrink factor
  double eta = 0.25;        // ρ acceptance band is [1 - η, 1 + η]
  double feas_tol = 1e-6;
  double grad_tol = 1e-6;
  double comp_tol = 1e-6;
  double cost_tol = 1e-6;
  int max_iterations = 150;
  bool step_control = true;
  /// Relative residual asked of the linear backend on every KKT solve.
  double linear_tolerance = 1e-6;
  BackendOptions backend;

  /// Defaults: ε = 1e-6 (DC) or 5e-6 (AC).
  static SolverOptions defaults(Formulation f);
  /// Throws Error when a parameter is out of range.
  void validate() const;
};

struct IterateState {
  VectorXd x;
  VectorXd z;    // slacks, > 0
  VectorXd lam;  // equality multipliers
  VectorXd mu;   // inequality multipliers, > 0
  double gamma = 1.0;
};

struct NewtonStep {
  VectorXd dx, dz, dlam, dmu;
};

struct ConvergenceMetrics {
  double feascond = 0.0;
  double gradcond = 0.0;
  double compcond = 0.0;
  double costcond = 0.0;
  double objective = 0.0;
};

struct TraceEntry {
  int iteration = 0;
  ConvergenceMetrics metrics;
  double alpha_p = 0.0;
  double alpha_d = 0.0;
  double gamma = 0.0;
  double kappa_raw = std::numeric_limits<double>::quiet_NaN();
  double kappa_precond = std::numeric_limits<double>::quiet_NaN();
  // Not part of the CSV trace.
  double linear_residual = 0.0;
  bool linear_flagged = false;
  int step_control_shrinks = 0;
  double min_z = 0.0;
  double min_mu = 0.0;
};

using ConvergenceTrace = std::vector<TraceEntry>;

enum class SolveStatus { Converged, MaxIterations, Stalled };
std::string_view to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterations;
  IterateState state;
  ConvergenceMetrics initial;  // metrics at the starting point
  ConvergenceMetrics final_metrics;
  ConvergenceTrace trace;
  int iterations = 0;
  int degraded_solves = 0;  // KKT solves returned flagged by the backend
  double objective = 0.0;
  std::vector<VqlsTraceRow> vqls_trace;
};

/// Initial iterate: Z = max(-G(X₀), 1), μ = γ/Z with γ = 1, λ = 0.
IterateState initial_state(const NonlinearProgram& problem);

/// Full Newton system in (ΔX, ΔZ, Δλ, Δμ) with right-hand side
/// -[∇L; μ - γ/Z; H; G + Z].
LinearSystem assemble_kkt(const NonlinearProgram& problem, const IterateState& s);

NewtonStep split_step(const VectorXd& d, const KktBlocks& blocks);

/// Fraction-to-boundary step lengths (α_p from Z, α_d from μ), each in (0, 1].
std::pair<double, double> compute_step_lengths(const IterateState& s, const NewtonStep& step,
                                               double xi);

/// γ = σ μᵀZ / n_i (0 when there are no inequalities).
double update_barrier(const VectorXd& z, const VectorXd& mu, double sigma);

/// `previous_objective` is empty on the first evaluation (costcond = 0).
ConvergenceMetrics compute_convergence_metrics(const NonlinearProgram& problem,
                                               const IterateState& s,
                                               std::optional<double> previous_objective);

struct StepControlOutcome {
  NewtonStep step;
  int shrinks = 0;
  bool stalled = false;
};

/// Shrinks the whole step by κ_sc until ρ = (L_γ(X+ΔX) - L_γ(X)) / ψ lies in
/// [1 - η, 1 + η], ψ being the quadratic model. Stalls once the scale drops
/// below 1e-12. A predicted change ψ below the rounding level of L is
/// accepted without evaluating ρ.
StepControlOutcome step_control(const NonlinearProgram& problem, const IterateState& s,
                                NewtonStep step, double kappa_sc, double eta);

/// Primal-dual interior point method. Backend failures surface as
/// SolverError carrying the iteration.
SolveResult solve(const NonlinearProgram& problem, const SolverOptions& options,
                  LinearBackend& backend);
SolveResult solve(const NonlinearProgram& problem, const SolverOptions& options);

}  // namespace qopf
