#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qopf/linear_solvers.hpp"
#include "qopf/quantum_sim.hpp"

namespace qopf {

/// Strongly entangling layers: per layer a Rot(φ, θ, ω) = RZ(ω)·RY(θ)·RZ(φ)
/// on every qubit, then CNOT(q, q + r mod n) for all q with range
/// r = (layer mod (n - 1)) + 1.
struct AnsatzConfig {
  int qubits = 1;
  int layers = 4;

  Index parameter_count() const { return 3 * static_cast<Index>(qubits) * layers; }
};

Circuit build_ansatz(const AnsatzConfig& config, const VectorXd& theta);
/// |ψ(θ)⟩ = U(θ)|0⟩.
CVector ansatz_state(const AnsatzConfig& config, const VectorXd& theta);

enum class VqlsOptimizer {
  GradientDescent,       // fixed step, parameter-shift gradient
  AdaptiveRandomSearch,  // derivative-free (1+1) search with step adaptation
  Bfgs,                  // quasi-Newton with line search
};

enum class GradientMethod { ParameterShift, Adjoint };

struct VqlsConfig {
  AnsatzConfig ansatz;
  int max_iterations = 2000;
  /// ε on the normalized cost. The relative residual of the embedded
  /// system is √cost, so this sits near the double-precision floor.
  double tolerance = 1e-24;
  VqlsOptimizer optimizer = VqlsOptimizer::Bfgs;
  GradientMethod gradient = GradientMethod::Adjoint;
  double step_size = 0.1;
  int restarts = 5;
  std::uint64_t seed = 7;
  /// Starting point for the first restart (others are random).
  std::optional<VectorXd> initial_theta;

  /// Throws QuantumError when an invariant is violated.
  void validate() const;
};

/// H_G = A†(I - |b⟩⟨b|)A with the cached A†A.
struct EffectiveHamiltonian {
  CMatrix h_g;
  CMatrix a_dag_a;
};

EffectiveHamiltonian build_effective_hamiltonian(const MatrixXd& a, const VectorXd& b);

/// ⟨ψ|H_G|ψ⟩ / ⟨ψ|A†A|ψ⟩ = ‖(I - |b⟩⟨b|)Aψ‖²/‖Aψ‖². Throws QuantumError
/// when ‖Aψ‖² < 1e-14.
double vqls_cost(const CVector& psi, const MatrixXd& a, const VectorXd& b);
double vqls_cost(const CVector& psi, const EffectiveHamiltonian& h);
double vqls_cost(const CVector& psi, const PauliDecomposition& a, const VectorXd& b);
/// ⟨ψ|H_G|ψ⟩ without normalization.
double vqls_unnormalized_cost(const CVector& psi, const MatrixXd& a, const VectorXd& b);

/// Cost of θ and its gradient.
struct CostGradient {
  double cost = 0.0;
  VectorXd gradient;
};

CostGradient parameter_shift_gradient(const AnsatzConfig& config, const VectorXd& theta,
                                      const MatrixXd& a, const VectorXd& b);
CostGradient adjoint_gradient(const AnsatzConfig& config, const VectorXd& theta,
                              const MatrixXd& a, const VectorXd& b);

struct VqlsTraceRow {
  int restart = 0;
  int iteration = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
};

struct VqlsResult {
  VectorXd theta;
  double cost = 1.0;
  int restarts_used = 0;
  int best_restart = 0;
  int iterations = 0;  // summed over restarts
  std::vector<VqlsTraceRow> trace;
  std::vector<std::uint64_t> restart_seeds;
};

/// Minimizes the normalized cost for A x = b (A of size 2^qubits, real).
VqlsResult vqls_optimize(const MatrixXd& a, const VectorXd& b, const VqlsConfig& config);

/// CSV: restart,iteration,cost,grad_norm
void write_vqls_trace_csv(std::ostream& out, const std::vector<VqlsTraceRow>& trace);

/// Reads |ψ(θ)⟩, applies α = ⟨b, Aψ⟩/‖Aψ‖², and un-embeds. Flags the report
/// when Aψ ⊥ b or the source residual exceeds `tolerance`.
SolveReport vqls_extract_solution(const VectorXd& theta, const AnsatzConfig& ansatz,
                                  const EmbeddedSystem& system, double tolerance);

/// Smallest depth whose 3·n·L angles cover the 2^(n+1) real degrees of
/// freedom of an n-qubit state with 50% headroom: ⌈2^n / n⌉.
int complete_depth(int qubits);

struct VqlsSolveOptions {
  VqlsConfig config;
  std::vector<int> layer_schedule{4, 6, 8};
  double tolerance = 1e-4;  // source-space relative residual
  /// After the schedule, retry once at complete_depth() when it is deeper.
  bool escalate_to_complete_depth = true;
};

/// Optimize + extract, escalating layers while the residual is flagged.
/// The best θ is written to `theta_out` when provided.
SolveReport vqls_solve(const EmbeddedSystem& system, const VqlsSolveOptions& options,
                       std::vector<VqlsTraceRow>* trace_out = nullptr,
                       VectorXd* theta_out = nullptr);

}  // namespace qopf
