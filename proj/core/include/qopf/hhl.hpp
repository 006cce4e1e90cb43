#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "qopf/linear_solvers.hpp"

namespace qopf {

/// Amplitude profile of the clock register before phase estimation.
enum class ClockWindow {
  Uniform,  // Hadamard on every clock qubit
  Sine,     // a_m ∝ sin(π(m + 1/2)/N), suppresses far-bin leakage
};

/// How clock bins map to eigenvalue estimates.
enum class PhaseConvention {
  Unsigned,  // bin k ↦ phase k/N ∈ [0, 1)
  Signed,    // bins ≥ N/2 are negative phases k/N - 1
  /// t and the phase cut fit [λ_min, λ_max] into one period with a margin
  /// of m = 3 + N/32 bins on each side; bins map to [s, s + 1).
  Fitted,
};

/// Default for the rotation constant C when none is given.
enum class RotationRule {
  SmallestEigenvalue,  // C = min|λ| (exact), success probability O(1/κ²)
  ResolutionLimit,     // C = 2π/(2^c t), the smallest nonzero bin
  /// C = max(min|λ| - m·δ, δ) with bin width δ = 2π/(2^c t) and the fitted
  /// margin m, so no bin within the margin of the spectrum is clamped.
  WindowMargin,
};

struct HhlConfig {
  int clock_qubits = 12;
  /// Overrides the tuned evolution time.
  std::optional<double> evolution_time;
  /// Overrides C; otherwise `rotation_rule` decides.
  std::optional<double> rotation_constant;
  RotationRule rotation_rule = RotationRule::WindowMargin;
  ClockWindow window = ClockWindow::Sine;
  PhaseConvention convention = PhaseConvention::Fitted;
  /// Largest |λ|·t/2π used by the signed tuning; keeps ± phases apart.
  double signed_headroom = 0.4;
  double min_success_probability = 1e-6;
  std::uint64_t seed = 0;  // unused by the exact simulation
};

/// t = 2π(1 - 2^{-c}) / λ_max for positive semidefinite A.
double tune_evolution_time(const MatrixXd& a, int clock_qubits);

/// t = 2π·headroom / max|λ|, suitable for indefinite A with signed phases.
double tune_signed_evolution_time(const MatrixXd& a, double headroom);

/// Guard bins kept between the spectrum and the phase cut.
int fitted_margin_bins(int clock_qubits);

/// t = 2π(1 - 2m/N)/(λ_max - λ_min) for the fitted convention.
double tune_fitted_evolution_time(const MatrixXd& a, int clock_qubits);

struct HhlOutcome {
  VectorXd x;                     // α-scaled solution of A x = b
  Eigen::VectorXcd direction;     // post-selected system register (unnormalized)
  double success_probability = 0.0;
  double evolution_time = 0.0;
  double rotation_constant = 0.0;
  int total_qubits = 0;
};

/// Runs phase estimation, the conditioned ancilla rotation and uncomputation
/// on the statevector for Hermitian `a` (power-of-two size, ‖a‖₂ ≤ 1) and
/// unit `b`; post-selects ancilla = 1 and the clock back in its initial
/// window state.
HhlOutcome hhl_run(const MatrixXd& a, const VectorXd& b, const HhlConfig& config);

/// Embedded solve: result mapped back to the source system of `system`.
SolveReport hhl_solve(const EmbeddedSystem& system, const HhlConfig& config);

}  // namespace qopf
