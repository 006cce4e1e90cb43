#include "qopf/hhl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qopf/errors.hpp"
#include "qopf/quantum_sim.hpp"

namespace qopf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::SelfAdjointEigenSolver<MatrixXd> eigen_of(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw QuantumError("HHL needs a square matrix");
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw QuantumError("HHL needs a Hermitian matrix");
  }
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(a);
}

CVector clock_window(ClockWindow window, Index n) {
  CVector w(n);
  for (Index m = 0; m < n; ++m) {
    w(m) = window == ClockWindow::Uniform
               ? 1.0
               : std::sin(std::numbers::pi * (static_cast<double>(m) + 0.5) / static_cast<double>(n));
  }
  return w / w.norm();
}

}  // namespace

double tune_evolution_time(const MatrixXd& a, int clock_qubits) {
  const auto es = eigen_of(a);
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) throw QuantumError("largest eigenvalue must be positive to tune t");
  return kTwoPi * (1.0 - std::ldexp(1.0, -clock_qubits)) / lmax;
}

double tune_signed_evolution_time(const MatrixXd& a, double headroom) {
  const auto es = eigen_of(a);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(lmax > 0.0)) throw QuantumError("cannot tune t for the zero matrix");
  if (!(headroom > 0.0 && headroom < 0.5)) throw QuantumError("signed headroom must lie in (0, 1/2)");
  return kTwoPi * headroom / lmax;
}

int fitted_margin_bins(int clock_qubits) {
  if (clock_qubits < 1) throw QuantumError("HHL needs at least one clock qubit");
  const Index n = Index{1} << clock_qubits;
  if (n < 4) return 0;
  const Index m = 3 + n / 32;
  return static_cast<int>(2 * m >= n / 2 ? std::max<Index>(n / 8, 1) : m);
}

namespace {

double fitted_time(const Eigen::VectorXd& lambdas, int clock_qubits) {
  const double n = std::ldexp(1.0, clock_qubits);
  const double m = fitted_margin_bins(clock_qubits);
  const double scale = lambdas.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw QuantumError("cannot tune t for the zero matrix");
  const double span = std::max(lambdas.maxCoeff() - lambdas.minCoeff(), 1e-3 * scale);
  return kTwoPi * (1.0 - 2.0 * m / n) / span;
}

}  // namespace

double tune_fitted_evolution_time(const MatrixXd& a, int clock_qubits) {
  return fitted_time(eigen_of(a).eigenvalues(), clock_qubits);
}

HhlOutcome hhl_run(const MatrixXd& a, const VectorXd& b, const HhlConfig& config) {
  const Index dim = a.rows();
  if (dim == 0 || (dim & (dim - 1)) != 0) throw QuantumError("HHL matrix size must be a power of two");
  if (b.size() != dim) throw DimensionError("HHL right-hand side has the wrong length");
  if (std::abs(b.norm() - 1.0) > 1e-8) throw QuantumError("HHL right-hand side must be a unit vector");
  if (config.clock_qubits < 1) throw QuantumError("HHL needs at least one clock qubit");

  const auto es = eigen_of(a);
  const int ns = std::countr_zero(static_cast<std::uint64_t>(dim));
  const int nc = config.clock_qubits;
  const Index n_clock = Index{1} << nc;

  HhlOutcome out;
  out.total_qubits = ns + nc + 1;
  const VectorXd& lambdas = es.eigenvalues();
  if (config.evolution_time) {
    out.evolution_time = *config.evolution_time;
  } else if (config.convention == PhaseConvention::Fitted) {
    out.evolution_time = fitted_time(lambdas, nc);
  } else if (config.convention == PhaseConvention::Signed) {
    out.evolution_time = tune_signed_evolution_time(a, config.signed_headroom);
  } else {
    out.evolution_time = tune_evolution_time(a, nc);
  }
  const double t = out.evolution_time;
  const double bin_width = kTwoPi / (static_cast<double>(n_clock) * t);
  const double margin = fitted_margin_bins(nc);
  if (config.rotation_constant) {
    out.rotation_constant = *config.rotation_constant;
  } else if (config.rotation_rule == RotationRule::ResolutionLimit) {
    out.rotation_constant = bin_width;
  } else if (config.rotation_rule == RotationRule::WindowMargin) {
    out.rotation_constant = std::max(lambdas.cwiseAbs().minCoeff() - margin * bin_width, bin_width);
  } else {
    out.rotation_constant = lambdas.cwiseAbs().minCoeff();
  }
  if (!(out.rotation_constant > 0.0)) throw QuantumError("HHL rotation constant must be positive");
  const double c_rot = out.rotation_constant;

  // |b⟩ ⊗ |window⟩ on system [0, ns) and clock [ns, ns + nc).
  StateVector state(ns + nc);
  const CVector w = clock_window(config.window, n_clock);
  {
    CVector amps(dim * n_clock);
    for (Index m = 0; m < n_clock; ++m) amps.segment(m * dim, dim) = w(m) * b.cast<Complex>();
    state.set_amplitudes(std::move(amps));
  }

  std::vector<int> system_qubits(static_cast<std::size_t>(ns));
  for (int q = 0; q < ns; ++q) system_qubits[static_cast<std::size_t>(q)] = q;
  const MatrixXd& v = es.eigenvectors();
  auto controlled_power = [&](int j, double sign) {
    const double tj = sign * t * std::ldexp(1.0, j);
    CVector phases(dim);
    for (Index k = 0; k < dim; ++k) phases(k) = std::exp(Complex(0.0, es.eigenvalues()(k) * tj));
    const CMatrix u = v.cast<Complex>() * phases.asDiagonal() * v.transpose().cast<Complex>();
    state.apply_unitary(system_qubits, u, std::uint64_t{1} << (ns + j));
  };

  // Phase estimation.
  for (int j = 0; j < nc; ++j) controlled_power(j, 1.0);
  state.apply_register_fourier(ns, nc, /*inverse=*/true);

  // Ancilla rotation RY(2 asin(C/λ̃_k)) conditioned on clock bin k. Only the
  // ancilla-1 amplitude C/λ̃_k survives post-selection, so the ancilla-0
  // branch is dropped here rather than carried through uncomputation.
  // Fitted bins map to phases in [cut, cut + 1).
  const double cut = lambdas.minCoeff() * t / kTwoPi - margin / static_cast<double>(n_clock);
  CVector amps = state.amplitudes();
  for (Index k = 0; k < n_clock; ++k) {
    double phase = static_cast<double>(k) / static_cast<double>(n_clock);
    if (config.convention == PhaseConvention::Signed && k >= n_clock / 2) phase -= 1.0;
    if (config.convention == PhaseConvention::Fitted) phase += std::ceil(cut - phase);
    double factor = 0.0;
    if (phase != 0.0) {
      const double lambda = kTwoPi * phase / t;
      factor = std::clamp(c_rot / lambda, -1.0, 1.0);
    }
    amps.segment(k * dim, dim) *= factor;
  }
  const double branch_norm = amps.norm();
  if (!(branch_norm > 0.0)) throw QuantumError("HHL ancilla success branch is empty");
  StateVector success(ns + nc);
  success.set_amplitudes(amps / branch_norm);

  // Uncompute phase estimation on the success branch.
  std::swap(state, success);
  state.apply_register_fourier(ns, nc, /*inverse=*/false);
  for (int j = nc - 1; j >= 0; --j) controlled_power(j, -1.0);

  // Project the clock onto the window state (undo its preparation, keep 0).
  out.direction = CVector::Zero(dim);
  const CVector& fin = state.amplitudes();
  for (Index m = 0; m < n_clock; ++m) out.direction += std::conj(w(m)) * fin.segment(m * dim, dim);
  out.direction *= branch_norm;
  out.success_probability = out.direction.squaredNorm();
  if (out.success_probability < config.min_success_probability) {
    throw QuantumError("HHL post-selection probability " + std::to_string(out.success_probability) +
                       " is below the configured minimum");
  }

  const CVector ax = a.cast<Complex>() * out.direction;
  const Complex alpha = ax.dot(b.cast<Complex>()) / ax.squaredNorm();
  out.x = (alpha * out.direction).real();
  return out;
}

SolveReport hhl_solve(const EmbeddedSystem& system, const HhlConfig& config) {
  const HhlOutcome o = hhl_run(system.a_q, system.b_q, config);
  SolveReport rep;
  rep.backend = "hhl";
  rep.x = system.recover(o.x);
  rep.residual = relative_residual(system.source.a, rep.x, system.source.b);
  rep.qubits = o.total_qubits;
  rep.post_selection_probability = o.success_probability;
  return rep;
}

}  // namespace qopf
