#include "qopf/vqls.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>
#include <glog/logging.h>

#include "qopf/errors.hpp"

namespace qopf {

namespace {

constexpr double kPi = std::numbers::pi;

struct AnsatzOp {
  enum Kind { Rz, Ry, Cnot } kind;
  int target;
  int control;  // CNOT only
  Index param;  // rotations only
};

std::vector<AnsatzOp> ansatz_ops(const AnsatzConfig& c) {
  std::vector<AnsatzOp> ops;
  const int n = c.qubits;
  for (int l = 0; l < c.layers; ++l) {
    for (int q = 0; q < n; ++q) {
      const Index p = 3 * (static_cast<Index>(l) * n + q);
      ops.push_back({AnsatzOp::Rz, q, -1, p});
      ops.push_back({AnsatzOp::Ry, q, -1, p + 1});
      ops.push_back({AnsatzOp::Rz, q, -1, p + 2});
    }
    if (n > 1) {
      const int range = (l % (n - 1)) + 1;
      for (int q = 0; q < n; ++q) {
        const int t = (q + range) % n;
        ops.push_back({AnsatzOp::Cnot, t, q, -1});
      }
    }
  }
  return ops;
}

void apply_op(CVector& psi, const AnsatzOp& op, double angle) {
  const auto dim = static_cast<std::uint64_t>(psi.size());
  const std::uint64_t t = std::uint64_t{1} << op.target;
  switch (op.kind) {
    case AnsatzOp::Rz: {
      const Complex e0 = std::polar(1.0, -angle / 2.0);
      const Complex e1 = std::polar(1.0, angle / 2.0);
      for (std::uint64_t i = 0; i < dim; ++i) psi(static_cast<Index>(i)) *= (i & t) ? e1 : e0;
      break;
    }
    case AnsatzOp::Ry: {
      const double c = std::cos(angle / 2.0);
      const double s = std::sin(angle / 2.0);
      for (std::uint64_t i = 0; i < dim; ++i) {
        if (i & t) continue;
        const auto i0 = static_cast<Index>(i);
        const auto i1 = static_cast<Index>(i | t);
        const Complex a0 = psi(i0), a1 = psi(i1);
        psi(i0) = c * a0 - s * a1;
        psi(i1) = s * a0 + c * a1;
      }
      break;
    }
    case AnsatzOp::Cnot: {
      const std::uint64_t cm = std::uint64_t{1} << op.control;
      for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & t) || !(i & cm)) continue;
        std::swap(psi(static_cast<Index>(i)), psi(static_cast<Index>(i | t)));
      }
      break;
    }
  }
}

// P·ψ for the generator of a rotation (Z or Y) on `target`.
CVector apply_generator(const CVector& psi, const AnsatzOp& op) {
  CVector out(psi.size());
  const std::uint64_t t = std::uint64_t{1} << op.target;
  for (Index i = 0; i < psi.size(); ++i) {
    const bool one = static_cast<std::uint64_t>(i) & t;
    if (op.kind == AnsatzOp::Rz) {
      out(i) = one ? -psi(i) : psi(i);
    } else {  // Y: (Yψ)_0 = -i ψ_1, (Yψ)_1 = i ψ_0
      const Complex partner = psi(static_cast<Index>(static_cast<std::uint64_t>(i) ^ t));
      out(i) = one ? Complex(0.0, 1.0) * partner : Complex(0.0, -1.0) * partner;
    }
  }
  return out;
}

CVector run_ansatz(const std::vector<AnsatzOp>& ops, int qubits, const VectorXd& theta) {
  CVector psi = CVector::Zero(Index{1} << qubits);
  psi(0) = 1.0;
  for (const auto& op : ops) apply_op(psi, op, op.param >= 0 ? theta(op.param) : 0.0);
  return psi;
}

void check_system(const MatrixXd& a, const VectorXd& b, const AnsatzConfig& c) {
  const Index dim = Index{1} << c.qubits;
  if (a.rows() != dim || a.cols() != dim || b.size() != dim) {
    throw DimensionError("VQLS system size does not match 2^qubits");
  }
}

struct Overlaps {
  Complex s;     // ⟨b|Aψ⟩
  double norm2;  // ‖Aψ‖²
  CVector v;     // Aψ
  CVector r;     // (I - |b⟩⟨b|)Aψ
  double perp2;  // ‖r‖², formed directly to avoid 1 - |s|²/N cancellation
};

Overlaps overlaps(const CVector& psi, const MatrixXd& a, const VectorXd& b) {
  Overlaps o;
  o.v = a.cast<Complex>() * psi;
  o.s = b.cast<Complex>().dot(o.v);
  o.norm2 = o.v.squaredNorm();
  if (o.norm2 < 1e-14) throw QuantumError("A annihilates the ansatz state (singular embedding)");
  o.r = o.v - o.s * b.cast<Complex>();
  o.perp2 = o.r.squaredNorm();
  return o;
}

double cost_of(const Overlaps& o) { return std::min(o.perp2 / o.norm2, 1.0); }

}  // namespace

void VqlsConfig::validate() const {
  if (ansatz.qubits < 1) throw QuantumError("VQLS ansatz needs at least one qubit");
  if (ansatz.layers < 1) throw QuantumError("VQLS ansatz needs at least one layer");
  if (max_iterations < 1) throw QuantumError("VQLS max_iterations must be at least 1");
  if (!(tolerance > 0.0)) throw QuantumError("VQLS tolerance must be positive");
  if (!(step_size > 0.0)) throw QuantumError("VQLS step size must be positive");
  if (restarts < 1) throw QuantumError("VQLS needs at least one restart");
  if (initial_theta && initial_theta->size() != ansatz.parameter_count()) {
    throw QuantumError("initial θ has the wrong number of parameters");
  }
}

Circuit build_ansatz(const AnsatzConfig& config, const VectorXd& theta) {
  if (theta.size() != config.parameter_count()) {
    throw QuantumError("ansatz expects " + std::to_string(config.parameter_count()) + " parameters");
  }
  Circuit c(config.qubits);
  for (const auto& op : ansatz_ops(config)) {
    switch (op.kind) {
      case AnsatzOp::Rz: c.add(gates::rz(op.target, theta(op.param))); break;
      case AnsatzOp::Ry: c.add(gates::ry(op.target, theta(op.param))); break;
      case AnsatzOp::Cnot: c.add(gates::cnot(op.control, op.target)); break;
    }
  }
  return c;
}

CVector ansatz_state(const AnsatzConfig& config, const VectorXd& theta) {
  if (theta.size() != config.parameter_count()) {
    throw QuantumError("ansatz expects " + std::to_string(config.parameter_count()) + " parameters");
  }
  return run_ansatz(ansatz_ops(config), config.qubits, theta);
}

EffectiveHamiltonian build_effective_hamiltonian(const MatrixXd& a, const VectorXd& b) {
  const CMatrix ac = a.cast<Complex>();
  const CVector bc = b.cast<Complex>();
  const Index n = a.rows();
  EffectiveHamiltonian h;
  h.a_dag_a = ac.adjoint() * ac;
  h.h_g = ac.adjoint() * (CMatrix::Identity(n, n) - bc * bc.adjoint()) * ac;
  return h;
}

double vqls_cost(const CVector& psi, const MatrixXd& a, const VectorXd& b) {
  return cost_of(overlaps(psi, a, b));
}

double vqls_cost(const CVector& psi, const EffectiveHamiltonian& h) {
  const double num = psi.dot(h.h_g * psi).real();
  const double den = psi.dot(h.a_dag_a * psi).real();
  if (den < 1e-14) throw QuantumError("A annihilates the ansatz state (singular embedding)");
  return num / den;
}

double vqls_cost(const CVector& psi, const PauliDecomposition& a, const VectorXd& b) {
  const CVector v = a.apply(psi);
  const double norm2 = v.squaredNorm();
  if (norm2 < 1e-14) throw QuantumError("A annihilates the ansatz state (singular embedding)");
  const CVector bc = b.cast<Complex>();
  return std::min((v - bc.dot(v) * bc).squaredNorm() / norm2, 1.0);
}

double vqls_unnormalized_cost(const CVector& psi, const MatrixXd& a, const VectorXd& b) {
  const CVector v = a.cast<Complex>() * psi;
  const CVector bc = b.cast<Complex>();
  return (v - bc.dot(v) * bc).squaredNorm();
}

CostGradient parameter_shift_gradient(const AnsatzConfig& config, const VectorXd& theta,
                                      const MatrixXd& a, const VectorXd& b) {
  check_system(a, b, config);
  const auto ops = ansatz_ops(config);
  const auto base = overlaps(run_ansatz(ops, config.qubits, theta), a, b);
  const double f = base.perp2;
  const double nrm = base.norm2;

  CostGradient out;
  out.cost = cost_of(base);
  out.gradient.resize(theta.size());
  VectorXd shifted = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    shifted(i) = theta(i) + kPi / 2.0;
    const auto plus = overlaps(run_ansatz(ops, config.qubits, shifted), a, b);
    shifted(i) = theta(i) - kPi / 2.0;
    const auto minus = overlaps(run_ansatz(ops, config.qubits, shifted), a, b);
    shifted(i) = theta(i);
    // C = ‖r‖²/N; both are expectation values, so each shifts exactly.
    const double df = 0.5 * (plus.perp2 - minus.perp2);
    const double dn = 0.5 * (plus.norm2 - minus.norm2);
    out.gradient(i) = (df * nrm - f * dn) / (nrm * nrm);
  }
  return out;
}

CostGradient adjoint_gradient(const AnsatzConfig& config, const VectorXd& theta,
                              const MatrixXd& a, const VectorXd& b) {
  check_system(a, b, config);
  const auto ops = ansatz_ops(config);
  CVector phi = run_ansatz(ops, config.qubits, theta);
  const auto o = overlaps(phi, a, b);

  // g = ∂C/∂ψ* = Aᵀ(r - C·Aψ) / N
  CostGradient out;
  out.cost = cost_of(o);
  CVector lam = a.transpose().cast<Complex>() * ((o.r - out.cost * o.v) / o.norm2);
  out.gradient = VectorXd::Zero(theta.size());
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const double angle = it->param >= 0 ? theta(it->param) : 0.0;
    if (it->param >= 0) {
      // dC/dθ = 2 Re(λ† (-i/2) P φ) = Im(λ† P φ)
      out.gradient(it->param) = lam.dot(apply_generator(phi, *it)).imag();
    }
    apply_op(phi, *it, -angle);
    apply_op(lam, *it, -angle);
  }
  return out;
}

namespace {

class VqlsObjective final : public ceres::FirstOrderFunction {
 public:
  VqlsObjective(const AnsatzConfig& c, const MatrixXd& a, const VectorXd& b, GradientMethod m)
      : config_(c), a_(a), b_(b), method_(m) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::Map<const VectorXd> theta(parameters, config_.parameter_count());
    if (gradient == nullptr) {
      *cost = vqls_cost(ansatz_state(config_, theta), a_, b_);
      return true;
    }
    const auto cg = method_ == GradientMethod::Adjoint ? adjoint_gradient(config_, theta, a_, b_)
                                                       : parameter_shift_gradient(config_, theta, a_, b_);
    *cost = cg.cost;
    Eigen::Map<VectorXd>(gradient, config_.parameter_count()) = cg.gradient;
    return true;
  }

  int NumParameters() const override { return static_cast<int>(config_.parameter_count()); }

 private:
  AnsatzConfig config_;
  const MatrixXd& a_;
  const VectorXd& b_;
  GradientMethod method_;
};

class TraceCallback final : public ceres::IterationCallback {
 public:
  TraceCallback(int restart, double tol, std::vector<VqlsTraceRow>& rows)
      : restart_(restart), tol_(tol), rows_(rows) {}

  ceres::CallbackReturnType operator()(const ceres::IterationSummary& s) override {
    rows_.push_back({restart_, s.iteration, s.cost, s.gradient_norm});
    return s.cost <= tol_ ? ceres::SOLVER_TERMINATE_SUCCESSFULLY : ceres::SOLVER_CONTINUE;
  }

 private:
  int restart_;
  double tol_;
  std::vector<VqlsTraceRow>& rows_;
};

struct RestartOutcome {
  VectorXd theta;
  double cost = 1.0;
  int iterations = 0;
};

CostGradient evaluate(const VqlsConfig& cfg, const VectorXd& theta, const MatrixXd& a,
                      const VectorXd& b) {
  return cfg.gradient == GradientMethod::Adjoint ? adjoint_gradient(cfg.ansatz, theta, a, b)
                                                 : parameter_shift_gradient(cfg.ansatz, theta, a, b);
}

// Line-search diagnostics from the minimizer go to glog; keep errors only.
void quiet_minimizer_logging() {
  static const bool done = [] {
    FLAGS_minloglevel = google::GLOG_ERROR;
    return true;
  }();
  (void)done;
}

RestartOutcome run_bfgs(const VqlsConfig& cfg, VectorXd theta, const MatrixXd& a,
                        const VectorXd& b, int restart, std::vector<VqlsTraceRow>& trace) {
  quiet_minimizer_logging();
  ceres::GradientProblem problem(new VqlsObjective(cfg.ansatz, a, b, cfg.gradient));
  ceres::GradientProblemSolver::Options opts;
  opts.line_search_direction_type = ceres::BFGS;
  opts.max_num_iterations = cfg.max_iterations;
  opts.function_tolerance = 1e-16;
  opts.gradient_tolerance = 1e-14;
  opts.parameter_tolerance = 1e-14;
  opts.logging_type = ceres::SILENT;
  opts.minimizer_progress_to_stdout = false;
  TraceCallback cb(restart, cfg.tolerance, trace);
  opts.callbacks.push_back(&cb);
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opts, problem, theta.data(), &summary);
  RestartOutcome out;
  out.cost = vqls_cost(ansatz_state(cfg.ansatz, theta), a, b);
  out.theta = std::move(theta);
  out.iterations = static_cast<int>(summary.iterations.size());
  return out;
}

RestartOutcome run_gradient_descent(const VqlsConfig& cfg, VectorXd theta, const MatrixXd& a,
                                    const VectorXd& b, int restart,
                                    std::vector<VqlsTraceRow>& trace) {
  RestartOutcome best{theta, 2.0, 0};
  for (int it = 0; it <= cfg.max_iterations; ++it) {
    const auto cg = evaluate(cfg, theta, a, b);
    trace.push_back({restart, it, cg.cost, cg.gradient.norm()});
    if (cg.cost < best.cost) {
      best.cost = cg.cost;
      best.theta = theta;
    }
    best.iterations = it;
    if (cg.cost <= cfg.tolerance || it == cfg.max_iterations) break;
    theta -= cfg.step_size * cg.gradient;
  }
  return best;
}

RestartOutcome run_random_search(const VqlsConfig& cfg, VectorXd theta, const MatrixXd& a,
                                 const VectorXd& b, int restart, std::uint64_t seed,
                                 std::vector<VqlsTraceRow>& trace) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sigma = cfg.step_size;
  double cost = vqls_cost(ansatz_state(cfg.ansatz, theta), a, b);
  trace.push_back({restart, 0, cost, 0.0});
  RestartOutcome out{theta, cost, 0};
  for (int it = 1; it <= cfg.max_iterations && cost > cfg.tolerance; ++it) {
    VectorXd trial = theta;
    for (Index i = 0; i < trial.size(); ++i) trial(i) += sigma * normal(rng);
    const double c = vqls_cost(ansatz_state(cfg.ansatz, trial), a, b);
    if (c < cost) {
      theta = std::move(trial);
      cost = c;
      sigma = std::min(sigma * 1.5, kPi);
    } else {
      sigma = std::max(sigma * 0.9, 1e-8);
    }
    trace.push_back({restart, it, cost, 0.0});
    out.iterations = it;
  }
  out.theta = std::move(theta);
  out.cost = cost;
  return out;
}

}  // namespace

VqlsResult vqls_optimize(const MatrixXd& a, const VectorXd& b, const VqlsConfig& config) {
  config.validate();
  check_system(a, b, config.ansatz);
  VqlsResult result;
  const Index np = config.ansatz.parameter_count();

  for (int r = 0; r < config.restarts; ++r) {
    const std::uint64_t seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(r);
    result.restart_seeds.push_back(seed);
    VectorXd theta0(np);
    if (r == 0 && config.initial_theta) {
      theta0 = *config.initial_theta;
    } else {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uni(-kPi, kPi);
      for (Index i = 0; i < np; ++i) theta0(i) = uni(rng);
    }

    RestartOutcome o;
    switch (config.optimizer) {
      case VqlsOptimizer::Bfgs:
        o = run_bfgs(config, theta0, a, b, r, result.trace);
        break;
      case VqlsOptimizer::GradientDescent:
        o = run_gradient_descent(config, theta0, a, b, r, result.trace);
        break;
      case VqlsOptimizer::AdaptiveRandomSearch:
        o = run_random_search(config, theta0, a, b, r, seed, result.trace);
        break;
    }
    // The starting point counts as a candidate, so resuming from θ* never
    // returns a worse cost.
    const double c0 = vqls_cost(ansatz_state(config.ansatz, theta0), a, b);
    if (c0 < o.cost) {
      o.cost = c0;
      o.theta = theta0;
    }

    result.iterations += o.iterations;
    result.restarts_used = r + 1;
    if (r == 0 || o.cost < result.cost) {
      result.cost = o.cost;
      result.theta = o.theta;
      result.best_restart = r;
    }
    if (result.cost <= config.tolerance) break;
  }
  return result;
}

void write_vqls_trace_csv(std::ostream& out, const std::vector<VqlsTraceRow>& trace) {
  out << "restart,iteration,cost,grad_norm\n";
  out.precision(17);
  for (const auto& r : trace) {
    out << r.restart << ',' << r.iteration << ',' << r.cost << ',' << r.grad_norm << '\n';
  }
}

SolveReport vqls_extract_solution(const VectorXd& theta, const AnsatzConfig& ansatz,
                                  const EmbeddedSystem& system, double tolerance) {
  const CVector psi = ansatz_state(ansatz, theta);
  const CVector v = system.a_q.cast<Complex>() * psi;
  const Complex inner = v.dot(system.b_q.cast<Complex>());
  SolveReport rep;
  rep.backend = "vqls";
  rep.qubits = ansatz.qubits;
  rep.layers = ansatz.layers;
  rep.final_cost = vqls_cost(psi, system.a_q, system.b_q);
  rep.unnormalized_cost = vqls_unnormalized_cost(psi, system.a_q, system.b_q);

  if (std::abs(inner) <= 1e-14 * std::sqrt(v.squaredNorm())) {
    rep.x = VectorXd::Zero(system.original_size);
    rep.residual = 1.0;
    rep.flagged = true;
    rep.message = "degenerate: A x̂ is orthogonal to b";
    return rep;
  }
  const Complex alpha = inner / v.squaredNorm();
  rep.x = system.recover((alpha * psi).real());
  rep.residual = relative_residual(system.source.a, rep.x, system.source.b);
  if (!(rep.residual <= tolerance)) {
    rep.flagged = true;
    rep.message = "residual above tolerance";
  }
  return rep;
}

int complete_depth(int qubits) {
  if (qubits < 1 || qubits > 30) throw QuantumError("qubit count out of range");
  const long long dim = 1LL << qubits;
  return static_cast<int>((dim + qubits - 1) / qubits);
}

SolveReport vqls_solve(const EmbeddedSystem& system, const VqlsSolveOptions& options,
                       std::vector<VqlsTraceRow>* trace_out, VectorXd* theta_out) {
  if (options.layer_schedule.empty()) throw QuantumError("VQLS layer schedule is empty");
  const auto pauli = pauli_decompose(system.a_q.cast<Complex>());
  std::vector<int> schedule = options.layer_schedule;
  if (options.escalate_to_complete_depth) {
    const int full = complete_depth(system.num_qubits);
    if (full > *std::max_element(schedule.begin(), schedule.end())) schedule.push_back(full);
  }

  SolveReport best;
  VectorXd best_theta;
  int total_iterations = 0;
  int total_restarts = 0;
  bool have = false;
  for (int layers : schedule) {
    VqlsConfig cfg = options.config;
    cfg.ansatz.qubits = system.num_qubits;
    cfg.ansatz.layers = layers;
    if (cfg.initial_theta && cfg.initial_theta->size() != cfg.ansatz.parameter_count()) {
      cfg.initial_theta.reset();
    }
    const VqlsResult res = vqls_optimize(system.a_q, system.b_q, cfg);
    if (trace_out) trace_out->insert(trace_out->end(), res.trace.begin(), res.trace.end());
    total_iterations += res.iterations;
    total_restarts += res.restarts_used;

    SolveReport rep = vqls_extract_solution(res.theta, cfg.ansatz, system, options.tolerance);
    if (!have || rep.residual < best.residual) {
      best = rep;
      best_theta = res.theta;
      have = true;
    }
    if (!rep.flagged) break;
  }
  best.optimizer_iterations = total_iterations;
  best.restarts_used = total_restarts;
  best.pauli_terms = pauli.terms.size();
  if (theta_out) *theta_out = best_theta;
  return best;
}

}  // namespace qopf
