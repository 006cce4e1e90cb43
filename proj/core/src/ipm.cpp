#include "qopf/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qopf/errors.hpp"

namespace qopf {

namespace {

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool all_finite(const VectorXd& v) { return v.allFinite(); }

double barrier_lagrangian(const NonlinearProgram& p, const VectorXd& x, const IterateState& s) {
  double l = p.objective(x);
  if (s.lam.size()) l += s.lam.dot(p.equalities(x));
  if (s.mu.size()) {
    l += s.mu.dot(p.inequalities(x) + s.z);
    l -= s.gamma * s.z.array().log().sum();
  }
  return l;
}

VectorXd lagrangian_gradient(const NonlinearProgram& p, const VectorXd& x, const VectorXd& lam,
                             const VectorXd& mu) {
  VectorXd g = p.objective_gradient(x);
  if (lam.size()) g.noalias() += p.equality_jacobian(x).transpose() * lam;
  if (mu.size()) g.noalias() += p.inequality_jacobian(x).transpose() * mu;
  return g;
}

double max_step(const VectorXd& v, const VectorXd& dv, double xi) {
  double a = 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, xi * (-v(i) / dv(i)));
  }
  return a;
}

NewtonStep scaled(const NewtonStep& s, double f) {
  return {s.dx * f, s.dz * f, s.dlam * f, s.dmu * f};
}

bool converged(const ConvergenceMetrics& m, const SolverOptions& o) {
  return m.feascond < o.feas_tol && m.gradcond < o.grad_tol && m.compcond < o.comp_tol &&
         m.costcond < o.cost_tol;
}

}  // namespace

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Stalled: return "stalled";
  }
  return "unknown";
}

SolverOptions SolverOptions::defaults(Formulation f) {
  SolverOptions o;
  const double eps = f == Formulation::Ac ? 5e-6 : 1e-6;
  o.feas_tol = o.grad_tol = o.comp_tol = o.cost_tol = eps;
  return o;
}

void SolverOptions::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw OptionError("sigma must lie in (0, 1)");
  if (!(xi > 0.0 && xi < 1.0)) throw OptionError("xi must lie in (0, 1)");
  if (!(kappa_sc > 0.0 && kappa_sc < 1.0)) throw OptionError("kappa_sc must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw OptionError("eta must lie in (0, 1)");
  for (double t : {feas_tol, grad_tol, comp_tol, cost_tol, linear_tolerance}) {
    if (!(t > 0.0)) throw OptionError("tolerances must be positive");
  }
  if (max_iterations < 1) throw OptionError("max_iterations must be at least 1");
}

IterateState initial_state(const NonlinearProgram& problem) {
  IterateState s;
  s.x = problem.initial_point();
  if (s.x.size() != problem.num_variables()) throw DimensionError("initial point has the wrong length");
  const VectorXd g = problem.inequalities(s.x);
  s.gamma = 1.0;
  s.z = (-g).cwiseMax(1.0);
  s.mu = s.gamma * s.z.cwiseInverse();
  s.lam = VectorXd::Zero(problem.num_equalities());
  return s;
}

LinearSystem assemble_kkt(const NonlinearProgram& p, const IterateState& s) {
  const Index nx = p.num_variables();
  const Index ni = p.num_inequalities();
  const Index ne = p.num_equalities();
  if (s.x.size() != nx || s.z.size() != ni || s.mu.size() != ni || s.lam.size() != ne) {
    throw DimensionError("iterate does not match the problem dimensions");
  }
  LinearSystem sys;
  sys.blocks = {nx, ni, ne};
  const Index n = sys.blocks.size();
  sys.a = MatrixXd::Zero(n, n);
  sys.b = VectorXd::Zero(n);

  const Index oz = nx, ol = nx + ni, om = nx + ni + ne;
  const MatrixXd jh = p.equality_jacobian(s.x);
  const MatrixXd jg = p.inequality_jacobian(s.x);

  sys.a.block(0, 0, nx, nx) = p.lagrangian_hessian(s.x, s.lam, s.mu);
  if (ne) {
    sys.a.block(0, ol, nx, ne) = jh.transpose();
    sys.a.block(ol, 0, ne, nx) = jh;
  }
  if (ni) {
    sys.a.block(0, om, nx, ni) = jg.transpose();
    sys.a.block(om, 0, ni, nx) = jg;
    sys.a.block(oz, oz, ni, ni).diagonal() = s.mu.cwiseQuotient(s.z);
    sys.a.block(oz, om, ni, ni).diagonal().setOnes();
    sys.a.block(om, oz, ni, ni).diagonal().setOnes();
  }

  VectorXd grad = p.objective_gradient(s.x);
  if (ne) grad.noalias() += jh.transpose() * s.lam;
  if (ni) grad.noalias() += jg.transpose() * s.mu;
  sys.b.segment(0, nx) = -grad;
  if (ni) {
    sys.b.segment(oz, ni) = -(s.mu - s.gamma * s.z.cwiseInverse());
    sys.b.segment(om, ni) = -(p.inequalities(s.x) + s.z);
  }
  if (ne) sys.b.segment(ol, ne) = -p.equalities(s.x);
  return sys;
}

NewtonStep split_step(const VectorXd& d, const KktBlocks& b) {
  if (d.size() != b.size()) throw DimensionError("step length does not match the KKT blocks");
  return {d.segment(0, b.nx), d.segment(b.nx, b.ni), d.segment(b.nx + b.ni, b.ne),
          d.segment(b.nx + b.ni + b.ne, b.ni)};
}

std::pair<double, double> compute_step_lengths(const IterateState& s, const NewtonStep& step,
                                               double xi) {
  return {max_step(s.z, step.dz, xi), max_step(s.mu, step.dmu, xi)};
}

double update_barrier(const VectorXd& z, const VectorXd& mu, double sigma) {
  if (z.size() == 0) return 0.0;
  return sigma * z.dot(mu) / static_cast<double>(z.size());
}

ConvergenceMetrics compute_convergence_metrics(const NonlinearProgram& p, const IterateState& s,
                                               std::optional<double> previous_objective) {
  ConvergenceMetrics m;
  m.objective = p.objective(s.x);
  const VectorXd h = p.equalities(s.x);
  const VectorXd g = p.inequalities(s.x);

  double viol = inf_norm(h);
  if (g.size()) viol = std::max(viol, g.maxCoeff());
  m.feascond = viol / (1.0 + std::max(inf_norm(s.x), inf_norm(s.z)));
  m.gradcond = inf_norm(lagrangian_gradient(p, s.x, s.lam, s.mu)) /
               (1.0 + std::max(inf_norm(s.lam), inf_norm(s.mu)));
  m.compcond = (s.z.size() ? s.z.dot(s.mu) : 0.0) / (1.0 + inf_norm(s.x));
  m.costcond = previous_objective
                   ? std::abs(m.objective - *previous_objective) / (1.0 + std::abs(*previous_objective))
                   : 0.0;
  return m;
}

StepControlOutcome step_control(const NonlinearProgram& p, const IterateState& s, NewtonStep step,
                                double kappa_sc, double eta) {
  const double l0 = barrier_lagrangian(p, s.x, s);
  const VectorXd lx = lagrangian_gradient(p, s.x, s.lam, s.mu);
  const MatrixXd lxx = p.lagrangian_hessian(s.x, s.lam, s.mu);
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(l0));

  StepControlOutcome out;
  if ((step.dx.array() == 0.0).all()) {  // dual-only step, nothing to test
    out.step = std::move(step);
    return out;
  }
  double scale = 1.0;
  for (;;) {
    const NewtonStep trial = scaled(step, scale);
    const double psi = lx.dot(trial.dx) + 0.5 * trial.dx.dot(lxx * trial.dx);
    if (psi != 0.0) {
      // A predicted change below the rounding level of L cannot be judged
      // by ρ; such a step is accepted as is.
      const bool unresolvable = std::abs(psi) <= noise;
      const double rho = (barrier_lagrangian(p, s.x + trial.dx, s) - l0) / psi;
      if (unresolvable || (rho >= 1.0 - eta && rho <= 1.0 + eta)) {
        out.step = trial;
        return out;
      }
    }
    scale *= kappa_sc;
    ++out.shrinks;
    if (scale < 1e-12) {
      out.step = trial;
      out.stalled = true;
      return out;
    }
  }
}

SolveResult solve(const NonlinearProgram& problem, const SolverOptions& options) {
  auto backend = make_backend(options.backend);
  return solve(problem, options, *backend);
}

SolveResult solve(const NonlinearProgram& problem, const SolverOptions& options,
                  LinearBackend& backend) {
  options.validate();
  SolveResult res;
  IterateState s = initial_state(problem);
  res.initial = compute_convergence_metrics(problem, s, std::nullopt);
  ConvergenceMetrics prev = res.initial;
  bool sc = false;

  if (converged(prev, options)) {
    res.status = SolveStatus::Converged;
  } else {
    for (int t = 1; t <= options.max_iterations; ++t) {
      const LinearSystem kkt = assemble_kkt(problem, s);
      SolveReport rep;
      try {
        rep = backend.solve(kkt, options.linear_tolerance);
      } catch (const std::exception& e) {
        throw SolverError(t, std::string(backend.name()) + ": " + e.what());
      }
      if (!all_finite(rep.x)) throw SolverError(t, backend.name() + ": non-finite Newton step");
      if (rep.flagged) ++res.degraded_solves;

      NewtonStep step = split_step(rep.x, kkt.blocks);
      TraceEntry e;
      if (options.step_control && sc) {
        StepControlOutcome o = step_control(problem, s, std::move(step), options.kappa_sc, options.eta);
        e.step_control_shrinks = o.shrinks;
        if (o.stalled) {
          res.status = SolveStatus::Stalled;
          break;
        }
        step = std::move(o.step);
      }

      const auto [ap, ad] = compute_step_lengths(s, step, options.xi);
      s.x += ap * step.dx;
      s.z += ap * step.dz;
      s.lam += ad * step.dlam;
      s.mu += ad * step.dmu;
      s.gamma = update_barrier(s.z, s.mu, options.sigma);
      if (!all_finite(s.x) || !all_finite(s.lam) || !all_finite(s.mu)) {
        throw SolverError(t, "iterate became non-finite");
      }

      const ConvergenceMetrics m = compute_convergence_metrics(problem, s, prev.objective);
      e.iteration = t;
      e.metrics = m;
      e.alpha_p = ap;
      e.alpha_d = ad;
      e.gamma = s.gamma;
      e.kappa_raw = rep.kappa_raw;
      e.kappa_precond = rep.kappa_precond;
      e.linear_residual = rep.residual;
      e.linear_flagged = rep.flagged;
      e.min_z = s.z.size() ? s.z.minCoeff() : 0.0;
      e.min_mu = s.mu.size() ? s.mu.minCoeff() : 0.0;
      res.trace.push_back(e);
      res.iterations = t;

      if (options.step_control && m.feascond >= prev.feascond && m.gradcond >= prev.gradcond) sc = true;
      prev = m;
      if (converged(m, options)) {
        res.status = SolveStatus::Converged;
        break;
      }
    }
  }
  res.state = s;
  res.final_metrics = prev;
  res.objective = problem.objective(s.x);
  res.vqls_trace = backend.optimizer_trace();
  return res;
}

}  // namespace qopf
