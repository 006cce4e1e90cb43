#include "qopf/backend.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "qopf/errors.hpp"

namespace qopf {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::ClassicalLu: return "classical_lu";
    case BackendKind::HhlPreconditioned: return "hhl_preconditioned";
    case BackendKind::VqlsPreconditioned: return "vqls_preconditioned";
  }
  return "unknown";
}

std::string_view to_string(Precondition p) {
  switch (p) {
    case Precondition::None: return "none";
    case Precondition::Ilu0: return "ilu0";
    case Precondition::IluK: return "iluk";
  }
  return "unknown";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

BackendKind backend_from_string(std::string_view s) {
  const std::string k = lower(s);
  if (k == "classical_lu" || k == "classical" || k == "lu") return BackendKind::ClassicalLu;
  if (k == "hhl_preconditioned" || k == "hhl") return BackendKind::HhlPreconditioned;
  if (k == "vqls_preconditioned" || k == "vqls") return BackendKind::VqlsPreconditioned;
  throw OptionError("unknown backend '" + std::string(s) + "'");
}

Precondition precondition_from_string(std::string_view s) {
  const std::string k = lower(s);
  if (k == "none" || k == "off") return Precondition::None;
  if (k == "ilu0") return Precondition::Ilu0;
  if (k == "iluk" || k == "ilu") return Precondition::IluK;
  throw OptionError("unknown preconditioner '" + std::string(s) + "'");
}

const std::vector<VqlsTraceRow>& LinearBackend::optimizer_trace() const {
  static const std::vector<VqlsTraceRow> empty;
  return empty;
}

namespace {

/// Shared front half: optional ILU(0), then the diagnostics.
struct Prepared {
  LinearSystem working;  // system handed to the inner solver
  int shift_retries = 0;
  double shift = 0.0;
  double kappa_raw = std::numeric_limits<double>::quiet_NaN();
  double kappa_precond = std::numeric_limits<double>::quiet_NaN();
};

Prepared prepare(const LinearSystem& system, const BackendOptions& opt) {
  system.validate();
  Prepared p;
  if (opt.precondition != Precondition::None) {
    IluOptions io = opt.ilu;
    if (opt.precondition == Precondition::Ilu0) io.fill_level = 0;
    const IluFactors f = build_ilu_preconditioner(system.a, io);
    p.working = apply_left_preconditioning(system, f);
    p.shift_retries = f.shift_retries;
    p.shift = f.shift;
  } else {
    p.working = system;
  }
  if (opt.condition_numbers) {
    p.kappa_raw = condition_number(system.a);
    if (opt.precondition != Precondition::None) p.kappa_precond = condition_number(p.working.a);
  }
  return p;
}

void finish(SolveReport& rep, const LinearSystem& raw, const Prepared& p, double tolerance) {
  rep.residual = relative_residual(raw.a, rep.x, raw.b);
  rep.kappa_raw = p.kappa_raw;
  rep.kappa_precond = p.kappa_precond;
  rep.ilu_shift_retries = p.shift_retries;
  rep.ilu_shift = p.shift;
  if (!(rep.residual <= tolerance)) {
    rep.flagged = true;
    if (rep.message.empty()) {
      rep.message = "residual " + std::to_string(rep.residual) + " above tolerance " +
                    std::to_string(tolerance);
    }
  }
}

class ClassicalBackend final : public LinearBackend {
 public:
  explicit ClassicalBackend(BackendOptions opt) : opt_(std::move(opt)) {}
  std::string name() const override { return std::string(to_string(BackendKind::ClassicalLu)); }

  SolveReport solve(const LinearSystem& system, double tolerance) override {
    const Prepared p = prepare(system, opt_);
    SolveReport rep = direct_solve(p.working);
    rep.backend = name();
    rep.message.clear();
    finish(rep, system, p, tolerance);
    return rep;
  }

 private:
  BackendOptions opt_;
};

class HhlBackend final : public LinearBackend {
 public:
  explicit HhlBackend(BackendOptions opt) : opt_(std::move(opt)) {}
  std::string name() const override { return std::string(to_string(BackendKind::HhlPreconditioned)); }

  SolveReport solve(const LinearSystem& system, double tolerance) override {
    const Prepared p = prepare(system, opt_);
    const EmbeddedSystem emb = quantum_embedding(p.working);
    SolveReport rep = hhl_solve(emb, opt_.hhl);
    rep.backend = name();
    finish(rep, system, p, tolerance);
    return rep;
  }

 private:
  BackendOptions opt_;
};

class VqlsBackend final : public LinearBackend {
 public:
  explicit VqlsBackend(BackendOptions opt) : opt_(std::move(opt)) {}
  std::string name() const override { return std::string(to_string(BackendKind::VqlsPreconditioned)); }

  SolveReport solve(const LinearSystem& system, double tolerance) override {
    const Prepared p = prepare(system, opt_);
    const EmbeddedSystem emb = quantum_embedding(p.working);

    VqlsSolveOptions vo = opt_.vqls;
    vo.tolerance = tolerance;
    vo.config.seed = opt_.vqls.config.seed + static_cast<std::uint64_t>(solves_);
    if (opt_.vqls_warm_start && warm_.size() > 0 && warm_qubits_ == emb.num_qubits) {
      vo.config.initial_theta = warm_;
      vo.config.ansatz.layers = warm_layers_;
      // Keep the schedule from the warm layer count upward.
      std::vector<int> sched;
      for (int l : vo.layer_schedule) {
        if (l >= warm_layers_) sched.push_back(l);
      }
      if (sched.empty() || sched.front() != warm_layers_) sched.insert(sched.begin(), warm_layers_);
      vo.layer_schedule = sched;
    }

    VectorXd theta;
    SolveReport rep = vqls_solve(emb, vo, &trace_, &theta);
    ++solves_;
    warm_ = theta;
    warm_layers_ = rep.layers;
    warm_qubits_ = emb.num_qubits;

    rep.backend = name();
    finish(rep, system, p, tolerance);
    return rep;
  }

  const std::vector<VqlsTraceRow>& optimizer_trace() const override { return trace_; }

 private:
  BackendOptions opt_;
  std::vector<VqlsTraceRow> trace_;
  VectorXd warm_;
  int warm_layers_ = 0;
  int warm_qubits_ = 0;
  int solves_ = 0;
};

}  // namespace

std::unique_ptr<LinearBackend> make_backend(const BackendOptions& options) {
  switch (options.kind) {
    case BackendKind::ClassicalLu: return std::make_unique<ClassicalBackend>(options);
    case BackendKind::HhlPreconditioned: return std::make_unique<HhlBackend>(options);
    case BackendKind::VqlsPreconditioned: return std::make_unique<VqlsBackend>(options);
  }
  throw Error("unknown backend kind");
}

}  // namespace qopf
