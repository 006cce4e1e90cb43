// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "qopf/experiments.hpp"
#include "qopf/ipm.hpp"

using namespace qopf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool known_slow = false;
};

int failures = 0;

void report(const std::string& id, const std::string& title, const Outcome& o) {
  const char* tag = o.pass ? "PASS" : (o.known_slow ? "KNOWN-SLOW" : "FAIL");
  if (!o.pass && !o.known_slow) ++failures;
  std::printf("%-10s [%s] %s: %s\n", tag, id.c_str(), title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

void guarded(const std::string& id, const std::string& title, const std::function<Outcome()>& body) {
  try {
    report(id, title, body());
  } catch (const std::exception& e) {
    report(id, title, {false, std::string("exception: ") + e.what()});
  }
}

double rel_err(double value, double ref) { return std::abs(value - ref) / std::abs(ref); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Timed {
  RunSummary summary;
  double seconds = 0.0;
};

Timed timed_run(const RunSpec& spec) {
  const auto t0 = Clock::now();
  Timed t{run_experiment(spec), 0.0};
  t.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return t;
}

RunSpec spec_for(const std::string& c, Formulation f, BackendKind b, const fs::path& out = {}) {
  RunSpec s;
  s.case_path = c;
  s.formulation = f;
  s.backend = b;
  s.out_dir = out;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome classical(const std::string& c, Formulation f, double ref, double tol, double limit_s,
                  int max_iter) {
  const Timed t = timed_run(spec_for(c, f, BackendKind::ClassicalLu));
  const auto& s = t.summary;
  const double err = rel_err(s.objective, ref);
  const bool ok = s.status == SolveStatus::Converged && err <= tol && t.seconds < limit_s &&
                  (max_iter <= 0 || s.iterations <= max_iter);
  return {ok, fmt("status=%s objective=%.4f (ref %.2f, rel err %.2e, tol %.1e) iterations=%d%s time=%.3fs (limit %.0fs)",
                  std::string(to_string(s.status)).c_str(), s.objective, ref, err, tol, s.iterations,
                  max_iter > 0 ? fmt(" (max %d)", max_iter).c_str() : "", t.seconds, limit_s)};
}

Outcome quantum_vs_reference(const Timed& t, double ref_objective, int max_iter, double limit_s,
                             bool slow_is_known = false) {
  const auto& s = t.summary;
  const double err = rel_err(s.objective, ref_objective);
  const bool accurate = s.status == SolveStatus::Converged && err <= 5e-3 && s.iterations <= max_iter;
  const bool in_time = t.seconds < limit_s;
  Outcome o;
  o.pass = accurate && in_time;
  o.known_slow = slow_is_known && accurate && !in_time;
  o.detail = fmt("status=%s objective=%.4f (ref %.4f, rel err %.2e, tol 5.0e-03) iterations=%d (max %d) "
                 "degraded_solves=%d time=%.1fs (limit %.0fs)",
                 std::string(to_string(s.status)).c_str(), s.objective, ref_objective, err, s.iterations,
                 max_iter, s.degraded_solves, t.seconds, limit_s);
  return o;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "qopf_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  guarded("C1", "case3 DC classical", [] { return classical("case3", Formulation::Dc, 746.25, 1e-3, 1.0, 12); });
  guarded("C2", "case6ww DC classical", [] { return classical("case6ww", Formulation::Dc, 2393.31, 1e-3, 1.0, 0); });
  guarded("C3", "case9 DC classical", [] { return classical("case9", Formulation::Dc, 4131.03, 1e-3, 1.0, 0); });
  guarded("C4", "case3 AC classical", [] { return classical("case3", Formulation::Ac, 758.21, 1e-3, 5.0, 0); });

  const RunSummary c3 = run_experiment(spec_for("case3", Formulation::Dc, BackendKind::ClassicalLu));

  fs::path vqls_dir = work / "vqls_a";
  guarded("C5", "case3 DC preconditioned VQLS", [&] {
    return quantum_vs_reference(
        timed_run(spec_for("case3", Formulation::Dc, BackendKind::VqlsPreconditioned, vqls_dir)),
        c3.objective, c3.iterations + 4, 1800.0);
  });
  guarded("C6", "case3 DC preconditioned HHL", [&] {
    return quantum_vs_reference(timed_run(spec_for("case3", Formulation::Dc, BackendKind::HhlPreconditioned)),
                                c3.objective, c3.iterations + 4, 1800.0);
  });
  guarded("C7", "case6ww DC preconditioned VQLS", [&] {
    return quantum_vs_reference(timed_run(spec_for("case6ww", Formulation::Dc, BackendKind::VqlsPreconditioned)),
                                2393.31, 14, 3600.0, /*slow_is_known=*/true);
  });

  guarded("C8", "case3 DC initial gradcond", [&] {
    const double g = c3.initial_metrics.gradcond;
    return Outcome{std::abs(g - 300.0) <= 0.25 * 300.0, fmt("gradcond=%.6g (ref 300, band ±25%%)", g)};
  });

  guarded("C9", "property suite", [&] {
    const std::string filter =
        "Ilu0.DefiningPropertyOnRandomSparse:Ilu0.DefiningPropertyOnBundledKkt:"
        "Preconditioning.SolutionUnchangedOnBundledKkt:Backend.PreconditionedConditionNeverWorseOnMostKktSolves:"
        "Pauli.ReconstructionOnRandomMatrices:Hhl.RandomSpdSystems:VqlsSolve.RandomSmallSystems:"
        "OpfDerivatives.*:Solve.PositivityAndStepLengthsThroughout";
    const fs::path log = work / "properties.log";
    const std::string cmd = std::string(QOPF_UNIT_TESTS_PATH) + " --gtest_filter='" + filter + "' > " +
                            log.string() + " 2>&1";
    const auto t0 = Clock::now();
    const int raw = std::system(cmd.c_str());
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool ok = WIFEXITED(raw) && WEXITSTATUS(raw) == 0;
    const std::string text = slurp(log);
    // "[==========] N tests from M test suites ran."
    int ran = 0;
    std::string summary = "no gtest summary";
    if (const auto pos = text.rfind("[==========] "); pos != std::string::npos) {
      summary = text.substr(pos + 13, text.find('\n', pos) - pos - 13);
      ran = std::atoi(summary.c_str());
    }
    constexpr int kExpected = 13;  // 8 named tests + 5 derivative checks
    return Outcome{ok && secs < 60.0 && ran >= kExpected,
                   fmt("%s (expected %d), exit=%d, time=%.1fs (limit 60s), log %s", summary.c_str(), kExpected,
                       WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, secs, log.string().c_str())};
  });

  guarded("C10", "determinism of the case3 VQLS run", [&] {
    const fs::path again = work / "vqls_b";
    run_experiment(spec_for("case3", Formulation::Dc, BackendKind::VqlsPreconditioned, again));
    const std::string stem = "case3_dc_vqls_preconditioned";
    bool same = true;
    std::string detail;
    for (const char* suffix : {"_trace.csv", "_vqls_trace.csv", "_gradcond.dat"}) {
      const std::string a = slurp(vqls_dir / (stem + suffix)), b = slurp(again / (stem + suffix));
      const bool eq = !a.empty() && a == b;
      same = same && eq;
      detail += fmt("%s%s %s (%zu bytes)", detail.empty() ? "" : ", ", suffix + 1, eq ? "identical" : "DIFFERENT", a.size());
    }
    return Outcome{same, detail};
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
