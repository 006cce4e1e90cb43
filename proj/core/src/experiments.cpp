#include "qopf/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "qopf/errors.hpp"
#include "qopf/network_model.hpp"
#include "qopf/trace_io.hpp"

#ifndef QOPF_DEFAULT_CASE_DIR
#define QOPF_DEFAULT_CASE_DIR "data/cases"
#endif

namespace qopf {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

fs::path bundled_case_dir() {
  if (const char* env = std::getenv("QOPF_CASE_DIR"); env && *env) return env;
  return QOPF_DEFAULT_CASE_DIR;
}

fs::path resolve_case_path(const std::string& case_arg) {
  if (case_arg.empty()) throw CaseNotFoundError(case_arg);
  const fs::path direct(case_arg);
  if (fs::is_regular_file(direct)) return direct;
  if (!direct.has_parent_path()) {
    for (const char* ext : {".json", ".m"}) {
      const fs::path bundled = bundled_case_dir() / (case_arg + ext);
      if (fs::is_regular_file(bundled)) return bundled;
    }
  }
  throw CaseNotFoundError(case_arg);
}

SolverOptions make_solver_options(const RunSpec& spec) {
  SolverOptions o = SolverOptions::defaults(spec.formulation);
  if (spec.max_iterations) o.max_iterations = *spec.max_iterations;
  if (spec.tolerance) o.feas_tol = o.grad_tol = o.comp_tol = o.cost_tol = *spec.tolerance;

  BackendOptions& b = o.backend;
  b.kind = spec.backend;
  b.precondition = spec.precondition.value_or(
      spec.backend == BackendKind::ClassicalLu ? Precondition::None : Precondition::IluK);
  if (spec.ilu_fill) b.ilu.fill_level = *spec.ilu_fill;
  b.hhl.seed = spec.seed;
  if (spec.hhl_clock) b.hhl.clock_qubits = *spec.hhl_clock;
  b.vqls.config.seed = spec.seed;
  if (spec.vqls_layers) {
    const int l0 = *spec.vqls_layers;
    std::vector<int> sched{l0};
    for (int l : b.vqls.layer_schedule) {
      if (l > l0) sched.push_back(l);
    }
    b.vqls.layer_schedule = sched;
  }
  o.validate();
  return o;
}

namespace {

int ceil_log2(Index n) {
  int q = 0;
  while ((Index{1} << q) < n) ++q;
  return q;
}

ordered_json metrics_json(const ConvergenceMetrics& m) {
  ordered_json j;
  j["feascond"] = m.feascond;
  j["gradcond"] = m.gradcond;
  j["compcond"] = m.compcond;
  j["costcond"] = m.costcond;
  j["objective"] = m.objective;
  return j;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

RunSummary run_experiment(const RunSpec& spec) {
  const fs::path path = resolve_case_path(spec.case_path);
  const PowerCase pc = load_case(path);
  const auto problem = build_problem(pc, spec.formulation);
  const SolverOptions options = make_solver_options(spec);

  if (spec.backend == BackendKind::HhlPreconditioned) {
    // Worst case: padded and dilated system register, clock, ancilla.
    const Index n = problem->num_variables() + 2 * problem->num_inequalities() +
                    problem->num_equalities();
    const int qubits = ceil_log2(n) + 1 + options.backend.hhl.clock_qubits + 1;
    if (qubits > spec.max_hhl_qubits) {
      throw OptionError("HHL would need " + std::to_string(qubits) + " qubits (limit " +
                  std::to_string(spec.max_hhl_qubits) + "); raise the limit to run it");
    }
  }

  RunSummary s;
  s.case_name = pc.name;
  s.case_path = path.string();
  s.formulation = spec.formulation;
  s.backend = spec.backend;
  s.precondition = options.backend.precondition;
  s.ilu_fill_level = s.precondition == Precondition::Ilu0 ? 0 : options.backend.ilu.fill_level;
  s.seed = spec.seed;

  const auto t0 = std::chrono::steady_clock::now();
  s.result = solve(*problem, options);
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  s.status = s.result.status;
  s.iterations = static_cast<int>(s.result.trace.size());
  s.objective = s.result.objective;
  s.initial_metrics = s.result.initial;
  s.final_metrics = s.result.final_metrics;
  s.degraded_solves = s.result.degraded_solves;
  for (const auto& e : s.result.trace) {
    s.kappa_raw.push_back(e.kappa_raw);
    s.kappa_precond.push_back(e.kappa_precond);
  }

  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    const std::string stem = s.case_name + "_" + std::string(to_string(spec.formulation)) + "_" +
                             std::string(to_string(spec.backend));
    s.artifacts.trace_csv = stem + "_trace.csv";
    s.artifacts.gradcond_data = stem + "_gradcond.dat";
    s.artifacts.summary_json = stem + "_summary.json";
    {
      std::ostringstream os;
      write_trace_csv(os, s.result.trace);
      write_file(spec.out_dir / s.artifacts.trace_csv, os.str());
    }
    {
      std::ostringstream os;
      write_gradcond_data(os, s.result.trace);
      write_file(spec.out_dir / s.artifacts.gradcond_data, os.str());
    }
    if (spec.backend == BackendKind::VqlsPreconditioned) {
      s.artifacts.vqls_trace_csv = stem + "_vqls_trace.csv";
      std::ostringstream os;
      write_vqls_trace_csv(os, s.result.vqls_trace);
      write_file(spec.out_dir / s.artifacts.vqls_trace_csv, os.str());
    }
    write_file(spec.out_dir / s.artifacts.summary_json, summary_json(s));
  }
  return s;
}

std::string summary_json(const RunSummary& s, bool with_timing) {
  ordered_json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["case"] = s.case_name;
  j["case_path"] = s.case_path;
  j["formulation"] = std::string(to_string(s.formulation));
  j["backend"] = std::string(to_string(s.backend));
  j["precondition"] = std::string(to_string(s.precondition));
  if (s.precondition != Precondition::None) j["ilu_fill_level"] = s.ilu_fill_level;
  j["seed"] = s.seed;
  j["status"] = std::string(to_string(s.status));
  j["iterations"] = s.iterations;
  j["objective"] = s.objective;
  j["initial_metrics"] = metrics_json(s.initial_metrics);
  j["final_metrics"] = metrics_json(s.final_metrics);
  j["kappa_raw"] = s.kappa_raw;
  j["kappa_precond"] = s.kappa_precond;
  j["degraded_solves"] = s.degraded_solves;
  if (with_timing) j["wall_time_s"] = s.wall_time_s;
  ordered_json a = ordered_json::object();
  if (!s.artifacts.trace_csv.empty()) a["trace_csv"] = s.artifacts.trace_csv;
  if (!s.artifacts.gradcond_data.empty()) a["gradcond_data"] = s.artifacts.gradcond_data;
  if (!s.artifacts.vqls_trace_csv.empty()) a["vqls_trace_csv"] = s.artifacts.vqls_trace_csv;
  j["artifacts"] = a;
  return j.dump(2) + "\n";
}

std::string error_json(const std::string& kind, const std::string& message, const std::string& path) {
  ordered_json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["status"] = "error";
  j["error"] = kind;
  j["message"] = message;
  if (!path.empty()) j["path"] = path;
  return j.dump(2) + "\n";
}

CompareTable compare(const std::vector<RunSpec>& specs) {
  if (specs.size() < 2) throw OptionError("compare needs at least two runs");
  CompareTable t;
  std::map<std::string, std::size_t> row_of;
  std::vector<std::pair<std::size_t, std::size_t>> where;  // (row, column) per run

  for (const auto& spec : specs) {
    const std::string col = std::string(to_string(spec.backend));
    auto cit = std::find(t.columns.begin(), t.columns.end(), col);
    const std::size_t c = static_cast<std::size_t>(cit - t.columns.begin());
    if (cit == t.columns.end()) t.columns.push_back(col);
    const std::string row = spec.case_path + " " + std::string(to_string(spec.formulation));
    auto [it, inserted] = row_of.emplace(row, t.rows.size());
    if (inserted) t.rows.push_back({row, {}});
    where.emplace_back(it->second, c);
  }
  for (auto& r : t.rows) r.cells.resize(t.columns.size());

  for (std::size_t k = 0; k < specs.size(); ++k) {
    RunSpec spec = specs[k];
    CompareCell cell;
    try {
      const RunSummary s = run_experiment(spec);
      cell.iterations = s.iterations;
      cell.objective = s.objective;
      cell.ok = s.status == SolveStatus::Converged;
      if (!cell.ok) cell.error = std::string(to_string(s.status));
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    t.rows[where[k].first].cells[where[k].second] = cell;
  }
  return t;
}

namespace {

std::string cell_text(const CompareCell& c, bool iterations) {
  if (!c.ok) return "−";
  if (iterations) return std::to_string(c.iterations);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", c.objective);
  return buf;
}

// Display width counting UTF-8 code points.
std::size_t width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
  return w;
}

}  // namespace

std::string format_compare_text(const CompareTable& t) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head{"case"};
  for (const auto& c : t.columns) {
    head.push_back(c + " iter");
    head.push_back(c + " cost");
  }
  grid.push_back(head);
  for (const auto& r : t.rows) {
    std::vector<std::string> line{r.case_name};
    for (const auto& c : r.cells) {
      line.push_back(cell_text(c, true));
      line.push_back(cell_text(c, false));
    }
    grid.push_back(line);
  }
  std::vector<std::size_t> w(head.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) w[i] = std::max(w[i], width(line[i]));
  }
  std::ostringstream os;
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) os << "  ";
      os << line[i] << std::string(w[i] - width(line[i]), ' ');
    }
    os << '\n';
  }
  return os.str();
}

std::string format_compare_csv(const CompareTable& t) {
  std::ostringstream os;
  os << "case";
  for (const auto& c : t.columns) os << ',' << c << "_iterations," << c << "_cost";
  os << '\n';
  for (const auto& r : t.rows) {
    os << r.case_name;
    for (const auto& c : r.cells) os << ',' << cell_text(c, true) << ',' << cell_text(c, false);
    os << '\n';
  }
  return os.str();
}

}  // namespace qopf
