#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qopf/backend.hpp"
#include "qopf/errors.hpp"
#include "qopf/ipm.hpp"
#include "qopf/opf_problem.hpp"

namespace qopf {

inline constexpr int kSummarySchemaVersion = 1;

/// Raised when a case argument resolves to no readable file.
class CaseNotFoundError : public Error {
 public:
  explicit CaseNotFoundError(std::string path)
      : Error("case file not found: " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct RunSpec {
  std::string case_path;  // file path or bundled case name ("case3")
  Formulation formulation = Formulation::Dc;
  BackendKind backend = BackendKind::ClassicalLu;
  /// Defaults to none for classical and iluk for the quantum backends.
  std::optional<Precondition> precondition;
  std::optional<int> ilu_fill;  // level used by iluk
  std::optional<int> max_iterations;
  std::optional<double> tolerance;  // replaces all four ε
  std::optional<int> vqls_layers;   // first layer count of the schedule
  std::optional<int> hhl_clock;
  std::uint64_t seed = 7;
  std::filesystem::path out_dir;  // empty: no artifacts
  /// HHL systems above this many qubits (system + clock + ancilla) are refused.
  int max_hhl_qubits = 20;
};

struct RunArtifacts {
  std::string trace_csv;
  std::string summary_json;
  std::string gradcond_data;
  std::string vqls_trace_csv;  // VQLS backend only
};

struct RunSummary {
  std::string case_name;
  std::string case_path;
  Formulation formulation = Formulation::Dc;
  BackendKind backend = BackendKind::ClassicalLu;
  Precondition precondition = Precondition::None;
  int ilu_fill_level = 0;
  std::uint64_t seed = 0;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  double objective = 0.0;  // $/h
  ConvergenceMetrics initial_metrics;
  ConvergenceMetrics final_metrics;
  std::vector<double> kappa_raw;
  std::vector<double> kappa_precond;
  int degraded_solves = 0;
  double wall_time_s = 0.0;
  RunArtifacts artifacts;
  SolveResult result;  // full solver output, not serialized
};

/// Directory of the bundled cases: $QOPF_CASE_DIR, else the install/build
/// location compiled in.
std::filesystem::path bundled_case_dir();
/// Existing file, else <bundled>/<name>.json. Throws CaseNotFoundError.
std::filesystem::path resolve_case_path(const std::string& case_arg);

SolverOptions make_solver_options(const RunSpec& spec);

/// Solves one case and, when out_dir is set, writes the trace CSV, the
/// summary JSON and the gradcond data file into it.
RunSummary run_experiment(const RunSpec& spec);

/// `with_timing` = false drops wall_time_s so summaries compare byte-for-byte.
std::string summary_json(const RunSummary& s, bool with_timing = true);
/// Machine-readable failure record: kind, message and (when known) path.
std::string error_json(const std::string& kind, const std::string& message,
                       const std::string& path = {});

struct CompareCell {
  bool ok = false;
  int iterations = 0;
  double objective = 0.0;
  std::string error;
};

struct CompareRow {
  std::string case_name;
  std::vector<CompareCell> cells;  // one per backend column
};

struct CompareTable {
  std::vector<std::string> columns;  // backend labels
  std::vector<CompareRow> rows;
};

/// One row per case, one column per distinct backend label. Runs that throw
/// or do not converge become failed cells.
CompareTable compare(const std::vector<RunSpec>& specs);
/// Aligned text table; failed cells read "−".
std::string format_compare_text(const CompareTable& t);
std::string format_compare_csv(const CompareTable& t);

}  // namespace qopf
