// qopf: run or compare OPF solves from the command line.
//
// Every option can also be set through an environment variable named
// QOPF_<OPTION>, e.g. QOPF_BACKEND=vqls or QOPF_HHL_CLOCK=10.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qopf/errors.hpp"
#include "qopf/experiments.hpp"

namespace {

enum Exit { kOk = 0, kNotConverged = 1, kInputError = 2, kSolverError = 3 };

struct CommonArgs {
  std::string formulation = "dc";
  std::string precondition;
  std::uint64_t seed = 7;
  std::string out;
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::optional<int> vqls_layers;
  std::optional<int> hhl_clock;
  std::optional<int> ilu_fill;
  int max_hhl_qubits = 20;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--formulation", a.formulation, "dc or ac")
      ->envname("QOPF_FORMULATION")
      ->check(CLI::IsMember({"dc", "ac"}, CLI::ignore_case));
  app->add_option("--precondition", a.precondition, "none, ilu0 or iluk (default: iluk for quantum backends)")
      ->envname("QOPF_PRECONDITION");
  app->add_option("--ilu-fill", a.ilu_fill, "fill level for iluk")->envname("QOPF_ILU_FILL");
  app->add_option("--seed", a.seed, "RNG seed")->envname("QOPF_SEED");
  app->add_option("--out", a.out, "output directory for artifacts")->envname("QOPF_OUT");
  app->add_option("--max-iter", a.max_iter, "IPM iteration limit")->envname("QOPF_MAX_ITER");
  app->add_option("--tol", a.tol, "convergence tolerance for all four conditions")->envname("QOPF_TOL");
  app->add_option("--vqls-layers", a.vqls_layers, "initial ansatz depth")->envname("QOPF_VQLS_LAYERS");
  app->add_option("--hhl-clock", a.hhl_clock, "HHL clock qubits")->envname("QOPF_HHL_CLOCK");
  app->add_option("--max-hhl-qubits", a.max_hhl_qubits, "refuse HHL runs needing more qubits")
      ->envname("QOPF_MAX_HHL_QUBITS");
}

qopf::RunSpec make_spec(const CommonArgs& a, const std::string& case_arg, const std::string& backend) {
  qopf::RunSpec s;
  s.case_path = case_arg;
  s.formulation = qopf::formulation_from_string(a.formulation);
  s.backend = qopf::backend_from_string(backend);
  if (!a.precondition.empty()) s.precondition = qopf::precondition_from_string(a.precondition);
  s.seed = a.seed;
  s.max_iterations = a.max_iter;
  s.tolerance = a.tol;
  s.vqls_layers = a.vqls_layers;
  s.hhl_clock = a.hhl_clock;
  s.ilu_fill = a.ilu_fill;
  s.max_hhl_qubits = a.max_hhl_qubits;
  return s;
}

int fail(const std::string& kind, const std::string& message, const std::string& path,
         const std::string& out_dir, int code) {
  const std::string j = qopf::error_json(kind, message, path);
  std::cout << j;
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream(std::filesystem::path(out_dir) / "error.json") << j;
  }
  return code;
}

template <class F>
int guarded(const std::string& out_dir, F&& body) {
  try {
    return body();
  } catch (const qopf::CaseNotFoundError& e) {
    return fail("case_not_found", e.what(), e.path(), out_dir, kInputError);
  } catch (const qopf::ParseError& e) {
    return fail("parse_error", e.what(), e.location(), out_dir, kInputError);
  } catch (const qopf::CaseError& e) {
    return fail("case_error", e.what(), {}, out_dir, kInputError);
  } catch (const qopf::OptionError& e) {
    return fail("invalid_option", e.what(), {}, out_dir, kInputError);
  } catch (const qopf::SolverError& e) {
    return fail("solver_error", e.what(), {}, out_dir, kSolverError);
  } catch (const std::exception& e) {
    return fail("error", e.what(), {}, out_dir, kSolverError);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interior point OPF with classical, HHL and VQLS Newton-step backends"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string run_case;
  std::string run_backend = "classical_lu";
  auto* run = app.add_subcommand("run", "solve one case and write its artifacts");
  run->add_option("--case", run_case, "case file or bundled case name")->required()->envname("QOPF_CASE");
  run->add_option("--backend", run_backend, "classical_lu | hhl_preconditioned | vqls_preconditioned")
      ->envname("QOPF_BACKEND");
  add_common(run, run_args);

  CommonArgs cmp_args;
  std::vector<std::string> cmp_cases;
  std::vector<std::string> cmp_backends{"classical_lu", "vqls_preconditioned", "hhl_preconditioned"};
  auto* cmp = app.add_subcommand("compare", "solve every case with every backend and tabulate");
  cmp->add_option("--case", cmp_cases, "case files or bundled names")->required();
  cmp->add_option("--backend", cmp_backends, "backends to compare");
  add_common(cmp, cmp_args);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return guarded(run_args.out, [&] {
      qopf::RunSpec spec = make_spec(run_args, run_case, run_backend);
      spec.out_dir = run_args.out;
      const qopf::RunSummary s = qopf::run_experiment(spec);
      std::cout << qopf::summary_json(s);
      return s.status == qopf::SolveStatus::Converged ? kOk : kNotConverged;
    });
  }

  return guarded(cmp_args.out, [&] {
    std::vector<qopf::RunSpec> specs;
    for (const auto& c : cmp_cases) {
      for (const auto& b : cmp_backends) {
        qopf::RunSpec s = make_spec(cmp_args, c, b);
        if (!cmp_args.out.empty()) {
          s.out_dir = std::filesystem::path(cmp_args.out) / std::string(qopf::to_string(s.backend));
        }
        specs.push_back(s);
      }
    }
    const qopf::CompareTable t = qopf::compare(specs);
    const std::string text = qopf::format_compare_text(t);
    std::cout << text;
    if (!cmp_args.out.empty()) {
      std::filesystem::create_directories(cmp_args.out);
      std::ofstream(std::filesystem::path(cmp_args.out) / "compare.txt") << text;
      std::ofstream(std::filesystem::path(cmp_args.out) / "compare.csv") << qopf::format_compare_csv(t);
    }
    return kOk;
  });
}
