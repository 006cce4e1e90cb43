#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "qopf/experiments.hpp"
#include "qopf/hhl.hpp"
#include "qopf/ipm.hpp"
#include "qopf/linear_solvers.hpp"
#include "qopf/network_model.hpp"
#include "qopf/opf_problem.hpp"
#include "qopf/vqls.hpp"

namespace {

using namespace qopf;

PowerCase bench_case(const std::string& name) {
  return load_case(std::string(QOPF_BENCH_CASE_DIR) + "/" + name + ".json");
}

const char* case_name(int64_t i) {
  static const char* names[] = {"case3", "case6ww", "case9"};
  return names[i];
}

LinearSystem first_kkt(const std::string& name, Formulation f) {
  const auto p = build_problem(bench_case(name), f);
  return assemble_kkt(*p, initial_state(*p));
}

void BM_ClassicalIpm(benchmark::State& state) {
  const auto f = state.range(1) ? Formulation::Ac : Formulation::Dc;
  const auto p = build_problem(bench_case(case_name(state.range(0))), f);
  const auto opts = SolverOptions::defaults(f);
  for (auto _ : state) benchmark::DoNotOptimize(solve(*p, opts));
  state.SetLabel(std::string(case_name(state.range(0))) + (state.range(1) ? " ac" : " dc"));
}
BENCHMARK(BM_ClassicalIpm)->ArgsProduct({{0, 1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_DirectSolve(benchmark::State& state) {
  const LinearSystem kkt = first_kkt(case_name(state.range(0)), Formulation::Dc);
  for (auto _ : state) benchmark::DoNotOptimize(direct_solve(kkt));
  state.SetLabel(case_name(state.range(0)));
}
BENCHMARK(BM_DirectSolve)->DenseRange(0, 2);

void BM_IluPreconditioner(benchmark::State& state) {
  const LinearSystem kkt = first_kkt("case6ww", Formulation::Dc);
  IluOptions o;
  o.fill_level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_ilu_preconditioner(kkt.a, o));
}
BENCHMARK(BM_IluPreconditioner)->Arg(0)->Arg(1)->Arg(5);

void BM_HhlRun(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const Index dim = 4;
  MatrixXd q = MatrixXd::NullaryExpr(dim, dim, [&] { return n01(rng); });
  q = Eigen::HouseholderQR<MatrixXd>(q).householderQ();
  const MatrixXd a = q * Eigen::Vector4d(0.1, 0.3, 0.6, 1.0).asDiagonal() * q.transpose();
  const VectorXd b = VectorXd::NullaryExpr(dim, [&] { return n01(rng); }).normalized();
  HhlConfig cfg;
  cfg.clock_qubits = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hhl_run(a, b, cfg));
}
BENCHMARK(BM_HhlRun)->Arg(6)->Arg(10)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_VqlsAdjointGradient(benchmark::State& state) {
  const int qubits = static_cast<int>(state.range(0));
  const Index dim = Index{1} << qubits;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const MatrixXd a = MatrixXd::NullaryExpr(dim, dim, [&] { return n01(rng); });
  const VectorXd b = VectorXd::NullaryExpr(dim, [&] { return n01(rng); }).normalized();
  const AnsatzConfig cfg{qubits, 8};
  const VectorXd theta = VectorXd::NullaryExpr(cfg.parameter_count(), [&] { return n01(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(adjoint_gradient(cfg, theta, a, b));
}
BENCHMARK(BM_VqlsAdjointGradient)->DenseRange(2, 8, 2)->Unit(benchmark::kMicrosecond);

void BM_PauliDecompose(benchmark::State& state) {
  const Index dim = Index{1} << state.range(0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  const CMatrix m = MatrixXd::NullaryExpr(dim, dim, [&] { return n01(rng); }).cast<Complex>();
  for (auto _ : state) benchmark::DoNotOptimize(pauli_decompose(m));
}
BENCHMARK(BM_PauliDecompose)->DenseRange(2, 6, 2)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
