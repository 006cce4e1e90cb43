#include <gtest/gtest.h>

#include <random>

#include "qopf/errors.hpp"
#include "qopf/ipm.hpp"
#include "qopf/opf_problem.hpp"
#include "test_support.hpp"

using namespace qopf;
using qopf::testing::bundled;
using qopf::testing::fd_jacobian;
using qopf::testing::scaled_error;

namespace {

struct CaseForm {
  const char* name;
  Formulation form;
};

const CaseForm kAll[] = {{"case3", Formulation::Dc},   {"case6ww", Formulation::Dc},
                         {"case9", Formulation::Dc},   {"case3", Formulation::Ac},
                         {"case6ww", Formulation::Ac}, {"case9", Formulation::Ac}};

VectorXd perturbed(const VectorXd& x, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  VectorXd y = x;
  for (auto& v : y) v += u(rng);
  return y;
}

VectorXd random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXd v(n);
  for (auto& e : v) e = g(rng);
  return v;
}

std::string label(const CaseForm& c) { return std::string(c.name) + "/" + std::string(to_string(c.form)); }

}  // namespace

TEST(OpfDerivatives, FirstOrderMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (const auto& c : kAll) {
    const auto p = build_problem(bundled(c.name), c.form);
    for (int trial = 0; trial < 10; ++trial) {
      const VectorXd x = perturbed(p->initial_point(), rng, 0.1);
      const auto f = [&](const VectorXd& y) { return VectorXd::Constant(1, p->objective(y)); };
      EXPECT_LE(scaled_error(p->objective_gradient(x).transpose(), fd_jacobian(f, x)), 1e-5) << label(c);
      const auto h = [&](const VectorXd& y) { return p->equalities(y); };
      EXPECT_LE(scaled_error(p->equality_jacobian(x), fd_jacobian(h, x)), 1e-5) << label(c);
      const auto g = [&](const VectorXd& y) { return p->inequalities(y); };
      EXPECT_LE(scaled_error(p->inequality_jacobian(x), fd_jacobian(g, x)), 1e-5) << label(c);
    }
  }
}

TEST(OpfDerivatives, LagrangianHessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  for (const auto& c : kAll) {
    const auto p = build_problem(bundled(c.name), c.form);
    for (int trial = 0; trial < 10; ++trial) {
      const VectorXd x = perturbed(p->initial_point(), rng, 0.1);
      const VectorXd lam = random_vector(p->num_equalities(), rng);
      const VectorXd mu = random_vector(p->num_inequalities(), rng).cwiseAbs();
      const auto grad_l = [&](const VectorXd& y) -> VectorXd {
        return p->objective_gradient(y) + p->equality_jacobian(y).transpose() * lam +
               p->inequality_jacobian(y).transpose() * mu;
      };
      const MatrixXd hess = p->lagrangian_hessian(x, lam, mu);
      EXPECT_LE((hess - hess.transpose()).cwiseAbs().maxCoeff(), 1e-12) << label(c);
      EXPECT_LE(scaled_error(hess, fd_jacobian(grad_l, x)), 1e-5) << label(c);
    }
  }
}

TEST(OpfDerivatives, ZeroMultipliersGiveObjectiveHessian) {
  for (const auto& c : kAll) {
    const auto p = build_problem(bundled(c.name), c.form);
    const VectorXd x = p->initial_point();
    const MatrixXd h = evaluate_lagrangian_hessian(*p, x, VectorXd::Zero(p->num_equalities()),
                                                   VectorXd::Zero(p->num_inequalities()));
    EXPECT_LE((h - p->objective_hessian(x)).cwiseAbs().maxCoeff(), 1e-14) << label(c);
  }
}

TEST(OpfDerivatives, DcHessianIgnoresMultipliers) {
  std::mt19937_64 rng(13);
  const auto p = build_dc_problem(bundled("case9"));
  const VectorXd x = p->initial_point();
  const MatrixXd h = p->lagrangian_hessian(x, random_vector(p->num_equalities(), rng),
                                           random_vector(p->num_inequalities(), rng));
  EXPECT_EQ(h, p->objective_hessian(x));
  // Quadratic cost in pg only: diagonal, zero on the angle block.
  const MatrixXd off = h - MatrixXd(h.diagonal().asDiagonal());
  EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
  const auto& va = p->layout().block("va");
  EXPECT_EQ(h.diagonal().segment(va.offset, va.size).cwiseAbs().maxCoeff(), 0.0);
}

TEST(OpfDerivatives, DcEqualitiesAreAffine) {
  std::mt19937_64 rng(14);
  for (const char* name : {"case3", "case6ww", "case9"}) {
    const auto p = build_dc_problem(bundled(name));
    const VectorXd x = perturbed(p->initial_point(), rng, 0.5);
    const VectorXd dx = random_vector(p->num_variables(), rng);
    const VectorXd lhs = p->equalities(x + dx) - p->equalities(x);
    EXPECT_LE((lhs - p->equality_jacobian(x) * dx).cwiseAbs().maxCoeff(), 1e-12) << name;
  }
}

TEST(OpfProblem, LayoutAndDimensions) {
  const auto dc = build_dc_problem(bundled("case3"));
  EXPECT_EQ(dc->layout().block("va").size, 3);
  EXPECT_EQ(dc->layout().block("pg").size, 2);
  EXPECT_FALSE(dc->layout().has_block("vm"));
  const auto ac = build_ac_problem(bundled("case3"));
  EXPECT_EQ(ac->num_variables(), 10);
  for (const char* b : {"va", "vm", "pg", "qg"}) EXPECT_TRUE(ac->layout().has_block(b));
  EXPECT_EQ(static_cast<Index>(ac->inequality_tags().size()), ac->num_inequalities());
  for (const auto& c : kAll) {
    const auto p = build_problem(bundled(c.name), c.form);
    const auto s = initial_state(*p);
    EXPECT_EQ(assemble_kkt(*p, s).size(), p->num_variables() + 2 * p->num_inequalities() + p->num_equalities());
  }
}

TEST(OpfProblem, SingleBusBalancesLoad) {
  PowerCase pc;
  pc.name = "single";
  BusRecord bus;
  bus.id = 1;
  bus.type = BusType::Ref;
  bus.pd = 0.5;
  pc.buses.push_back(bus);
  GeneratorRecord g;
  g.bus = 1;
  g.pmax = 2.0;
  g.qmax = 1.0;
  g.qmin = -1.0;
  pc.generators.push_back(g);
  pc.costs.push_back({0, {0.01, 10.0, 0.0}});
  const auto p = build_dc_problem(pc);
  const auto r = solve(*p, SolverOptions::defaults(Formulation::Dc));
  ASSERT_EQ(r.status, SolveStatus::Converged);
  EXPECT_NEAR(r.state.x(p->layout().block("pg").offset), 0.5, 1e-6);
  EXPECT_NEAR(r.objective, 0.01 * 50 * 50 + 10 * 50, 1e-3);
}

TEST(OpfProblem, AcFlatStateBalancedWithoutDemand) {
  PowerCase pc;
  pc.name = "flat";
  pc.buses.resize(2);
  pc.buses[0].id = 1;
  pc.buses[0].type = BusType::Ref;
  pc.buses[1].id = 2;
  BranchRecord br;
  br.from = 1;
  br.to = 2;
  br.r = 0.0;
  br.x = 0.2;
  pc.branches.push_back(br);
  GeneratorRecord g;
  g.bus = 1;
  g.pmax = 1.0;
  g.qmax = 1.0;
  g.qmin = -1.0;
  pc.generators.push_back(g);
  pc.costs.push_back({0, {1.0, 0.0}});
  const auto p = build_ac_problem(pc);
  VectorXd x = VectorXd::Zero(p->num_variables());
  const auto& vm = p->layout().block("vm");
  x.segment(vm.offset, vm.size).setOnes();
  EXPECT_EQ(p->equalities(x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(OpfProblem, FormulationNames) {
  EXPECT_EQ(formulation_from_string("dc"), Formulation::Dc);
  EXPECT_EQ(formulation_from_string("ac"), Formulation::Ac);
  EXPECT_EQ(to_string(Formulation::Ac), "ac");
  EXPECT_THROW(formulation_from_string("hvdc"), Error);
}
