#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qopf/errors.hpp"
#include "qopf/network_model.hpp"
#include "test_support.hpp"

using namespace qopf;
using qopf::testing::bundled;

namespace {

PowerCase two_bus(double r, double x) {
  PowerCase pc;
  pc.name = "two";
  pc.buses.resize(2);
  pc.buses[0].id = 1;
  pc.buses[0].type = BusType::Ref;
  pc.buses[1].id = 2;
  BranchRecord br;
  br.from = 1;
  br.to = 2;
  br.r = r;
  br.x = x;
  pc.branches.push_back(br);
  return pc;
}

// Y = Cfᵀ(Yff Cf + Yft Ct) + Ctᵀ(Ytf Cf + Ytt Ct) + diag(shunts), element formulas written out here.
Eigen::MatrixXcd incidence_ybus(const PowerCase& pc) {
  using cd = std::complex<double>;
  const auto nb = static_cast<Eigen::Index>(pc.num_buses());
  const auto nl = static_cast<Eigen::Index>(pc.num_branches());
  Eigen::MatrixXcd cf = Eigen::MatrixXcd::Zero(nl, nb), ct = cf;
  Eigen::VectorXcd yff(nl), yft(nl), ytf(nl), ytt(nl);
  for (Eigen::Index k = 0; k < nl; ++k) {
    const auto& br = pc.branches[static_cast<std::size_t>(k)];
    cf(k, static_cast<Eigen::Index>(pc.bus_index(br.from))) = 1.0;
    ct(k, static_cast<Eigen::Index>(pc.bus_index(br.to))) = 1.0;
    const cd z(br.r, br.x);
    const cd ys = cd(1.0, 0.0) / z;
    const double m = br.tap == 0.0 ? 1.0 : br.tap;
    const double ang = br.shift / 180.0 * std::numbers::pi;
    const cd tau(m * std::cos(ang), m * std::sin(ang));
    ytt(k) = ys + cd(0.0, 0.5 * br.b_charging);
    yff(k) = ytt(k) / (m * m);
    yft(k) = -ys / std::conj(tau);
    ytf(k) = -ys / tau;
  }
  const Eigen::MatrixXcd yf = yff.asDiagonal() * cf + yft.asDiagonal() * ct;
  const Eigen::MatrixXcd yt = ytf.asDiagonal() * cf + ytt.asDiagonal() * ct;
  Eigen::MatrixXcd y = cf.transpose() * yf + ct.transpose() * yt;
  for (Eigen::Index i = 0; i < nb; ++i) {
    const auto& b = pc.buses[static_cast<std::size_t>(i)];
    y(i, i) += cd(b.gs, b.bs);
  }
  return y;
}

}  // namespace

TEST(ParseCase, BundledCounts) {
  const auto c3 = bundled("case3");
  EXPECT_EQ(c3.num_buses(), 3u);
  EXPECT_EQ(c3.num_generators(), 2u);
  EXPECT_EQ(c3.num_branches(), 3u);
  EXPECT_EQ(bundled("case6ww").num_buses(), 6u);
  EXPECT_EQ(bundled("case9").num_buses(), 9u);
}

TEST(ParseCase, EmptyStreamIsSyntaxError) {
  EXPECT_THROW(parse_case(std::string_view{}, CaseFormat::Json), ParseError);
  EXPECT_THROW(parse_case(std::string_view{}, CaseFormat::Matpower), ParseError);
}

TEST(ParseCase, SyntaxErrorCarriesLocation) {
  try {
    parse_case(std::string_view{"{\n  \"baseMVA\": 100,\n  \"bus\": [[1, 3,\n"}, CaseFormat::Json);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_FALSE(e.location().empty());
  }
}

TEST(ParseCase, MissingReferenceBusRejected) {
  auto pc = bundled("case3");
  pc.buses[0].type = BusType::PV;
  EXPECT_THROW(pc.validate(), CaseError);
  EXPECT_THROW(parse_case(to_json(pc), CaseFormat::Json), ParseError);
}

TEST(ParseCase, DanglingBusReferenceRejected) {
  auto pc = bundled("case3");
  pc.branches[1].to = 42;
  EXPECT_THROW(pc.validate(), CaseError);
  EXPECT_THROW(parse_case(to_json(pc), CaseFormat::Json), ParseError);
  pc = bundled("case3");
  pc.generators[0].bus = 17;
  EXPECT_THROW(pc.validate(), CaseError);
  EXPECT_THROW(parse_case(to_json(pc), CaseFormat::Json), ParseError);
}

TEST(ParseCase, MatpowerAndJsonAgree) {
  const auto m = load_case(qopf::testing::case_dir() / "case9.m");
  const auto j = bundled("case9");
  ASSERT_EQ(m.num_buses(), j.num_buses());
  ASSERT_EQ(m.num_branches(), j.num_branches());
  ASSERT_EQ(m.num_generators(), j.num_generators());
  for (std::size_t i = 0; i < m.num_buses(); ++i) {
    EXPECT_DOUBLE_EQ(m.buses[i].pd, j.buses[i].pd);
    EXPECT_DOUBLE_EQ(m.buses[i].qd, j.buses[i].qd);
  }
  for (std::size_t k = 0; k < m.num_branches(); ++k) {
    EXPECT_DOUBLE_EQ(m.branches[k].x, j.branches[k].x);
    EXPECT_DOUBLE_EQ(m.branches[k].smax, j.branches[k].smax);
  }
  // The bundled JSON drops the constant cost terms; everything else matches.
  double constants = 0.0;
  for (std::size_t g = 0; g < m.costs.size(); ++g) {
    auto mc = m.costs[g].coefficients;
    constants += mc.back();
    mc.back() = 0.0;
    EXPECT_EQ(mc, j.costs[g].coefficients);
  }
  EXPECT_DOUBLE_EQ(constants, 1085.0);
}

TEST(ParseCase, PerUnitRoundTrip) {
  for (const char* name : {"case3", "case6ww", "case9"}) {
    const auto pc = bundled(name);
    const auto again = parse_case(to_json(pc), CaseFormat::Json);
    ASSERT_EQ(pc.num_buses(), again.num_buses());
    for (std::size_t i = 0; i < pc.num_buses(); ++i) {
      EXPECT_NEAR(again.buses[i].pd, pc.buses[i].pd, 1e-12 * std::max(1.0, std::abs(pc.buses[i].pd)));
      EXPECT_NEAR(again.buses[i].qd, pc.buses[i].qd, 1e-12 * std::max(1.0, std::abs(pc.buses[i].qd)));
    }
    for (std::size_t g = 0; g < pc.num_generators(); ++g) {
      EXPECT_NEAR(again.generators[g].pmax, pc.generators[g].pmax, 1e-12 * std::max(1.0, pc.generators[g].pmax));
      EXPECT_NEAR(again.generators[g].qmin, pc.generators[g].qmin, 1e-12 * std::max(1.0, std::abs(pc.generators[g].qmin)));
    }
  }
}

TEST(ParseCase, LoadsArePerUnit) {
  const auto pc = bundled("case3");
  EXPECT_DOUBLE_EQ(pc.buses[1].pd, 0.5);
  EXPECT_DOUBLE_EQ(pc.buses[2].pd, 1.2);
}

TEST(CostCurve, PolynomialAndDerivatives) {
  CostCurve c{0, {0.0125, 4.75, 3.0}};
  EXPECT_DOUBLE_EQ(c.evaluate(10.0), 0.0125 * 100 + 47.5 + 3.0);
  EXPECT_DOUBLE_EQ(c.derivative(10.0), 2 * 0.0125 * 10 + 4.75);
  EXPECT_DOUBLE_EQ(c.second_derivative(10.0), 2 * 0.0125);
}

TEST(Ybus, SingleLineTextbook) {
  const auto y = build_ybus(two_bus(0.0, 1.0)).y;
  using cd = std::complex<double>;
  EXPECT_NEAR(std::abs(y(0, 0) - cd(0, -1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(y(0, 1) - cd(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(y(1, 0) - cd(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(y(1, 1) - cd(0, -1)), 0.0, 1e-15);
}

TEST(Ybus, SingleBusIsZero) {
  PowerCase pc;
  pc.buses.resize(1);
  pc.buses[0].id = 1;
  pc.buses[0].type = BusType::Ref;
  const auto y = build_ybus(pc).y;
  ASSERT_EQ(y.rows(), 1);
  EXPECT_EQ(y(0, 0), std::complex<double>(0.0, 0.0));
}

TEST(Ybus, ZeroImpedanceRejected) { EXPECT_THROW(build_ybus(two_bus(0.0, 0.0)), CaseError); }

TEST(Ybus, MatchesIncidenceAssemblyForBundledCases) {
  for (const char* name : {"case3", "case6ww", "case9"}) {
    const auto pc = bundled(name);
    const Eigen::MatrixXcd y = build_ybus(pc).y;
    const Eigen::MatrixXcd ref = incidence_ybus(pc);
    EXPECT_LE((y - ref).cwiseAbs().maxCoeff(), 1e-12) << name;
  }
}

TEST(Ybus, PhaseShifterStampsAsymmetrically) {
  auto pc = two_bus(0.01, 0.1);
  pc.branches[0].tap = 0.97;
  pc.branches[0].shift = 5.0;
  const Eigen::MatrixXcd y = build_ybus(pc).y;
  EXPECT_LE((y - incidence_ybus(pc)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(std::abs(y(0, 1) - y(1, 0)), 1e-3);
}

TEST(Ybus, RowSumsEqualShuntAndCharging) {
  for (const char* name : {"case3", "case6ww", "case9"}) {
    const auto pc = bundled(name);
    const Eigen::MatrixXcd y = build_ybus(pc).y;
    Eigen::VectorXcd expect = Eigen::VectorXcd::Zero(y.rows());
    for (std::size_t i = 0; i < pc.num_buses(); ++i) expect(static_cast<Eigen::Index>(i)) = {pc.buses[i].gs, pc.buses[i].bs};
    for (const auto& br : pc.branches) {
      ASSERT_TRUE(br.tap == 0.0 || br.tap == 1.0);
      expect(static_cast<Eigen::Index>(pc.bus_index(br.from))) += std::complex<double>(0, br.b_charging / 2);
      expect(static_cast<Eigen::Index>(pc.bus_index(br.to))) += std::complex<double>(0, br.b_charging / 2);
    }
    EXPECT_LE((y.rowwise().sum() - expect).cwiseAbs().maxCoeff(), 1e-10) << name;
  }
}

TEST(DcSusceptance, TwoBus) {
  const auto net = dc_susceptance(two_bus(0.0, 0.5));
  Eigen::Matrix2d expect;
  expect << 2, -2, -2, 2;
  EXPECT_LE((net.bbus - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_FALSE(net.has_isolated_bus());
}

TEST(DcSusceptance, ZeroReactanceRejected) { EXPECT_THROW(dc_susceptance(two_bus(0.1, 0.0)), CaseError); }

TEST(DcSusceptance, IsolatedBusFlagged) {
  auto pc = two_bus(0.0, 0.5);
  BusRecord extra;
  extra.id = 3;
  pc.buses.push_back(extra);
  const auto net = dc_susceptance(pc);
  ASSERT_TRUE(net.has_isolated_bus());
  EXPECT_EQ(net.isolated_buses.front(), 2u);
}

TEST(DcSusceptance, Case9FlowsMatchPerBranchFormula) {
  const auto pc = bundled("case9");
  const auto net = dc_susceptance(pc);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(pc.num_buses()));
  for (auto& t : theta) t = u(rng);
  const Eigen::VectorXd pf = net.bf * theta + net.pf_shift;
  Eigen::VectorXd pbus = Eigen::VectorXd::Zero(theta.size());
  for (std::size_t k = 0; k < pc.num_branches(); ++k) {
    const auto& br = pc.branches[k];
    const auto f = static_cast<Eigen::Index>(pc.bus_index(br.from));
    const auto t = static_cast<Eigen::Index>(pc.bus_index(br.to));
    const double flow = (theta(f) - theta(t)) / br.x;
    EXPECT_NEAR(pf(static_cast<Eigen::Index>(k)), flow, 1e-12);
    pbus(f) += flow;
    pbus(t) -= flow;
  }
  EXPECT_LE((net.bbus * theta + net.p_shift - pbus).cwiseAbs().maxCoeff(), 1e-12);
}
