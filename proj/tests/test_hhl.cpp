#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qopf/errors.hpp"
#include "qopf/hhl.hpp"
#include "qopf/ipm.hpp"
#include "test_support.hpp"

using namespace qopf;
using qopf::testing::random_matrix;
using qopf::testing::random_spd;

namespace {

HhlConfig exact_config(int clock, double t) {
  HhlConfig c;
  c.clock_qubits = clock;
  c.evolution_time = t;
  c.window = ClockWindow::Uniform;
  c.convention = PhaseConvention::Unsigned;
  return c;
}

}  // namespace

TEST(TuneEvolutionTime, IdentityAndScaling) {
  const double t1 = tune_evolution_time(MatrixXd::Identity(4, 4), 4);
  EXPECT_NEAR(t1, 2 * std::numbers::pi * 15.0 / 16.0, 1e-14);
  EXPECT_NEAR(tune_evolution_time(2.0 * MatrixXd::Identity(4, 4), 4), t1 / 2, 1e-14);
  EXPECT_THROW(tune_evolution_time(MatrixXd::Zero(2, 2), 4), QuantumError);
  EXPECT_THROW(tune_evolution_time(Eigen::Matrix2d{{0, 1}, {0, 0}}, 4), QuantumError);
}

TEST(TuneEvolutionTime, Case3PreconditionedEigenphasesInsideUnitInterval) {
  const auto p = build_dc_problem(qopf::testing::bundled("case3"));
  const auto kkt = assemble_kkt(*p, initial_state(*p));
  IluOptions o;
  o.fill_level = kDefaultIluFillLevel;
  const auto e = quantum_embedding(apply_left_preconditioning(kkt, build_ilu_preconditioner(kkt.a, o)));
  const double t = tune_signed_evolution_time(e.a_q, 0.4);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(e.a_q);
  for (double lambda : es.eigenvalues()) {
    double phase = lambda * t / (2 * std::numbers::pi);
    if (phase < 0) phase += 1.0;
    EXPECT_GT(phase, 0.0);
    EXPECT_LT(phase, 1.0);
    EXPECT_GT(std::abs(phase - 0.5), 0.09);
  }
}

TEST(Hhl, IdentityReturnsRhsWithProbabilityCSquared) {
  std::mt19937_64 rng(1);
  const VectorXd b = random_matrix(4, 1, rng).normalized();
  for (double c : {1.0, 0.5}) {
    auto cfg = exact_config(4, tune_evolution_time(MatrixXd::Identity(4, 4), 4));
    cfg.rotation_constant = c;
    const auto out = hhl_run(MatrixXd::Identity(4, 4), b, cfg);
    EXPECT_LE((out.x - b).norm(), 1e-12);
    EXPECT_NEAR(out.success_probability, c * c, 1e-12);
  }
}

TEST(Hhl, DiagonalInversion) {
  const Eigen::Matrix2d a{{1, 0}, {0, 0.5}};
  const auto out = hhl_run(a, Eigen::Vector2d(0, 1), exact_config(3, std::numbers::pi));
  EXPECT_LE(out.direction(0).real() * out.direction(0).real(), 1e-24);
  EXPECT_LE((out.x - Eigen::Vector2d(0, 2)).norm(), 1e-12);
}

TEST(Hhl, ProbabilityMatchesEigendecomposition) {
  const Eigen::Matrix2d a{{1, 0}, {0, 0.5}};
  auto cfg = exact_config(3, std::numbers::pi);
  cfg.rotation_constant = 0.5;
  const auto out = hhl_run(a, Eigen::Vector2d(0.6, 0.8), cfg);
  EXPECT_NEAR(out.success_probability, 0.25 * (0.36 / 1.0 + 0.64 / 0.25), 1e-12);
  EXPECT_GT(out.success_probability, 0.0);
  EXPECT_LE(out.success_probability, 1.0);
}

TEST(Hhl, ExactlyRepresentableEigenvaluesRecoverExactly) {
  // With t = 2π the eigenphase of λ = k/32 sits exactly on a 5-qubit clock bin.
  std::mt19937_64 rng(2);
  const Eigen::HouseholderQR<MatrixXd> qr(random_matrix(8, 8, rng));
  const MatrixXd q = qr.householderQ();
  Eigen::VectorXd ev(8);
  ev << 31, 30, 20, 17, 9, 8, 5, 3;
  ev /= 32.0;
  const MatrixXd a = q * ev.asDiagonal() * q.transpose();
  const VectorXd b = random_matrix(8, 1, rng).normalized();
  const auto r = hhl_run(a, b, exact_config(5, 2 * std::numbers::pi));
  const VectorXd ref = a.partialPivLu().solve(b);
  EXPECT_LE((r.x - ref).norm(), 1e-8 * ref.norm());
}

TEST(Hhl, RandomSpdSystems) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd a = random_spd(4, 10.0, rng);
    const VectorXd b = random_matrix(4, 1, rng).normalized();
    HhlConfig six;
    six.clock_qubits = 6;
    const auto r6 = hhl_run(a, b, six);
    EXPECT_LE(relative_residual(a, r6.x, b), 1e-2) << "trial " << trial;
    HhlConfig ten;
    ten.clock_qubits = 10;
    const auto r10 = hhl_run(a, b, ten);
    EXPECT_LE(relative_residual(a, r10.x, b), 1e-4) << "trial " << trial;
  }
}

TEST(Hhl, ResidualShrinksWithClockPrecision) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd a = random_spd(4, 5.0, rng);
    const VectorXd b = random_matrix(4, 1, rng).normalized();
    double prev = std::numeric_limits<double>::infinity();
    for (int c = 4; c <= 10; ++c) {
      HhlConfig cfg;
      cfg.clock_qubits = c;
      const double r = relative_residual(a, hhl_run(a, b, cfg).x, b);
      EXPECT_LE(r, 2.0 * prev) << "clock " << c;
      prev = r;
    }
  }
}

TEST(Hhl, FittedTuning) {
  EXPECT_EQ(fitted_margin_bins(1), 0);
  EXPECT_EQ(fitted_margin_bins(3), 1);
  EXPECT_EQ(fitted_margin_bins(6), 5);
  EXPECT_EQ(fitted_margin_bins(10), 35);
  const MatrixXd a = Eigen::Vector4d(0.2, 0.5, 0.7, 1.0).asDiagonal();
  EXPECT_NEAR(tune_fitted_evolution_time(a, 6), 2 * std::numbers::pi * (1.0 - 10.0 / 64.0) / 0.8, 1e-12);
  for (int c = 1; c <= 3; ++c) {
    HhlConfig cfg;
    cfg.clock_qubits = c;
    const auto out = hhl_run(MatrixXd::Identity(2, 2), Eigen::Vector2d(0.6, 0.8), cfg);
    EXPECT_NEAR(out.x(0), 0.6, 1e-9) << c;
    EXPECT_NEAR(out.x(1), 0.8, 1e-9) << c;
  }
}

TEST(Hhl, IndefiniteSpectrum) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd q = random_matrix(4, 4, rng).householderQr().householderQ();
    const MatrixXd a = q * Eigen::Vector4d(-1.0, -0.3, 0.2, 0.8).asDiagonal() * q.transpose();
    const VectorXd b = random_matrix(4, 1, rng).normalized();
    HhlConfig cfg;
    cfg.clock_qubits = 10;
    EXPECT_LE(relative_residual(a, hhl_run(a, b, cfg).x, b), 1e-3) << trial;
  }
}

TEST(Hhl, InputValidation) {
  HhlConfig cfg;
  EXPECT_THROW(hhl_run(MatrixXd::Identity(3, 3), VectorXd::Unit(3, 0), cfg), QuantumError);
  EXPECT_THROW(hhl_run(MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1), cfg), QuantumError);
  EXPECT_THROW(hhl_run(Eigen::Matrix2d{{1, 1}, {0, 1}}, Eigen::Vector2d(1, 0), cfg), QuantumError);
  cfg.min_success_probability = 0.9;
  cfg.rotation_constant = 0.1;
  EXPECT_THROW(hhl_run(MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 0), cfg), QuantumError);
}

TEST(Hhl, EmbeddedSolveOfNonsymmetricSystem) {
  const Eigen::Matrix3d a{{2, 1, 0}, {0.5, 3, 1}, {0, 0.2, 1.5}};
  const Eigen::Vector3d b(1, -2, 0.5);
  const auto e = quantum_embedding({a, b, {}});
  const auto rep = hhl_solve(e, HhlConfig{});
  EXPECT_LE(rep.residual, 1e-4);
  EXPECT_EQ(rep.qubits, e.num_qubits + 12 + 1);
  EXPECT_GT(rep.post_selection_probability, 0.0);
}
