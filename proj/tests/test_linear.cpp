#include <gtest/gtest.h>

#include <random>

#include "qopf/backend.hpp"
#include "qopf/errors.hpp"
#include "qopf/ipm.hpp"
#include "qopf/linear_solvers.hpp"
#include "test_support.hpp"

using namespace qopf;
using qopf::testing::bundled;
using qopf::testing::random_matrix;

namespace {

LinearSystem initial_kkt(const char* name, Formulation f = Formulation::Dc) {
  const auto p = build_problem(bundled(name), f);
  return assemble_kkt(*p, initial_state(*p));
}

// σ_max by power iteration on AᵀA, σ_min by inverse iteration through LU.
double power_iteration_kappa(const MatrixXd& a) {
  const MatrixXd ata = a.transpose() * a;
  VectorXd v = VectorXd::Ones(a.cols()).normalized();
  double smax2 = 0.0;
  for (int k = 0; k < 5000; ++k) {
    VectorXd w = ata * v;
    const double next = w.norm();
    v = w / next;
    if (std::abs(next - smax2) <= 1e-14 * next) break;
    smax2 = next;
  }
  const Eigen::PartialPivLU<MatrixXd> lu(a);
  const Eigen::PartialPivLU<MatrixXd> lut(a.transpose());
  v = VectorXd::Ones(a.cols()).normalized();
  double inv2 = 0.0;
  for (int k = 0; k < 5000; ++k) {
    VectorXd w = lu.solve(lut.solve(v));
    const double next = w.norm();
    v = w / next;
    if (std::abs(next - inv2) <= 1e-14 * next) break;
    inv2 = next;
  }
  return std::sqrt(smax2 * inv2);
}

SparsityPattern random_pattern(Index n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(density);
  SparsityPattern p(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) p(i, j) = i == j || keep(rng);
  return p;
}

}  // namespace

TEST(DirectSolve, Basics) {
  LinearSystem s{MatrixXd::Identity(3, 3), Eigen::Vector3d(1, -2, 3), {}};
  EXPECT_EQ(direct_solve(s).x, s.b);
  s = {Eigen::Matrix2d{{2, 0}, {0, 4}}, Eigen::Vector2d(2, 4), {}};
  EXPECT_LE((direct_solve(s).x - Eigen::Vector2d(1, 1)).norm(), 1e-15);
  std::mt19937_64 rng(1);
  s.a = random_matrix(16, 16, rng) + 8.0 * MatrixXd::Identity(16, 16);
  s.b = random_matrix(16, 1, rng);
  const auto rep = direct_solve(s);
  EXPECT_LE(relative_residual(s.a, rep.x, s.b), 1e-10);
  EXPECT_EQ(rep.residual, relative_residual(s.a, rep.x, s.b));
}

TEST(DirectSolve, SingularAndMalformedRejected) {
  LinearSystem s{MatrixXd::Zero(2, 2), Eigen::Vector2d(1, 1), {}};
  EXPECT_THROW(direct_solve(s), SingularMatrixError);
  s = {MatrixXd::Identity(2, 2), Eigen::Vector3d(1, 1, 1), {}};
  EXPECT_THROW(direct_solve(s), DimensionError);
}

TEST(ConditionNumber, KnownValues) {
  EXPECT_NEAR(condition_number(MatrixXd::Identity(4, 4)), 1.0, 1e-14);
  EXPECT_NEAR(condition_number(Eigen::Matrix2d{{2, 0}, {0, 1}}), 2.0, 1e-14);
  EXPECT_TRUE(std::isinf(condition_number(Eigen::Matrix2d{{1, 1}, {1, 1}})));
}

TEST(ConditionNumber, Case3KktMatchesPowerIteration) {
  const auto kkt = initial_kkt("case3");
  const double k = condition_number(kkt.a);
  EXPECT_NEAR(k, power_iteration_kappa(kkt.a), 0.01 * k);
}

TEST(Ilu0, DenseEqualsExactLu) {
  std::mt19937_64 rng(2);
  const MatrixXd a = random_matrix(8, 8, rng) + 10.0 * MatrixXd::Identity(8, 8);
  const auto f = ilu0_factorize(a, SparsityPattern::Constant(8, 8, true));
  EXPECT_LE((f.product() - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ilu0, DiagonalInput) {
  const MatrixXd a = Eigen::Vector3d(2, -3, 5).asDiagonal();
  const auto f = ilu0_factorize(a, pattern_of(a));
  EXPECT_EQ(f.l, MatrixXd::Identity(3, 3));
  EXPECT_EQ(f.u, a);
}

TEST(Ilu0, ZeroPivotNamesRow) {
  Eigen::Matrix3d a{{1, 0, 0}, {0, 0, 1}, {0, 1, 1}};
  try {
    ilu0_factorize(a, pattern_of(a));
    FAIL() << "expected ZeroPivotError";
  } catch (const ZeroPivotError& e) {
    EXPECT_EQ(e.row(), 1);
  }
}

TEST(Ilu0, DefiningPropertyOnRandomSparse) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const SparsityPattern p = random_pattern(12, 0.25, rng);
    MatrixXd a = random_matrix(12, 12, rng);
    for (Index i = 0; i < 12; ++i)
      for (Index j = 0; j < 12; ++j)
        if (!p(i, j)) a(i, j) = 0.0;
    a.diagonal().array() += 12.0;
    const auto f = ilu0_factorize(a, p);
    const MatrixXd lu = f.product();
    double worst = 0.0;
    for (Index i = 0; i < 12; ++i)
      for (Index j = 0; j < 12; ++j) {
        if (p(i, j)) worst = std::max(worst, std::abs(lu(i, j) - a(i, j)));
        if (!p(i, j)) {
          EXPECT_EQ(f.l(i, j), 0.0);
          EXPECT_EQ(f.u(i, j), 0.0);
        }
      }
    EXPECT_LE(worst, 1e-10);
  }
}

TEST(Ilu0, DefiningPropertyOnBundledKkt) {
  for (const char* name : {"case3", "case6ww", "case9"}) {
    const auto kkt = initial_kkt(name);
    IluOptions zero;
    zero.fill_level = 0;
    const auto f = build_ilu_preconditioner(kkt.a, zero);
    ASSERT_EQ(f.shift, 0.0) << name;
    const MatrixXd pa = f.permute_rows(kkt.a);
    const MatrixXd lu = f.product();
    double worst = 0.0;
    for (Index i = 0; i < pa.rows(); ++i)
      for (Index j = 0; j < pa.cols(); ++j)
        if (f.pattern(i, j)) worst = std::max(worst, std::abs(lu(i, j) - pa(i, j)));
    EXPECT_LE(worst, 1e-10 * std::max(1.0, pa.cwiseAbs().maxCoeff())) << name;
    EXPECT_EQ(f.fill_policy(), "ILU(0)");
  }
}

TEST(Ilu, FillPatternLevels) {
  // Arrow pointing up-left: eliminating row/col 0 fills the whole matrix.
  SparsityPattern base = SparsityPattern::Constant(5, 5, false);
  base.row(0).setConstant(true);
  base.col(0).setConstant(true);
  base.diagonal().setConstant(true);
  EXPECT_EQ(fill_pattern(base, 0), base);
  EXPECT_EQ(fill_pattern(base, 1), SparsityPattern::Constant(5, 5, true));
  // Tridiagonal: no fill at any level.
  SparsityPattern tri = SparsityPattern::Constant(6, 6, false);
  for (Index i = 0; i < 6; ++i)
    for (Index j = std::max<Index>(0, i - 1); j <= std::min<Index>(5, i + 1); ++j) tri(i, j) = true;
  EXPECT_EQ(fill_pattern(tri, 4), tri);
}

TEST(Ilu, HigherFillIsExactOnSmallKkt) {
  const auto kkt = initial_kkt("case3");
  IluOptions o;
  o.fill_level = 50;
  const auto f = build_ilu_preconditioner(kkt.a, o);
  EXPECT_LE((f.product() - f.permute_rows(kkt.a)).cwiseAbs().maxCoeff(), 1e-9 * kkt.a.cwiseAbs().maxCoeff());
  EXPECT_GE(f.fill_ratio, 1.0);
}

TEST(Preconditioning, PerfectAndTrivialPreconditioners) {
  std::mt19937_64 rng(4);
  const MatrixXd a = random_matrix(6, 6, rng) + 6.0 * MatrixXd::Identity(6, 6);
  LinearSystem s{a, random_matrix(6, 1, rng), {}};
  const auto exact = ilu0_factorize(a, SparsityPattern::Constant(6, 6, true));
  const auto pre = apply_left_preconditioning(s, exact);
  EXPECT_LE((pre.a - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(condition_number(pre.a), 1.0, 1e-9);

  const MatrixXd id = MatrixXd::Identity(6, 6);
  const auto trivial = apply_left_preconditioning(s, ilu0_factorize(id, pattern_of(id)));
  EXPECT_LE((trivial.a - a).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((trivial.b - s.b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Preconditioning, SolutionUnchangedOnBundledKkt) {
  for (const char* name : {"case3", "case6ww", "case9"}) {
    const auto kkt = initial_kkt(name);
    const VectorXd ref = direct_solve(kkt).x;
    for (int level : {0, 5}) {
      IluOptions o;
      o.fill_level = level;
      const auto pre = apply_left_preconditioning(kkt, build_ilu_preconditioner(kkt.a, o));
      const VectorXd x = direct_solve(pre).x;
      EXPECT_LE((x - ref).norm(), 1e-8 * ref.norm()) << name << " level " << level;
    }
  }
}

TEST(Embedding, IdentityWhenAlreadyNormalized) {
  std::mt19937_64 rng(5);
  MatrixXd q = qopf::testing::random_spd(4, 3.0, rng);
  VectorXd b = random_matrix(4, 1, rng).normalized();
  const auto e = quantum_embedding({q, b, {}});
  EXPECT_FALSE(e.dilated);
  EXPECT_EQ(e.num_qubits, 2);
  EXPECT_LE((e.a_q - q).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((e.b_q - b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Embedding, PaddingConvention) {
  Eigen::Matrix3d a{{4, 1, 0}, {1, 3, 1}, {0, 1, 2}};
  const Eigen::Vector3d b(1, 2, 3);
  const auto e = quantum_embedding({a, b, {}});
  ASSERT_EQ(e.a_q.rows(), 4);
  EXPECT_FALSE(e.dilated);
  EXPECT_NEAR(e.a_q(3, 3) * e.matrix_scale, 1.0, 1e-14);
  EXPECT_EQ(e.b_q(3), 0.0);
  EXPECT_LE(std::abs(e.a_q.jacobiSvd().singularValues()(0) - 1.0), 1e-12);
  EXPECT_NEAR(e.b_q.norm(), 1.0, 1e-15);
  VectorXd xq = e.a_q.partialPivLu().solve(e.b_q);
  xq(3) = 123.0;  // padding entry is ignored
  EXPECT_LE((e.recover(xq) - a.partialPivLu().solve(b)).norm(), 1e-12);
}

TEST(Embedding, DilationRecoversDirectSolution) {
  Eigen::Matrix2d a{{1, 2}, {0.5, 3}};
  Eigen::Vector2d b(1, -1);
  const auto e = quantum_embedding({a, b, {}});
  ASSERT_TRUE(e.dilated);
  EXPECT_EQ(e.a_q.rows(), 4);
  EXPECT_LE((e.a_q - e.a_q.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const VectorXd xq = e.a_q.partialPivLu().solve(e.b_q);
  const VectorXd ref = direct_solve({a, b, {}}).x;
  EXPECT_LE((e.recover(xq) - ref).norm(), 1e-8 * ref.norm());
  EXPECT_LE((e.embed_solution(ref) - xq).norm(), 1e-12);
}

TEST(Backend, PreconditionedConditionNeverWorseOnMostKktSolves) {
  int total = 0, better = 0;
  for (const char* name : {"case3", "case6ww", "case9"}) {
    const auto p = build_dc_problem(bundled(name));
    auto opt = SolverOptions::defaults(Formulation::Dc);
    opt.backend.precondition = Precondition::IluK;
    const auto r = solve(*p, opt);
    for (const auto& t : r.trace) {
      ++total;
      if (t.kappa_precond <= t.kappa_raw) ++better;
    }
  }
  ASSERT_GT(total, 0);
  EXPECT_GE(better, 0.9 * total) << better << " of " << total;
}

TEST(Backend, Names) {
  EXPECT_EQ(backend_from_string("classical"), BackendKind::ClassicalLu);
  EXPECT_EQ(backend_from_string("vqls"), BackendKind::VqlsPreconditioned);
  EXPECT_EQ(backend_from_string("hhl_preconditioned"), BackendKind::HhlPreconditioned);
  EXPECT_EQ(precondition_from_string("ilu0"), Precondition::Ilu0);
  EXPECT_THROW(backend_from_string("abacus"), Error);
  EXPECT_EQ(make_backend({})->name(), std::string(to_string(BackendKind::ClassicalLu)));
}
