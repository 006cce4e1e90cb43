#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "qopf/opf_problem.hpp"

namespace qopf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeg = std::numbers::pi / 180.0;

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// Active/reactive power of one admittance term with local derivatives over
// (θa, θb, Va, Vb).
struct TermPower {
  double p = 0.0;
  double q = 0.0;
  Vec4 dp = Vec4::Zero();
  Vec4 dq = Vec4::Zero();
  Mat4 hp = Mat4::Zero();
  Mat4 hq = Mat4::Zero();

  TermPower& operator+=(const TermPower& o) {
    p += o.p;
    q += o.q;
    dp += o.dp;
    dq += o.dq;
    hp += o.hp;
    hq += o.hq;
    return *this;
  }
};

// Va Vb [(g cosδ + b sinδ) + j(g sinδ - b cosδ)],  δ = θa - θb.
TermPower pair_term(double g, double b, double ta, double tb, double va, double vb) {
  const double d = ta - tb;
  const double c = g * std::cos(d) + b * std::sin(d);
  const double s = g * std::sin(d) - b * std::cos(d);
  const double vv = va * vb;
  TermPower t;
  t.p = vv * c;
  t.q = vv * s;
  t.dp << -vv * s, vv * s, vb * c, va * c;
  t.dq << vv * c, -vv * c, vb * s, va * s;

  t.hp << -vv * c, vv * c, -vb * s, -va * s,
           vv * c, -vv * c, vb * s, va * s,
          -vb * s, vb * s, 0.0, c,
          -va * s, va * s, c, 0.0;
  t.hq << -vv * s, vv * s, vb * c, va * c,
           vv * s, -vv * s, -vb * c, -va * c,
           vb * c, -vb * c, 0.0, s,
           va * c, -va * c, s, 0.0;
  return t;
}

// Va² (g - j b): the diagonal (shunt-like) part, independent of angles.
TermPower self_term(double g, double b, double va) {
  TermPower t;
  t.p = va * va * g;
  t.q = -va * va * b;
  t.dp(2) = 2.0 * va * g;
  t.dq(2) = -2.0 * va * b;
  t.hp(2, 2) = 2.0 * g;
  t.hq(2, 2) = -2.0 * b;
  return t;
}

// Variables: x = [θ (nb); V (nb); Pg (ng); Qg (ng)].
//   H = P balance (nb), Q balance (nb), θ_ref - θ0_ref, fixed variables.
//   G = bounds on Pg, Qg, V, θ, then |Sf|² - smax², |St|² - smax² per limited branch.
class AcOpfProblem final : public OpfProblem {
 public:
  explicit AcOpfProblem(const PowerCase& pc) : OpfProblem(pc, Formulation::Ac) {
    nb_ = static_cast<Index>(case_.num_buses());
    ng_ = static_cast<Index>(case_.num_generators());
    layout_.append("va", nb_);
    layout_.append("vm", nb_);
    layout_.append("pg", ng_);
    layout_.append("qg", ng_);
    ybus_ = build_ybus(case_).y;
    ref_ = static_cast<Index>(case_.reference_bus());

    for (Index i = 0; i < nb_; ++i) {
      std::vector<Index> row;
      for (Index j = 0; j < nb_; ++j) {
        if (j != i && ybus_(i, j) != std::complex<double>(0.0, 0.0)) row.push_back(j);
      }
      neighbours_.push_back(std::move(row));
    }
    for (const auto& g : case_.generators) {
      gen_bus_.push_back(static_cast<Index>(case_.bus_index(g.bus)));
    }

    VectorXd pg_lo(ng_), pg_hi(ng_), qg_lo(ng_), qg_hi(ng_);
    for (Index k = 0; k < ng_; ++k) {
      const auto& g = case_.generators[static_cast<std::size_t>(k)];
      pg_lo(k) = g.pmin;
      pg_hi(k) = g.pmax;
      qg_lo(k) = g.qmin;
      qg_hi(k) = g.qmax;
    }
    VectorXd vm_lo(nb_), vm_hi(nb_);
    VectorXd va_lo = VectorXd::Constant(nb_, -kInf);
    VectorXd va_hi = VectorXd::Constant(nb_, kInf);
    for (Index i = 0; i < nb_; ++i) {
      const auto& b = case_.buses[static_cast<std::size_t>(i)];
      vm_lo(i) = b.vmin;
      vm_hi(i) = b.vmax;
      if (i == ref_) continue;
      if (b.va_min) va_lo(i) = *b.va_min * kDeg;
      if (b.va_max) va_hi(i) = *b.va_max * kDeg;
    }
    add_bound_rows("pg", pg_lo, pg_hi);
    add_bound_rows("qg", qg_lo, qg_hi);
    add_bound_rows("vm", vm_lo, vm_hi);
    add_bound_rows("va", va_lo, va_hi);

    for (Index l = 0; l < static_cast<Index>(case_.num_branches()); ++l) {
      const auto& br = case_.branches[static_cast<std::size_t>(l)];
      if (br.smax > 0.0) {
        limited_.push_back(l);
        tags_.push_back(ConstraintTag{ConstraintTag::Kind::BranchFrom, "branch", l});
        tags_.push_back(ConstraintTag{ConstraintTag::Kind::BranchTo, "branch", l});
      }
      branch_y_.push_back(branch_admittance(br));
      branch_ends_.push_back({static_cast<Index>(case_.bus_index(br.from)),
                              static_cast<Index>(case_.bus_index(br.to))});
    }
  }

  Index num_equalities() const override {
    return 2 * nb_ + 1 + static_cast<Index>(fixed_.size());
  }
  Index num_inequalities() const override {
    return num_bound_rows() + 2 * static_cast<Index>(limited_.size());
  }

  VectorXd equalities(const VectorXd& x) const override {
    VectorXd h = VectorXd::Zero(num_equalities());
    for (Index i = 0; i < nb_; ++i) {
      const auto t = bus_injection(x, i);
      const auto& b = case_.buses[static_cast<std::size_t>(i)];
      h(i) = t.p + b.pd;
      h(nb_ + i) = t.q + b.qd;
    }
    for (Index k = 0; k < ng_; ++k) {
      const Index i = gen_bus_[static_cast<std::size_t>(k)];
      h(i) -= x(pg_off() + k);
      h(nb_ + i) -= x(qg_off() + k);
    }
    h(2 * nb_) = x(ref_) - case_.buses[static_cast<std::size_t>(ref_)].va0 * kDeg;
    for (std::size_t f = 0; f < fixed_.size(); ++f) {
      h(2 * nb_ + 1 + static_cast<Index>(f)) = x(fixed_[f].first) - fixed_[f].second;
    }
    return h;
  }

  MatrixXd equality_jacobian(const VectorXd& x) const override {
    MatrixXd j = MatrixXd::Zero(num_equalities(), num_variables());
    std::array<Index, 4> idx{};
    for (Index i = 0; i < nb_; ++i) {
      // Self term only contributes to dV_i, pair terms via their own indices.
      const auto self = self_at(x, i);
      j(i, nb_ + i) += self.dp(2);
      j(nb_ + i, nb_ + i) += self.dq(2);
      for (Index k : neighbours_[static_cast<std::size_t>(i)]) {
        const auto t = pair_at(x, i, k, idx);
        for (int a = 0; a < 4; ++a) {
          j(i, idx[static_cast<std::size_t>(a)]) += t.dp(a);
          j(nb_ + i, idx[static_cast<std::size_t>(a)]) += t.dq(a);
        }
      }
    }
    for (Index k = 0; k < ng_; ++k) {
      const Index i = gen_bus_[static_cast<std::size_t>(k)];
      j(i, pg_off() + k) = -1.0;
      j(nb_ + i, qg_off() + k) = -1.0;
    }
    j(2 * nb_, ref_) = 1.0;
    for (std::size_t f = 0; f < fixed_.size(); ++f) {
      j(2 * nb_ + 1 + static_cast<Index>(f), fixed_[f].first) = 1.0;
    }
    return j;
  }

  VectorXd inequalities(const VectorXd& x) const override {
    VectorXd g(num_inequalities());
    const Index off = num_bound_rows();
    g.head(off) = bound_values(x);
    std::array<Index, 4> idx{};
    for (std::size_t r = 0; r < limited_.size(); ++r) {
      const Index l = limited_[r];
      const double s2 = square(case_.branches[static_cast<std::size_t>(l)].smax);
      for (int end = 0; end < 2; ++end) {
        const auto t = branch_flow(x, l, end, idx);
        g(off + 2 * static_cast<Index>(r) + end) = t.p * t.p + t.q * t.q - s2;
      }
    }
    return g;
  }

  MatrixXd inequality_jacobian(const VectorXd& x) const override {
    MatrixXd j = MatrixXd::Zero(num_inequalities(), num_variables());
    bound_jacobian(j);
    const Index off = num_bound_rows();
    std::array<Index, 4> idx{};
    for (std::size_t r = 0; r < limited_.size(); ++r) {
      for (int end = 0; end < 2; ++end) {
        const auto t = branch_flow(x, limited_[r], end, idx);
        const Vec4 grad = 2.0 * t.p * t.dp + 2.0 * t.q * t.dq;
        for (int a = 0; a < 4; ++a) {
          j(off + 2 * static_cast<Index>(r) + end, idx[static_cast<std::size_t>(a)]) += grad(a);
        }
      }
    }
    return j;
  }

  MatrixXd lagrangian_hessian(const VectorXd& x, const VectorXd& lam,
                              const VectorXd& mu) const override {
    MatrixXd hess = objective_hessian(x);
    std::array<Index, 4> idx{};
    auto scatter = [&](const Mat4& local) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          hess(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]) += local(a, b);
        }
      }
    };
    for (Index i = 0; i < nb_; ++i) {
      const double lp = lam(i);
      const double lq = lam(nb_ + i);
      if (lp == 0.0 && lq == 0.0) continue;
      const auto self = self_at(x, i);
      hess(nb_ + i, nb_ + i) += lp * self.hp(2, 2) + lq * self.hq(2, 2);
      for (Index k : neighbours_[static_cast<std::size_t>(i)]) {
        const auto t = pair_at(x, i, k, idx);
        scatter(lp * t.hp + lq * t.hq);
      }
    }
    const Index off = num_bound_rows();
    for (std::size_t r = 0; r < limited_.size(); ++r) {
      for (int end = 0; end < 2; ++end) {
        const double m = mu(off + 2 * static_cast<Index>(r) + end);
        if (m == 0.0) continue;
        const auto t = branch_flow(x, limited_[r], end, idx);
        const Mat4 local = 2.0 * (t.dp * t.dp.transpose() + t.p * t.hp +
                                  t.dq * t.dq.transpose() + t.q * t.hq);
        scatter(m * local);
      }
    }
    return 0.5 * (hess + hess.transpose());
  }

  VectorXd initial_point() const override {
    VectorXd x(num_variables());
    for (Index i = 0; i < nb_; ++i) {
      const auto& b = case_.buses[static_cast<std::size_t>(i)];
      x(i) = b.va0 * kDeg;
      x(nb_ + i) = std::clamp(b.vm0, b.vmin, b.vmax);
    }
    for (Index k = 0; k < ng_; ++k) {
      const auto& g = case_.generators[static_cast<std::size_t>(k)];
      x(pg_off() + k) = 0.5 * (g.pmin + g.pmax);
      x(qg_off() + k) = 0.5 * (g.qmin + g.qmax);
    }
    return x;
  }

 private:
  static double square(double v) { return v * v; }
  Index pg_off() const { return 2 * nb_; }
  Index qg_off() const { return 2 * nb_ + ng_; }

  TermPower self_at(const VectorXd& x, Index i) const {
    const auto y = ybus_(i, i);
    return self_term(y.real(), y.imag(), x(nb_ + i));
  }

  TermPower pair_at(const VectorXd& x, Index i, Index k, std::array<Index, 4>& idx) const {
    const auto y = ybus_(i, k);
    idx = {i, k, nb_ + i, nb_ + k};
    return pair_term(y.real(), y.imag(), x(i), x(k), x(nb_ + i), x(nb_ + k));
  }

  TermPower bus_injection(const VectorXd& x, Index i) const {
    TermPower total = self_at(x, i);
    std::array<Index, 4> idx{};
    for (Index k : neighbours_[static_cast<std::size_t>(i)]) {
      const auto t = pair_at(x, i, k, idx);
      total.p += t.p;
      total.q += t.q;
    }
    return total;
  }

  // Complex power entering the branch at its from (end 0) or to (end 1) side.
  TermPower branch_flow(const VectorXd& x, Index l, int end, std::array<Index, 4>& idx) const {
    const auto& y = branch_y_[static_cast<std::size_t>(l)];
    const auto [f, t] = branch_ends_[static_cast<std::size_t>(l)];
    const Index a = end == 0 ? f : t;
    const Index b = end == 0 ? t : f;
    const auto ys = end == 0 ? y.yff : y.ytt;
    const auto ym = end == 0 ? y.yft : y.ytf;
    idx = {a, b, nb_ + a, nb_ + b};
    TermPower total = self_term(ys.real(), ys.imag(), x(nb_ + a));
    total += pair_term(ym.real(), ym.imag(), x(a), x(b), x(nb_ + a), x(nb_ + b));
    return total;
  }

  Index nb_ = 0;
  Index ng_ = 0;
  Index ref_ = 0;
  Eigen::MatrixXcd ybus_;
  std::vector<std::vector<Index>> neighbours_;
  std::vector<Index> gen_bus_;
  std::vector<Index> limited_;
  std::vector<BranchAdmittance> branch_y_;
  std::vector<std::pair<Index, Index>> branch_ends_;
};

}  // namespace

std::unique_ptr<OpfProblem> build_ac_problem(const PowerCase& pc) {
  return std::make_unique<AcOpfProblem>(pc);
}

}  // namespace qopf
