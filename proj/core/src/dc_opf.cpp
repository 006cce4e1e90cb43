#include <cmath>
#include <limits>
#include <numbers>

#include "qopf/opf_problem.hpp"

namespace qopf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeg = std::numbers::pi / 180.0;

// Variables: x = [θ (nb); Pg (ng)], all in radians / p.u.
//   H = B θ + p_shift + Pd + Gs - Cg Pg      (nb rows)
//       θ_ref - θ0_ref                       (1 row)
//       x_k - value_k                        (fixed variables)
//   G = variable bounds, then ±(Bf θ + pf_shift) - smax for limited branches.
class DcOpfProblem final : public OpfProblem {
 public:
  explicit DcOpfProblem(const PowerCase& pc) : OpfProblem(pc, Formulation::Dc) {
    nb_ = static_cast<Index>(case_.num_buses());
    ng_ = static_cast<Index>(case_.num_generators());
    layout_.append("va", nb_);
    layout_.append("pg", ng_);
    net_ = dc_susceptance(case_);
    ref_ = static_cast<Index>(case_.reference_bus());

    gen_bus_.resize(static_cast<std::size_t>(ng_));
    for (Index k = 0; k < ng_; ++k) {
      gen_bus_[static_cast<std::size_t>(k)] = static_cast<Index>(
          case_.bus_index(case_.generators[static_cast<std::size_t>(k)].bus));
    }

    VectorXd va_lo = VectorXd::Constant(nb_, -kInf);
    VectorXd va_hi = VectorXd::Constant(nb_, kInf);
    for (Index i = 0; i < nb_; ++i) {
      const auto& b = case_.buses[static_cast<std::size_t>(i)];
      if (i == ref_) continue;  // pinned by its own equality row
      if (b.va_min) va_lo(i) = *b.va_min * kDeg;
      if (b.va_max) va_hi(i) = *b.va_max * kDeg;
    }
    VectorXd pg_lo(ng_), pg_hi(ng_);
    for (Index k = 0; k < ng_; ++k) {
      const auto& g = case_.generators[static_cast<std::size_t>(k)];
      pg_lo(k) = g.pmin;
      pg_hi(k) = g.pmax;
    }
    add_bound_rows("pg", pg_lo, pg_hi);
    add_bound_rows("va", va_lo, va_hi);

    for (Index l = 0; l < static_cast<Index>(case_.num_branches()); ++l) {
      const double smax = case_.branches[static_cast<std::size_t>(l)].smax;
      if (smax > 0.0) {
        limited_.push_back(l);
        tags_.push_back(ConstraintTag{ConstraintTag::Kind::BranchFrom, "branch", l});
        tags_.push_back(ConstraintTag{ConstraintTag::Kind::BranchTo, "branch", l});
      }
    }

    injection_ = VectorXd::Zero(nb_);
    for (Index i = 0; i < nb_; ++i) {
      const auto& b = case_.buses[static_cast<std::size_t>(i)];
      injection_(i) = net_.p_shift(i) + b.pd + b.gs;
    }

    // Constant Jacobians.
    jh_ = MatrixXd::Zero(num_equalities(), num_variables());
    jh_.topLeftCorner(nb_, nb_) = net_.bbus;
    for (Index k = 0; k < ng_; ++k) jh_(gen_bus_[static_cast<std::size_t>(k)], nb_ + k) -= 1.0;
    jh_(nb_, ref_) = 1.0;
    for (std::size_t f = 0; f < fixed_.size(); ++f) {
      jh_(nb_ + 1 + static_cast<Index>(f), fixed_[f].first) = 1.0;
    }

    jg_ = MatrixXd::Zero(num_inequalities(), num_variables());
    bound_jacobian(jg_);
    const Index off = num_bound_rows();
    for (std::size_t r = 0; r < limited_.size(); ++r) {
      const auto row = net_.bf.row(limited_[r]);
      jg_.block(off + 2 * static_cast<Index>(r), 0, 1, nb_) = row;
      jg_.block(off + 2 * static_cast<Index>(r) + 1, 0, 1, nb_) = -row;
    }
  }

  Index num_equalities() const override {
    return nb_ + 1 + static_cast<Index>(fixed_.size());
  }
  Index num_inequalities() const override {
    return num_bound_rows() + 2 * static_cast<Index>(limited_.size());
  }

  VectorXd equalities(const VectorXd& x) const override {
    VectorXd h(num_equalities());
    const VectorXd theta = x.head(nb_);
    h.head(nb_) = net_.bbus * theta + injection_;
    for (Index k = 0; k < ng_; ++k) h(gen_bus_[static_cast<std::size_t>(k)]) -= x(nb_ + k);
    h(nb_) = x(ref_) - case_.buses[static_cast<std::size_t>(ref_)].va0 * kDeg;
    for (std::size_t f = 0; f < fixed_.size(); ++f) {
      h(nb_ + 1 + static_cast<Index>(f)) = x(fixed_[f].first) - fixed_[f].second;
    }
    return h;
  }

  MatrixXd equality_jacobian(const VectorXd&) const override { return jh_; }

  VectorXd inequalities(const VectorXd& x) const override {
    VectorXd g(num_inequalities());
    const Index off = num_bound_rows();
    g.head(off) = bound_values(x);
    const VectorXd theta = x.head(nb_);
    for (std::size_t r = 0; r < limited_.size(); ++r) {
      const Index l = limited_[r];
      const double flow = net_.bf.row(l).dot(theta) + net_.pf_shift(l);
      const double smax = case_.branches[static_cast<std::size_t>(l)].smax;
      g(off + 2 * static_cast<Index>(r)) = flow - smax;
      g(off + 2 * static_cast<Index>(r) + 1) = -flow - smax;
    }
    return g;
  }

  MatrixXd inequality_jacobian(const VectorXd&) const override { return jg_; }

  MatrixXd lagrangian_hessian(const VectorXd& x, const VectorXd&,
                              const VectorXd&) const override {
    return objective_hessian(x);
  }

  VectorXd initial_point() const override {
    VectorXd x(num_variables());
    for (Index i = 0; i < nb_; ++i) {
      x(i) = case_.buses[static_cast<std::size_t>(i)].va0 * kDeg;
    }
    for (Index k = 0; k < ng_; ++k) {
      const auto& g = case_.generators[static_cast<std::size_t>(k)];
      x(nb_ + k) = 0.5 * (g.pmin + g.pmax);
    }
    return x;
  }

 private:
  Index nb_ = 0;
  Index ng_ = 0;
  Index ref_ = 0;
  DcNetwork net_;
  std::vector<Index> gen_bus_;
  std::vector<Index> limited_;
  VectorXd injection_;
  MatrixXd jh_;
  MatrixXd jg_;
};

}  // namespace

std::unique_ptr<OpfProblem> build_dc_problem(const PowerCase& pc) {
  return std::make_unique<DcOpfProblem>(pc);
}

}  // namespace qopf
