#include "qopf/opf_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qopf/errors.hpp"

namespace qopf {

void VariableLayout::append(std::string name, Index size) {
  blocks_.push_back(VariableBlock{std::move(name), total_, size});
  total_ += size;
}

const VariableBlock& VariableLayout::block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw DimensionError("no variable block named '" + std::string(name) + "'");
}

bool VariableLayout::has_block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return true;
  }
  return false;
}

std::string_view to_string(Formulation f) {
  return f == Formulation::Dc ? "dc" : "ac";
}

Formulation formulation_from_string(std::string_view s) {
  if (s == "dc" || s == "DC") return Formulation::Dc;
  if (s == "ac" || s == "AC") return Formulation::Ac;
  throw OptionError("unknown formulation '" + std::string(s) + "' (expected dc or ac)");
}

OpfProblem::OpfProblem(PowerCase pc, Formulation f)
    : case_(std::move(pc)), formulation_(f) {
  case_.validate();
}

double OpfProblem::objective(const VectorXd& x) const {
  const auto& pg = layout_.block("pg");
  const double base = case_.base_mva;
  double total = 0.0;
  for (Index k = 0; k < pg.size; ++k) {
    total += case_.costs[static_cast<std::size_t>(k)].evaluate(base * x(pg.offset + k));
  }
  return total;
}

VectorXd OpfProblem::objective_gradient(const VectorXd& x) const {
  const auto& pg = layout_.block("pg");
  const double base = case_.base_mva;
  VectorXd grad = VectorXd::Zero(num_variables());
  for (Index k = 0; k < pg.size; ++k) {
    const auto& c = case_.costs[static_cast<std::size_t>(k)];
    grad(pg.offset + k) = base * c.derivative(base * x(pg.offset + k));
  }
  return grad;
}

MatrixXd OpfProblem::objective_hessian(const VectorXd& x) const {
  const auto& pg = layout_.block("pg");
  const double base = case_.base_mva;
  MatrixXd hess = MatrixXd::Zero(num_variables(), num_variables());
  for (Index k = 0; k < pg.size; ++k) {
    const auto& c = case_.costs[static_cast<std::size_t>(k)];
    hess(pg.offset + k, pg.offset + k) =
        base * base * c.second_derivative(base * x(pg.offset + k));
  }
  return hess;
}

VectorXd OpfProblem::generator_dispatch_mw(const VectorXd& x) const {
  const auto& pg = layout_.block("pg");
  return case_.base_mva * x.segment(pg.offset, pg.size);
}

void OpfProblem::add_bound_rows(const std::string& block, const VectorXd& lower,
                                const VectorXd& upper) {
  const auto& blk = layout_.block(block);
  for (Index i = 0; i < blk.size; ++i) {
    const Index var = blk.offset + i;
    if (std::isfinite(upper(i)) && std::isfinite(lower(i)) &&
        std::abs(upper(i) - lower(i)) <= 1e-10 * std::max(1.0, std::abs(upper(i)))) {
      fixed_.emplace_back(var, upper(i));
      continue;
    }
    if (std::isfinite(upper(i))) {
      bounds_.push_back(BoundRow{var, 1.0, upper(i)});
      tags_.push_back(ConstraintTag{ConstraintTag::Kind::UpperBound, block, i});
    }
    if (std::isfinite(lower(i))) {
      bounds_.push_back(BoundRow{var, -1.0, lower(i)});
      tags_.push_back(ConstraintTag{ConstraintTag::Kind::LowerBound, block, i});
    }
  }
}

VectorXd OpfProblem::bound_values(const VectorXd& x) const {
  VectorXd g(num_bound_rows());
  for (std::size_t r = 0; r < bounds_.size(); ++r) {
    const auto& b = bounds_[r];
    g(static_cast<Index>(r)) = b.sign * (x(b.var) - b.limit);
  }
  return g;
}

void OpfProblem::bound_jacobian(MatrixXd& jac) const {
  for (std::size_t r = 0; r < bounds_.size(); ++r) {
    jac(static_cast<Index>(r), bounds_[r].var) = bounds_[r].sign;
  }
}

std::unique_ptr<OpfProblem> build_problem(const PowerCase& pc, Formulation f) {
  return f == Formulation::Dc ? build_dc_problem(pc) : build_ac_problem(pc);
}

MatrixXd evaluate_lagrangian_hessian(const NonlinearProgram& problem,
                                     const VectorXd& x, const VectorXd& lam,
                                     const VectorXd& mu) {
  if (x.size() != problem.num_variables() ||
      lam.size() != problem.num_equalities() ||
      mu.size() != problem.num_inequalities()) {
    throw DimensionError("lagrangian hessian: argument sizes do not match the problem");
  }
  return problem.lagrangian_hessian(x, lam, mu);
}

}  // namespace qopf
