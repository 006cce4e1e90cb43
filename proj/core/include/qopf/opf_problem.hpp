#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qopf/network_model.hpp"

namespace qopf {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Smooth nonlinear program
///
///     min f(x)   s.t.   h(x) = 0,   g(x) <= 0
///
/// Jacobians are returned row-per-constraint (ne x nx and ni x nx); the KKT
/// assembly transposes them where column gradients are needed.
class NonlinearProgram {
 public:
  virtual ~NonlinearProgram() = default;

  virtual Index num_variables() const = 0;
  virtual Index num_equalities() const = 0;
  virtual Index num_inequalities() const = 0;

  virtual double objective(const VectorXd& x) const = 0;
  virtual VectorXd objective_gradient(const VectorXd& x) const = 0;

  virtual VectorXd equalities(const VectorXd& x) const = 0;
  virtual MatrixXd equality_jacobian(const VectorXd& x) const = 0;

  virtual VectorXd inequalities(const VectorXd& x) const = 0;
  virtual MatrixXd inequality_jacobian(const VectorXd& x) const = 0;

  /// ∇²f + Σ λ_k ∇²h_k + Σ μ_m ∇²g_m.
  virtual MatrixXd lagrangian_hessian(const VectorXd& x, const VectorXd& lam,
                                      const VectorXd& mu) const = 0;

  virtual VectorXd initial_point() const = 0;
};

struct VariableBlock {
  std::string name;
  Index offset = 0;
  Index size = 0;
};

/// Ordered, contiguous partition of the decision vector.
class VariableLayout {
 public:
  void append(std::string name, Index size);

  Index size() const { return total_; }
  const std::vector<VariableBlock>& blocks() const { return blocks_; }
  const VariableBlock& block(std::string_view name) const;
  bool has_block(std::string_view name) const;

 private:
  std::vector<VariableBlock> blocks_;
  Index total_ = 0;
};

enum class Formulation { Dc, Ac };

std::string_view to_string(Formulation f);
Formulation formulation_from_string(std::string_view s);

/// Origin of one inequality row, for reporting binding constraints.
struct ConstraintTag {
  enum class Kind {
    UpperBound,
    LowerBound,
    BranchFrom,
    BranchTo,
  };
  Kind kind;
  std::string block;  // variable block for bounds, "branch" for flows
  Index index = 0;    // element inside the block / branch index
};

/// OPF instance: a NonlinearProgram plus the network bookkeeping needed to
/// interpret its variables.
class OpfProblem : public NonlinearProgram {
 public:
  Formulation formulation() const { return formulation_; }
  const VariableLayout& layout() const { return layout_; }
  const PowerCase& power_case() const { return case_; }
  const std::vector<ConstraintTag>& inequality_tags() const { return tags_; }

  Index num_variables() const override { return layout_.size(); }

  double objective(const VectorXd& x) const override;
  VectorXd objective_gradient(const VectorXd& x) const override;
  MatrixXd objective_hessian(const VectorXd& x) const;

  /// Generator active power in MW extracted from x.
  VectorXd generator_dispatch_mw(const VectorXd& x) const;

 protected:
  OpfProblem(PowerCase pc, Formulation f);

  /// Emits bound rows (upper then lower per element) for every finite bound
  /// of a block. Elements whose bounds coincide become fixed-value equalities
  /// instead (see fixed_).
  void add_bound_rows(const std::string& block, const VectorXd& lower,
                      const VectorXd& upper);
  VectorXd bound_values(const VectorXd& x) const;
  void bound_jacobian(MatrixXd& jac) const;
  Index num_bound_rows() const { return static_cast<Index>(bounds_.size()); }

  PowerCase case_;
  Formulation formulation_;
  VariableLayout layout_;
  std::vector<ConstraintTag> tags_;
  std::vector<std::pair<Index, double>> fixed_;  // (variable, value)

 private:
  struct BoundRow {
    Index var;
    double sign;   // +1: x - ub <= 0, -1: lb - x <= 0
    double limit;
  };
  std::vector<BoundRow> bounds_;
};

std::unique_ptr<OpfProblem> build_dc_problem(const PowerCase& pc);
std::unique_ptr<OpfProblem> build_ac_problem(const PowerCase& pc);
std::unique_ptr<OpfProblem> build_problem(const PowerCase& pc, Formulation f);

/// Convenience wrapper matching the NonlinearProgram call.
MatrixXd evaluate_lagrangian_hessian(const NonlinearProgram& problem,
                                     const VectorXd& x, const VectorXd& lam,
                                     const VectorXd& mu);

}  // namespace qopf
