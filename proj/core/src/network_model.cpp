#include "qopf/network_model.hpp"

#include <cmath>
#include <numbers>

#include "qopf/errors.hpp"

namespace qopf {

double CostCurve::evaluate(double p_mw) const {
  double acc = 0.0;
  for (double c : coefficients) acc = acc * p_mw + c;
  return acc;
}

double CostCurve::derivative(double p_mw) const {
  const auto n = coefficients.size();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double power = static_cast<double>(n - 1 - k);
    acc = acc * p_mw + power * coefficients[k];
  }
  return acc;
}

double CostCurve::second_derivative(double p_mw) const {
  const auto n = coefficients.size();
  double acc = 0.0;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const double power = static_cast<double>(n - 1 - k);
    acc = acc * p_mw + power * (power - 1.0) * coefficients[k];
  }
  return acc;
}

std::size_t PowerCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  throw CaseError("unknown bus id " + std::to_string(id));
}

std::size_t PowerCase::reference_bus() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].type == BusType::Ref) return i;
  }
  throw CaseError("case has no reference bus");
}

void PowerCase::validate() const {
  if (!(base_mva > 0.0)) throw CaseError("baseMVA must be positive");
  if (buses.empty()) throw CaseError("case has no buses");

  std::unordered_map<int, std::size_t> seen;
  std::size_t refs = 0;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const auto& b = buses[i];
    if (!seen.emplace(b.id, i).second) {
      throw CaseError("duplicate bus id " + std::to_string(b.id));
    }
    if (b.type == BusType::Ref) ++refs;
    if (b.vmin > b.vmax) {
      throw CaseError("bus " + std::to_string(b.id) + ": Vmin > Vmax");
    }
    if (b.vm0 < b.vmin || b.vm0 > b.vmax) {
      throw CaseError("bus " + std::to_string(b.id) +
                      ": initial voltage outside [Vmin, Vmax]");
    }
  }
  if (refs == 0) throw CaseError("case has no reference bus");
  if (refs > 1) throw CaseError("case has more than one reference bus");

  for (std::size_t k = 0; k < generators.size(); ++k) {
    const auto& g = generators[k];
    if (!seen.contains(g.bus)) {
      throw CaseError("generator " + std::to_string(k) +
                      " references unknown bus " + std::to_string(g.bus));
    }
    if (g.pmin > g.pmax) {
      throw CaseError("generator " + std::to_string(k) + ": Pmin > Pmax");
    }
    if (g.qmin > g.qmax) {
      throw CaseError("generator " + std::to_string(k) + ": Qmin > Qmax");
    }
  }
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& br = branches[k];
    if (!seen.contains(br.from) || !seen.contains(br.to)) {
      throw CaseError("branch " + std::to_string(k) +
                      " references an unknown bus");
    }
    if (br.from == br.to) {
      throw CaseError("branch " + std::to_string(k) + " is a self-loop");
    }
  }
  if (costs.size() != generators.size()) {
    throw CaseError("expected one cost curve per generator");
  }
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (costs[k].coefficients.empty()) {
      throw CaseError("cost curve " + std::to_string(k) + " has no coefficients");
    }
    if (costs[k].generator != k) {
      throw CaseError("cost curve " + std::to_string(k) +
                      " is not attached to generator " + std::to_string(k));
    }
  }
}

BranchAdmittance branch_admittance(const BranchRecord& br) {
  using cd = std::complex<double>;
  if (br.r == 0.0 && br.x == 0.0) {
    throw CaseError("zero-impedance branch " + std::to_string(br.from) + "-" +
                    std::to_string(br.to));
  }
  const cd ys = 1.0 / cd(br.r, br.x);
  const cd half_charging(0.0, br.b_charging / 2.0);
  const double ratio = br.tap == 0.0 ? 1.0 : br.tap;
  const cd tap = std::polar(ratio, br.shift * std::numbers::pi / 180.0);

  BranchAdmittance a;
  a.ytt = ys + half_charging;
  a.yff = a.ytt / (tap * std::conj(tap));
  a.yft = -ys / std::conj(tap);
  a.ytf = -ys / tap;
  return a;
}

AdmittanceMatrix build_ybus(const PowerCase& pc) {
  const auto n = static_cast<Eigen::Index>(pc.num_buses());
  AdmittanceMatrix out;
  out.y = Eigen::MatrixXcd::Zero(n, n);
  out.bus_ids.reserve(pc.num_buses());
  for (std::size_t i = 0; i < pc.num_buses(); ++i) {
    out.bus_ids.push_back(pc.buses[i].id);
    out.index_of.emplace(pc.buses[i].id, i);
  }

  for (const auto& br : pc.branches) {
    const auto f = static_cast<Eigen::Index>(out.index_of.at(br.from));
    const auto t = static_cast<Eigen::Index>(out.index_of.at(br.to));
    const auto a = branch_admittance(br);
    out.y(f, f) += a.yff;
    out.y(f, t) += a.yft;
    out.y(t, f) += a.ytf;
    out.y(t, t) += a.ytt;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = pc.buses[static_cast<std::size_t>(i)];
    out.y(i, i) += std::complex<double>(b.gs, b.bs);
  }
  return out;
}

DcNetwork dc_susceptance(const PowerCase& pc) {
  const auto nb = static_cast<Eigen::Index>(pc.num_buses());
  const auto nl = static_cast<Eigen::Index>(pc.num_branches());

  DcNetwork net;
  net.bbus = Eigen::MatrixXd::Zero(nb, nb);
  net.p_shift = Eigen::VectorXd::Zero(nb);
  net.bf = Eigen::MatrixXd::Zero(nl, nb);
  net.pf_shift = Eigen::VectorXd::Zero(nl);

  for (Eigen::Index k = 0; k < nl; ++k) {
    const auto& br = pc.branches[static_cast<std::size_t>(k)];
    if (br.x == 0.0) {
      throw CaseError("zero-reactance branch " + std::to_string(br.from) + "-" +
                      std::to_string(br.to));
    }
    const auto f = static_cast<Eigen::Index>(pc.bus_index(br.from));
    const auto t = static_cast<Eigen::Index>(pc.bus_index(br.to));
    const double ratio = br.tap == 0.0 ? 1.0 : br.tap;
    const double b = 1.0 / (br.x * ratio);

    net.bf(k, f) = b;
    net.bf(k, t) = -b;
    net.bbus(f, f) += b;
    net.bbus(t, t) += b;
    net.bbus(f, t) -= b;
    net.bbus(t, f) -= b;

    const double pf = -b * br.shift * std::numbers::pi / 180.0;
    net.pf_shift(k) = pf;
    net.p_shift(f) += pf;
    net.p_shift(t) -= pf;
  }

  for (Eigen::Index i = 0; i < nb; ++i) {
    if (net.bbus.row(i).cwiseAbs().maxCoeff() == 0.0) {
      net.isolated_buses.push_back(static_cast<std::size_t>(i));
    }
  }
  return net;
}

}  // namespace qopf
