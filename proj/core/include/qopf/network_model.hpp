#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace qopf {

enum class BusType { PQ = 1, PV = 2, Ref = 3 };

// All power quantities below are stored in per-unit on the case baseMVA.
// Angles stay in degrees, as in the source data.

struct BusRecord {
  int id = 0;
  BusType type = BusType::PQ;
  double pd = 0.0;
  double qd = 0.0;
  double gs = 0.0;
  double bs = 0.0;
  double vmax = 1.1;
  double vmin = 0.9;
  double va0 = 0.0;
  double vm0 = 1.0;
  // Optional angle limits (degrees). Standard cases carry none.
  std::optional<double> va_min;
  std::optional<double> va_max;
};

struct GeneratorRecord {
  int bus = 0;
  double pmax = 0.0;
  double pmin = 0.0;
  double qmax = 0.0;
  double qmin = 0.0;
  double pg0 = 0.0;
  double qg0 = 0.0;
  bool in_service = true;
};

struct BranchRecord {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;
  double tap = 1.0;
  double shift = 0.0;  // degrees
  double smax = 0.0;   // p.u., 0 means unlimited
  bool in_service = true;
};

/// Polynomial cost in $/h. `coefficients` are in descending degree and act
/// on generator output in MW.
struct CostCurve {
  std::size_t generator = 0;
  std::vector<double> coefficients;

  double evaluate(double p_mw) const;
  double derivative(double p_mw) const;
  double second_derivative(double p_mw) const;
};

struct PowerCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<BusRecord> buses;
  std::vector<GeneratorRecord> generators;
  std::vector<BranchRecord> branches;
  std::vector<CostCurve> costs;

  std::size_t num_buses() const { return buses.size(); }
  std::size_t num_generators() const { return generators.size(); }
  std::size_t num_branches() const { return branches.size(); }

  /// Position of bus `id` in `buses`; throws CaseError for unknown ids.
  std::size_t bus_index(int id) const;
  std::size_t reference_bus() const;

  /// Checks the record and cross-reference invariants; throws CaseError.
  void validate() const;
};

enum class CaseFormat { Json, Matpower };

/// Parses a case and converts it to per-unit. Out-of-service generators
/// and branches are dropped.
PowerCase parse_case(std::istream& in, CaseFormat format);
PowerCase parse_case(std::string_view text, CaseFormat format);

/// Loads from disk, picking the format from the extension (.json or .m).
PowerCase load_case(const std::filesystem::path& path);

/// Writes the canonical JSON form (MW/MVAr units, standard column order).
std::string to_json(const PowerCase& pc);

struct AdmittanceMatrix {
  Eigen::MatrixXcd y;
  std::vector<int> bus_ids;
  std::unordered_map<int, std::size_t> index_of;

  Eigen::MatrixXd conductance() const { return y.real(); }
  Eigen::MatrixXd susceptance() const { return y.imag(); }
};

/// Two-port Π-model admittances of one branch: [I_f; I_t] = [yff yft; ytf ytt] [V_f; V_t].
struct BranchAdmittance {
  std::complex<double> yff, yft, ytf, ytt;
};

BranchAdmittance branch_admittance(const BranchRecord& br);

AdmittanceMatrix build_ybus(const PowerCase& pc);

/// Linearized (DC) network: P_bus = B θ + p_shift, P_branch = Bf θ + pf_shift.
struct DcNetwork {
  Eigen::MatrixXd bbus;
  Eigen::VectorXd p_shift;
  Eigen::MatrixXd bf;
  Eigen::VectorXd pf_shift;
  std::vector<std::size_t> isolated_buses;

  bool has_isolated_bus() const { return !isolated_buses.empty(); }
};

DcNetwork dc_susceptance(const PowerCase& pc);

}  // namespace qopf
