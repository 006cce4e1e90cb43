#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qopf/hhl.hpp"
#include "qopf/linear_solvers.hpp"
#include "qopf/vqls.hpp"

namespace qopf {

enum class BackendKind { ClassicalLu, HhlPreconditioned, VqlsPreconditioned };
/// Ilu0 is zero-fill ILU; IluK uses BackendOptions::ilu.fill_level.
enum class Precondition { None, Ilu0, IluK };

/// Fill level the quantum backends use when the preconditioner is IluK.
inline constexpr int kDefaultIluFillLevel = 5;

std::string_view to_string(BackendKind kind);
std::string_view to_string(Precondition p);
/// Accepts the canonical names plus the short forms "classical", "hhl", "vqls".
BackendKind backend_from_string(std::string_view s);
Precondition precondition_from_string(std::string_view s);

struct BackendOptions {
  BackendKind kind = BackendKind::ClassicalLu;
  Precondition precondition = Precondition::None;
  IluOptions ilu{.fill_level = kDefaultIluFillLevel};
  HhlConfig hhl;
  VqlsSolveOptions vqls;
  /// Reuse the previous solve's θ* as the first VQLS restart.
  bool vqls_warm_start = true;
  /// κ(A) and κ(M⁻¹A) by full SVD on every solve.
  bool condition_numbers = true;
};

/// One Newton-system solver. Backends may keep state between calls
/// (VQLS warm starts), so an instance belongs to a single IPM run.
class LinearBackend {
 public:
  virtual ~LinearBackend() = default;
  virtual std::string name() const = 0;
  /// `tolerance` is the relative residual the caller wants on the raw
  /// system; reports above it come back flagged, not as errors.
  virtual SolveReport solve(const LinearSystem& system, double tolerance) = 0;
  /// VQLS optimizer rows accumulated so far (empty for other backends).
  virtual const std::vector<VqlsTraceRow>& optimizer_trace() const;
};

std::unique_ptr<LinearBackend> make_backend(const BackendOptions& options);

}  // namespace qopf
