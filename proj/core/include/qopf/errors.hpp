#pragma once

#include <stdexcept>
#include <string>

namespace qopf {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed case input. `location` is "line N" for text input or a
/// JSON-pointer-like path such as "bus[2][7]".
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location.empty() ? what : location + ": " + what),
        location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

/// Structurally invalid network data (missing reference bus, dangling ids,
/// zero-impedance branches, ...).
class CaseError : public Error {
 public:
  using Error::Error;
};

/// An option or setting outside its accepted values.
class OptionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A linear system could not be solved to working precision.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// ILU(0) met a (near-)zero pivot.
class ZeroPivotError : public Error {
 public:
  ZeroPivotError(long row, const std::string& what)
      : Error(what), row_(row) {}

  long row() const noexcept { return row_; }

 private:
  long row_;
};

/// Invalid input to the statevector simulator or a quantum routine.
class QuantumError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the interior point loop, tagged with the iteration index.
class SolverError : public Error {
 public:
  SolverError(int iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace qopf
