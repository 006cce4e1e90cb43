#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qopf/ipm.hpp"

namespace qopf {

/// Column header of the convergence trace CSV.
inline constexpr const char* kTraceCsvHeader =
    "iteration,feascond,gradcond,compcond,costcond,objective,alpha_p,alpha_d,gamma,kappa_raw,"
    "kappa_precond";

/// Shortest round-trip text for a double; "nan"/"inf" for non-finite values.
std::string format_double(double v);

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
/// Inverse of write_trace_csv for the CSV columns. Throws ParseError.
ConvergenceTrace read_trace_csv(std::istream& in);

/// Two whitespace-separated columns (iteration, gradcond) with a '#' header.
void write_gradcond_data(std::ostream& out, const ConvergenceTrace& trace);

}  // namespace qopf
