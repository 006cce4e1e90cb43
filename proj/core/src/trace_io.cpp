#include "qopf/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "qopf/errors.hpp"

namespace qopf {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& e : trace) {
    const auto& m = e.metrics;
    out << e.iteration;
    for (double v : {m.feascond, m.gradcond, m.compcond, m.costcond, m.objective, e.alpha_p,
                     e.alpha_d, e.gamma, e.kappa_raw, e.kappa_precond}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
}

namespace {

double parse_field(const std::string& s, int line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line), "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

ConvergenceTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw ParseError("line 1", "missing trace CSV header");
  }
  ConvergenceTrace trace;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw ParseError("line " + std::to_string(n), "expected 11 columns");
    TraceEntry e;
    e.iteration = static_cast<int>(parse_field(cells[0], n));
    e.metrics = {parse_field(cells[1], n), parse_field(cells[2], n), parse_field(cells[3], n),
                 parse_field(cells[4], n), parse_field(cells[5], n)};
    e.alpha_p = parse_field(cells[6], n);
    e.alpha_d = parse_field(cells[7], n);
    e.gamma = parse_field(cells[8], n);
    e.kappa_raw = parse_field(cells[9], n);
    e.kappa_precond = parse_field(cells[10], n);
    trace.push_back(e);
  }
  return trace;
}

void write_gradcond_data(std::ostream& out, const ConvergenceTrace& trace) {
  out << "# iteration gradcond\n";
  for (const auto& e : trace) out << e.iteration << ' ' << format_double(e.metrics.gradcond) << '\n';
}

}  // namespace qopf
