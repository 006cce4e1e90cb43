#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "qopf/errors.hpp"
#include "qopf/network_model.hpp"

namespace qopf {
namespace {

using Row = std::vector<double>;

struct RawTable {
  std::vector<Row> rows;
  std::vector<std::string> where;  // location of each row for diagnostics
};

struct RawCase {
  std::string name;
  std::optional<double> base_mva;
  RawTable bus, gen, branch, gencost, angle_bounds;
};

// MATPOWER column indices.
namespace col {
constexpr std::size_t kBusI = 0, kBusType = 1, kPd = 2, kQd = 3, kGs = 4,
                      kBs = 5, kVm = 7, kVa = 8, kVmax = 11, kVmin = 12;
constexpr std::size_t kBusCols = 13;
constexpr std::size_t kGenBus = 0, kPg = 1, kQg = 2, kQmax = 3, kQmin = 4,
                      kGenStatus = 7, kPmax = 8, kPmin = 9;
constexpr std::size_t kGenCols = 10;
constexpr std::size_t kFBus = 0, kTBus = 1, kR = 2, kX = 3, kB = 4,
                      kRateA = 5, kTap = 8, kShift = 9, kBrStatus = 10;
constexpr std::size_t kBranchCols = 11;
constexpr std::size_t kModel = 0, kNcost = 3, kCost = 4;
}  // namespace col

void require_columns(const RawTable& t, std::size_t i, std::size_t n,
                     const char* table) {
  if (t.rows[i].size() < n) {
    throw ParseError(t.where[i], std::string(table) + " row needs at least " +
                                     std::to_string(n) + " columns, got " +
                                     std::to_string(t.rows[i].size()));
  }
}

int as_int(double v, const std::string& where, const char* field) {
  if (std::nearbyint(v) != v) {
    throw ParseError(where, std::string(field) + " must be an integer");
  }
  return static_cast<int>(v);
}

PowerCase build_case(const RawCase& raw) {
  if (!raw.base_mva) throw ParseError("", "missing baseMVA");
  if (raw.bus.rows.empty()) throw ParseError("", "missing or empty bus table");
  if (raw.gen.rows.empty()) throw ParseError("", "missing or empty gen table");
  if (raw.gencost.rows.size() < raw.gen.rows.size()) {
    throw ParseError("", "gencost needs one row per generator");
  }

  PowerCase pc;
  pc.name = raw.name;
  pc.base_mva = *raw.base_mva;
  if (!(pc.base_mva > 0.0)) throw ParseError("baseMVA", "must be positive");
  const double base = pc.base_mva;

  for (std::size_t i = 0; i < raw.bus.rows.size(); ++i) {
    require_columns(raw.bus, i, col::kBusCols, "bus");
    const auto& r = raw.bus.rows[i];
    const auto& w = raw.bus.where[i];
    BusRecord b;
    b.id = as_int(r[col::kBusI], w, "bus id");
    const int type = as_int(r[col::kBusType], w, "bus type");
    if (type < 1 || type > 3) {
      throw ParseError(w, "unsupported bus type " + std::to_string(type));
    }
    b.type = static_cast<BusType>(type);
    b.pd = r[col::kPd] / base;
    b.qd = r[col::kQd] / base;
    b.gs = r[col::kGs] / base;
    b.bs = r[col::kBs] / base;
    b.vm0 = r[col::kVm];
    b.va0 = r[col::kVa];
    b.vmax = r[col::kVmax];
    b.vmin = r[col::kVmin];
    pc.buses.push_back(b);
  }

  for (std::size_t i = 0; i < raw.angle_bounds.rows.size(); ++i) {
    const auto& r = raw.angle_bounds.rows[i];
    const auto& w = raw.angle_bounds.where[i];
    if (r.size() != 3) {
      throw ParseError(w, "angle_bounds rows are [bus, min_deg, max_deg]");
    }
    const int id = as_int(r[0], w, "bus id");
    auto it = std::find_if(pc.buses.begin(), pc.buses.end(),
                           [id](const BusRecord& b) { return b.id == id; });
    if (it == pc.buses.end()) {
      throw ParseError(w, "angle bound for unknown bus " + std::to_string(id));
    }
    it->va_min = r[1];
    it->va_max = r[2];
  }

  for (std::size_t i = 0; i < raw.gen.rows.size(); ++i) {
    require_columns(raw.gen, i, col::kGenCols, "gen");
    const auto& r = raw.gen.rows[i];
    const auto& w = raw.gen.where[i];
    const auto& cr = raw.gencost.rows[i];
    const auto& cw = raw.gencost.where[i];
    if (cr.size() < col::kCost) {
      throw ParseError(cw, "gencost row is too short");
    }
    const int model = as_int(cr[col::kModel], cw, "cost model");
    if (model == 1) {
      throw ParseError(cw, "piecewise-linear costs are not supported");
    }
    if (model != 2) {
      throw ParseError(cw, "unknown cost model " + std::to_string(model));
    }
    const int ncost = as_int(cr[col::kNcost], cw, "NCOST");
    if (ncost < 1 || cr.size() < col::kCost + static_cast<std::size_t>(ncost)) {
      throw ParseError(cw, "polynomial cost needs NCOST >= 1 coefficients");
    }

    if (r[col::kGenStatus] <= 0.0) continue;

    GeneratorRecord g;
    g.bus = as_int(r[col::kGenBus], w, "generator bus");
    g.pg0 = r[col::kPg] / base;
    g.qg0 = r[col::kQg] / base;
    g.qmax = r[col::kQmax] / base;
    g.qmin = r[col::kQmin] / base;
    g.pmax = r[col::kPmax] / base;
    g.pmin = r[col::kPmin] / base;

    CostCurve c;
    c.generator = pc.generators.size();
    c.coefficients.assign(cr.begin() + col::kCost,
                          cr.begin() + col::kCost + ncost);
    pc.generators.push_back(g);
    pc.costs.push_back(std::move(c));
  }

  for (std::size_t i = 0; i < raw.branch.rows.size(); ++i) {
    require_columns(raw.branch, i, col::kBranchCols, "branch");
    const auto& r = raw.branch.rows[i];
    const auto& w = raw.branch.where[i];
    if (r[col::kBrStatus] <= 0.0) continue;
    BranchRecord br;
    br.from = as_int(r[col::kFBus], w, "from bus");
    br.to = as_int(r[col::kTBus], w, "to bus");
    br.r = r[col::kR];
    br.x = r[col::kX];
    br.b_charging = r[col::kB];
    br.smax = r[col::kRateA] / base;
    br.tap = r[col::kTap] == 0.0 ? 1.0 : r[col::kTap];
    br.shift = r[col::kShift];
    pc.branches.push_back(br);
  }

  try {
    pc.validate();
  } catch (const CaseError& e) {
    throw ParseError("", e.what());
  }
  return pc;
}

// ---------------------------------------------------------------- JSON

RawTable json_table(const nlohmann::json& doc, const char* key, bool required) {
  RawTable t;
  if (!doc.contains(key)) {
    if (required) throw ParseError(key, "missing required key");
    return t;
  }
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw ParseError(key, "expected an array of rows");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    if (!arr[i].is_array()) throw ParseError(where, "expected a numeric row");
    Row row;
    for (std::size_t j = 0; j < arr[i].size(); ++j) {
      const auto& v = arr[i][j];
      if (!v.is_number()) {
        throw ParseError(where + "[" + std::to_string(j) + "]",
                         "expected a number");
      }
      row.push_back(v.get<double>());
    }
    t.rows.push_back(std::move(row));
    t.where.push_back(where);
  }
  return t;
}

RawCase parse_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError("line " + std::to_string(line), "invalid JSON");
  }
  if (!doc.is_object()) throw ParseError("", "case must be a JSON object");

  RawCase raw;
  if (doc.contains("name") && doc["name"].is_string()) raw.name = doc["name"];
  if (!doc.contains("baseMVA")) throw ParseError("baseMVA", "missing required key");
  if (!doc["baseMVA"].is_number()) throw ParseError("baseMVA", "expected a number");
  raw.base_mva = doc["baseMVA"].get<double>();
  raw.bus = json_table(doc, "bus", true);
  raw.gen = json_table(doc, "gen", true);
  raw.branch = json_table(doc, "branch", true);
  raw.gencost = json_table(doc, "gencost", true);
  raw.angle_bounds = json_table(doc, "angle_bounds", false);
  return raw;
}

// ------------------------------------------------------------ MATPOWER .m

std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') in_quote = !in_quote;
    if (line[i] == '%' && !in_quote) return line.substr(0, i);
  }
  return line;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Row parse_numeric_row(const std::string& body, const std::string& where) {
  Row row;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) {
      throw ParseError(where, "non-numeric entry '" + token + "'");
    }
    if (token == "Inf" || token == "inf") v = std::numeric_limits<double>::infinity();
    row.push_back(v);
    token.clear();
  };
  for (char ch : body) {
    if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\r') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return row;
}

RawCase parse_matpower(const std::string& text) {
  RawCase raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_statement = false;

  RawTable* open = nullptr;
  RawTable ignored;

  auto table_for = [&](const std::string& field) -> RawTable* {
    if (field == "bus") return &raw.bus;
    if (field == "gen") return &raw.gen;
    if (field == "branch") return &raw.branch;
    if (field == "gencost") return &raw.gencost;
    return &ignored;
  };

  // Feed one chunk of matrix body; rows end at ';' or end of line.
  auto consume_rows = [&](std::string body, int at) {
    std::size_t start = 0;
    while (start <= body.size()) {
      auto semi = body.find(';', start);
      std::string piece = body.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
      const std::string where = "line " + std::to_string(at);
      if (!trim(piece).empty()) {
        open->rows.push_back(parse_numeric_row(piece, where));
        open->where.push_back(where);
      }
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;

    if (open != nullptr) {
      const auto close = s.find(']');
      consume_rows(s.substr(0, close), lineno);
      if (close != std::string::npos) open = nullptr;
      continue;
    }

    if (s.rfind("function", 0) == 0) {
      saw_statement = true;
      continue;
    }
    if (s.rfind("mpc.", 0) != 0) {
      throw ParseError("line " + std::to_string(lineno),
                       "expected 'mpc.<field> = ...'");
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno), "missing '='");
    }
    saw_statement = true;
    const std::string field = trim(s.substr(4, eq - 4));
    std::string rhs = trim(s.substr(eq + 1));

    if (field == "baseMVA") {
      if (!rhs.empty() && rhs.back() == ';') rhs.pop_back();
      const auto vals = parse_numeric_row(rhs, "line " + std::to_string(lineno));
      if (vals.size() != 1) {
        throw ParseError("line " + std::to_string(lineno), "baseMVA must be a scalar");
      }
      raw.base_mva = vals[0];
      continue;
    }
    if (rhs.empty() || rhs.front() != '[') {
      // version strings, cell arrays and other fields are not needed
      if (table_for(field) != &ignored) {
        throw ParseError("line " + std::to_string(lineno),
                         "mpc." + field + " must be a numeric matrix literal");
      }
      continue;
    }
    open = table_for(field);
    rhs = rhs.substr(1);
    const auto close = rhs.find(']');
    consume_rows(rhs.substr(0, close), lineno);
    if (close != std::string::npos) open = nullptr;
  }
  if (open != nullptr) {
    throw ParseError("line " + std::to_string(lineno), "unterminated matrix literal");
  }
  if (!saw_statement) throw ParseError("line 1", "empty case file");
  return raw;
}

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PowerCase parse_case(std::string_view text, CaseFormat format) {
  const std::string body(text);
  if (trim(body).empty()) throw ParseError("line 1", "empty input");
  return build_case(format == CaseFormat::Json ? parse_json(body)
                                               : parse_matpower(body));
}

PowerCase parse_case(std::istream& in, CaseFormat format) {
  return parse_case(slurp(in), format);
}

PowerCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open case file " + path.string());
  const auto ext = path.extension().string();
  CaseFormat format;
  if (ext == ".json") {
    format = CaseFormat::Json;
  } else if (ext == ".m") {
    format = CaseFormat::Matpower;
  } else {
    throw OptionError("unrecognised case extension '" + ext + "' (expected .json or .m)");
  }
  auto pc = parse_case(in, format);
  if (pc.name.empty()) pc.name = path.stem().string();
  return pc;
}

std::string to_json(const PowerCase& pc) {
  const double base = pc.base_mva;
  nlohmann::json doc;
  doc["name"] = pc.name;
  doc["baseMVA"] = base;
  doc["bus"] = nlohmann::json::array();
  nlohmann::json angle = nlohmann::json::array();
  for (const auto& b : pc.buses) {
    doc["bus"].push_back({b.id, static_cast<int>(b.type), b.pd * base,
                          b.qd * base, b.gs * base, b.bs * base, 1, b.vm0,
                          b.va0, 0, 1, b.vmax, b.vmin});
    if (b.va_min || b.va_max) {
      angle.push_back({b.id, b.va_min.value_or(-360.0), b.va_max.value_or(360.0)});
    }
  }
  if (!angle.empty()) doc["angle_bounds"] = angle;
  doc["gen"] = nlohmann::json::array();
  for (const auto& g : pc.generators) {
    doc["gen"].push_back({g.bus, g.pg0 * base, g.qg0 * base, g.qmax * base,
                          g.qmin * base, 1.0, base, 1, g.pmax * base,
                          g.pmin * base});
  }
  doc["branch"] = nlohmann::json::array();
  for (const auto& br : pc.branches) {
    doc["branch"].push_back({br.from, br.to, br.r, br.x, br.b_charging,
                             br.smax * base, 0, 0, br.tap, br.shift, 1, -360,
                             360});
  }
  doc["gencost"] = nlohmann::json::array();
  for (const auto& c : pc.costs) {
    nlohmann::json row = {2, 0, 0, c.coefficients.size()};
    for (double v : c.coefficients) row.push_back(v);
    doc["gencost"].push_back(row);
  }
  return doc.dump(1);
}

}  // namespace qopf
