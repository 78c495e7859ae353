#include "xychain/sweep.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "xychain/error.hpp"
#include "xychain/fisher.hpp"
#include "xychain/multiparam.hpp"
#include "xychain/parallel.hpp"

namespace xychain {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidArgument, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

bool has(const std::vector<Quantity>& qs, Quantity q) {
  for (Quantity x : qs) {
    if (x == q) return true;
  }
  return false;
}

std::string clean_message(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

// Values in the same order as sweep_columns.
std::vector<double> evaluate(const SweepSpec& spec, const ChainParams& p) {
  std::vector<double> v;
  const bool per_param = has(spec.quantities, Quantity::F) || has(spec.quantities, Quantity::H) ||
                         has(spec.quantities, Quantity::S);
  if (per_param) {
    std::vector<FisherPoint> fps;
    for (Param w : spec.wrt) fps.push_back(fisher_point(p, w, spec.quad));
    for (Quantity q : {Quantity::F, Quantity::H, Quantity::S}) {
      if (!has(spec.quantities, q)) continue;
      for (const FisherPoint& fp : fps) {
        v.push_back(q == Quantity::F ? fp.F : q == Quantity::H ? fp.H : fp.S.value);
      }
    }
  }
  const bool multi = has(spec.quantities, Quantity::QFIM) || has(spec.quantities, Quantity::U) ||
                     has(spec.quantities, Quantity::det);
  if (multi) {
    const MultiparamPoint mp = multiparam_point(p, spec.quad);
    if (has(spec.quantities, Quantity::QFIM)) {
      for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) v.push_back(mp.qfim.H(a, b));
      }
    }
    if (has(spec.quantities, Quantity::U)) {
      for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) v.push_back(std::abs(mp.uhlmann.U(a, b)));
      }
    }
    if (has(spec.quantities, Quantity::det)) {
      v.push_back(mp.sloppiness.det);
      v.push_back(mp.sloppiness.relative_det);
      v.push_back(mp.sloppiness.condition);
    }
  }
  return v;
}

}  // namespace

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::F: return "F";
    case Quantity::H: return "H";
    case Quantity::S: return "S";
    case Quantity::QFIM: return "QFIM";
    case Quantity::U: return "U";
    case Quantity::det: return "det";
  }
  return "?";
}

std::optional<Quantity> parse_quantity(std::string_view name) {
  for (Quantity q : {Quantity::F, Quantity::H, Quantity::S, Quantity::QFIM, Quantity::U, Quantity::det}) {
    if (name == to_string(q)) return q;
  }
  return std::nullopt;
}

double Range::at(std::size_t i) const {
  if (i + 1 == points) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
}

Range parse_range(std::string_view text) {
  const std::size_t a = text.find(':');
  const std::size_t b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos) throw Error(ErrorKind::InvalidArgument, "range must look like lo:hi:n");
  Range r;
  r.lo = parse_number(text.substr(0, a));
  r.hi = parse_number(text.substr(a + 1, b - a - 1));
  const std::string_view n = text.substr(b + 1);
  std::size_t points = 0;
  const auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), points);
  if (ec != std::errc{} || ptr != n.data() + n.size()) {
    throw Error(ErrorKind::InvalidArgument, "range point count must be a positive integer");
  }
  r.points = points;
  if (points < 2) throw Error(ErrorKind::InvalidArgument, "range needs at least 2 points");
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi)) {
    throw Error(ErrorKind::InvalidArgument, "range bounds must be finite with lo < hi");
  }
  return r;
}

void validate(const SweepSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (spec.range.points < 2) fail("a sweep needs at least 2 points");
  if (!std::isfinite(spec.range.lo) || !std::isfinite(spec.range.hi)) fail("sweep range must be finite");
  if (spec.quantities.empty()) fail("no quantities requested");
  const bool per_param = has(spec.quantities, Quantity::F) || has(spec.quantities, Quantity::H) ||
                         has(spec.quantities, Quantity::S);
  if (per_param && spec.wrt.empty()) fail("F, H and S need at least one wrt parameter");
  validate(with(spec.fixed, spec.axis, spec.range.lo));
  validate(with(spec.fixed, spec.axis, spec.range.hi));
  validate(spec.quad);
}

std::vector<std::string> sweep_columns(const SweepSpec& spec) {
  std::vector<std::string> cols;
  for (Quantity q : {Quantity::F, Quantity::H, Quantity::S}) {
    if (!has(spec.quantities, q)) continue;
    for (Param w : spec.wrt) cols.push_back(std::string(to_string(q)) + "_" + std::string(to_string(w)));
  }
  if (has(spec.quantities, Quantity::QFIM)) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a; b < 3; ++b) {
        cols.push_back("H_" + std::string(to_string(kAllParams[a])) + "_" + std::string(to_string(kAllParams[b])));
      }
    }
  }
  if (has(spec.quantities, Quantity::U)) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        cols.push_back("U_" + std::string(to_string(kAllParams[a])) + "_" + std::string(to_string(kAllParams[b])));
      }
    }
  }
  if (has(spec.quantities, Quantity::det)) {
    cols.insert(cols.end(), {"det", "det_relative", "eig_ratio"});
  }
  return cols;
}

std::size_t SweepTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw Error(ErrorKind::InvalidArgument, "no column named '" + std::string(name) + "'");
}

std::vector<double> SweepTable::series(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const SweepRow& r : rows) out.push_back(r.values[c]);
  return out;
}

std::vector<double> SweepTable::axis_values() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const SweepRow& r : rows) out.push_back(get(r.params, spec.axis));
  return out;
}

SweepTable sweep(const SweepSpec& spec) {
  validate(spec);
  SweepTable table;
  table.spec = spec;
  table.columns = sweep_columns(spec);
  table.rows.resize(spec.range.points);

  for (std::size_t i = 0; i < spec.range.points; ++i) {
    SweepRow& row = table.rows[i];
    row.params = with(spec.fixed, spec.axis, spec.range.at(i));
    if (std::abs(row.params.J) == 1.0) {
      row.params.J = std::copysign(1.0 - kCriticalNudge, row.params.J);
      row.nudged = true;
      char buf[128];
      std::snprintf(buf, sizeof buf, "point %zu: |J| = 1 is critical, evaluated at J = %.17g", i, row.params.J);
      table.warnings.emplace_back(buf);
    }
  }

  parallel_for(
      table.rows.size(),
      [&](std::size_t i) {
        SweepRow& row = table.rows[i];
        try {
          row.values = evaluate(spec, row.params);
        } catch (const std::exception& e) {
          row.values.assign(table.columns.size(), kNaN);
          row.error = clean_message(e.what());
        }
      },
      spec.threads);
  return table;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const SweepTable& table) {
  std::string out = "J,gamma,D";
  for (const std::string& c : table.columns) out += "," + c;
  out += ",nudged,error\n";
  for (const SweepRow& r : table.rows) {
    out += format_double(r.params.J) + "," + format_double(r.params.gamma) + "," + format_double(r.params.D);
    for (double v : r.values) out += "," + format_double(v);
    out += r.nudged ? ",1," : ",0,";
    out += r.error;
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json spec_to_json(const SweepSpec& spec) {
  nlohmann::ordered_json j;
  j["axis"] = std::string(to_string(spec.axis));
  j["range"] = {{"lo", spec.range.lo}, {"hi", spec.range.hi}, {"points", spec.range.points}};
  j["fixed"] = {{"J", spec.fixed.J}, {"gamma", spec.fixed.gamma}, {"D", spec.fixed.D}};
  auto qs = nlohmann::ordered_json::array();
  for (Quantity q : spec.quantities) qs.push_back(std::string(to_string(q)));
  j["quantities"] = qs;
  auto ws = nlohmann::ordered_json::array();
  for (Param w : spec.wrt) ws.push_back(std::string(to_string(w)));
  j["wrt"] = ws;
  j["quadrature"] = {{"abs_tol", spec.quad.abs_tol},
                     {"rel_tol", spec.quad.rel_tol},
                     {"max_subdivisions", spec.quad.max_subdivisions}};
  return j;
}

nlohmann::ordered_json to_json(const SweepTable& table) {
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["spec"] = spec_to_json(table.spec);
  auto cols = nlohmann::ordered_json::array({"J", "gamma", "D"});
  for (const std::string& c : table.columns) cols.push_back(c);
  j["columns"] = cols;
  auto rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : table.rows) {
    nlohmann::ordered_json row;
    auto vals = nlohmann::ordered_json::array({r.params.J, r.params.gamma, r.params.D});
    for (double v : r.values) vals.push_back(number(v));
    row["values"] = vals;
    row["nudged"] = r.nudged;
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["warnings"] = table.warnings;
  return j;
}

}  // namespace xychain
