#include "flcs/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

namespace flcs {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const AnalysisConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_config(config))));
  return buf;
}

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry, std::less<>>;

const std::set<std::string, std::less<>> kSections = {"manifold", "metric", "flow", "time",
                                                      "grid", "integrator", "extraction", "output"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(std::string_view line) {
  const auto pos = line.find_first_of("#;");
  return trim(pos == std::string_view::npos ? line : line.substr(0, pos));
}

class Reader {
 public:
  explicit Reader(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::string current;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string s = strip_comment(raw);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ParseError(line, "", "malformed section header");
        current = trim(std::string_view(s).substr(1, s.size() - 2));
        if (!kSections.contains(current)) throw ParseError(line, current, "unknown section");
        section_lines_[current] = line;
        sections_[current];
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError(line, "", "expected 'key = value'");
      const std::string key = trim(std::string_view(s).substr(0, eq));
      const std::string value = trim(std::string_view(s).substr(eq + 1));
      if (current.empty()) throw ParseError(line, key, "key outside of any section");
      if (key.empty()) throw ParseError(line, "", "empty key");
      auto& sec = sections_[current];
      if (sec.contains(key)) throw ParseError(line, key, "duplicate key");
      sec[key] = Entry{value, line, false};
    }
    last_line_ = line;
  }

  bool has(std::string_view section, std::string_view key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.contains(key);
  }

  Entry& get(std::string_view section, std::string_view key) {
    auto& e = sections_.find(section)->second.find(key)->second;
    e.used = true;
    return e;
  }

  Entry& require(std::string_view section, std::string_view key) {
    if (!has(section, key)) {
      const auto it = section_lines_.find(section);
      const int line = it == section_lines_.end() ? last_line_ : it->second;
      throw ParseError(line, std::string(section) + "." + std::string(key), "missing required key");
    }
    return get(section, key);
  }

  /// Remaining unconsumed keys of a section, in file order of appearance by key name.
  std::vector<std::pair<std::string, Entry*>> unused(std::string_view section) {
    std::vector<std::pair<std::string, Entry*>> out;
    const auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (auto& [k, e] : it->second) {
      if (!e.used) out.emplace_back(k, &e);
    }
    return out;
  }

  void reject_leftovers() {
    for (auto& [name, sec] : sections_) {
      for (auto& [k, e] : sec) {
        if (!e.used) throw ParseError(e.line, k, "unknown key in [" + name + "]");
      }
    }
  }

 private:
  std::map<std::string, Section, std::less<>> sections_;
  std::map<std::string, int, std::less<>> section_lines_;
  int last_line_ = 0;
};

double to_double(const Entry& e, std::string_view key) {
  const std::string s = trim(e.value);
  if (s.empty()) throw ParseError(e.line, std::string(key), "expected a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(e.line, std::string(key), "expected a finite number, got '" + s + "'");
  }
  return v;
}

std::vector<double> to_doubles(const Entry& e, std::string_view key) {
  std::vector<double> out;
  std::string_view rest = e.value;
  for (;;) {
    const auto comma = rest.find(',');
    Entry part{std::string(rest.substr(0, comma)), e.line, true};
    out.push_back(to_double(part, key));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

long to_integer(const Entry& e, std::string_view key) {
  const double v = to_double(e, key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ParseError(e.line, std::string(key), "expected an integer");
  return static_cast<long>(v);
}

template <typename Fn>
auto convert(const Entry& e, std::string_view key, Fn&& fn) {
  try {
    return fn(e.value);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& err) {
    throw ParseError(e.line, std::string(key), err.what());
  }
}

void check(bool ok, const Entry& e, std::string_view key, const std::string& message) {
  if (!ok) throw ParseError(e.line, std::string(key), message);
}

}  // namespace

AnalysisConfig parse_config(std::string_view text) {
  Reader r(text);
  AnalysisConfig c;

  // [manifold]
  {
    Entry& id = r.require("manifold", "id");
    c.manifold = id.value;
    const Params defaults = convert(id, "id", [](const std::string& v) { return manifold_defaults(v); });
    for (auto& [key, e] : r.unused("manifold")) {
      check(defaults.contains(key), *e, key, "unknown key in [manifold]");
      e->used = true;
      c.manifold_params[key] = to_double(*e, key);
    }
    for (const auto& [key, value] : defaults) c.manifold_params.try_emplace(key, value);
  }
  const Manifold manifold = make_manifold(c.manifold, c.manifold_params);
  const int dim = manifold.chart.dim;

  // [metric]
  c.regime = manifold.default_regime;
  if (r.has("metric", "regime")) {
    Entry& e = r.get("metric", "regime");
    c.regime = convert(e, "regime", [](const std::string& v) { return regime_from_string(v); });
    if (c.regime == Regime::hypercomplex) {
      check(manifold.structure.has_value(), e, "regime", "manifold '" + c.manifold + "' has no hypercomplex structure");
    }
  }
  if (r.has("metric", "randers_b")) {
    Entry& e = r.get("metric", "randers_b");
    c.randers_b = to_doubles(e, "randers_b");
    check(static_cast<int>(c.randers_b.size()) == dim, e, "randers_b", "randers_b needs one entry per chart axis");
    double n2 = 0.0;
    for (double b : c.randers_b) n2 += b * b;
    check(n2 < 1.0, e, "randers_b", "randers_b must have norm < 1");
  } else if (c.regime == Regime::finsler) {
    if (manifold.default_randers_b) {
      c.randers_b.assign(manifold.default_randers_b->data(),
                         manifold.default_randers_b->data() + manifold.default_randers_b->size());
    } else {
      c.randers_b.assign(dim, 0.0);
    }
  }
  if (r.has("metric", "structure")) {
    Entry& e = r.get("metric", "structure");
    check(e.value == "standard", e, "structure", "unknown hypercomplex structure '" + e.value + "'");
    c.structure = e.value;
  }
  if (r.has("metric", "metric_eval")) {
    Entry& e = r.get("metric", "metric_eval");
    c.metric_eval = convert(e, "metric_eval", [](const std::string& v) { return metric_eval_from_string(v); });
  }
  if (r.has("metric", "finsler_fallback")) {
    Entry& e = r.get("metric", "finsler_fallback");
    c.finsler_fallback = to_doubles(e, "finsler_fallback");
    check(static_cast<int>(c.finsler_fallback.size()) == dim, e, "finsler_fallback",
          "finsler_fallback needs one entry per chart axis");
    double n2 = 0.0;
    for (double v : c.finsler_fallback) n2 += v * v;
    check(n2 > 0.0, e, "finsler_fallback", "finsler_fallback must be nonzero");
  } else {
    c.finsler_fallback.assign(dim, 0.0);
    c.finsler_fallback[0] = 1.0;
  }

  // [flow]
  {
    Entry& id = r.require("flow", "id");
    c.flow = id.value;
    const Params defaults = convert(id, "id", [](const std::string& v) { return field_defaults(v); });
    for (auto& [key, e] : r.unused("flow")) {
      check(defaults.contains(key), *e, key, "unknown key in [flow]");
      e->used = true;
      c.flow_params[key] = to_double(*e, key);
    }
    for (const auto& [key, value] : defaults) c.flow_params.try_emplace(key, value);
    const VectorFieldSpec f = convert(id, "id", [&](const std::string& v) { return make_field(v, c.flow_params); });
    check(f.dim == dim, id, "id", "flow dimension " + std::to_string(f.dim) + " does not match manifold dimension " +
                                      std::to_string(dim));
  }

  // [time]
  {
    Entry& te = r.require("time", "T");
    c.duration = to_double(te, "T");
    check(c.duration != 0.0, te, "T", "T must be nonzero");
    if (r.has("time", "t0")) c.t0 = to_double(r.get("time", "t0"), "t0");
    c.offset = c.duration / 10.0;
    if (r.has("time", "delta")) {
      Entry& e = r.get("time", "delta");
      c.offset = to_double(e, "delta");
      check(c.offset != 0.0, e, "delta", "delta must be nonzero");
    }
  }

  // [grid]
  for (int a = 0; a < dim; ++a) {
    c.lo.push_back(manifold.chart.bounds[a].lo);
    c.hi.push_back(manifold.chart.bounds[a].hi);
  }
  c.resolution.assign(dim, dim <= 2 ? 64 : 8);
  if (r.has("grid", "lo")) {
    Entry& e = r.get("grid", "lo");
    c.lo = to_doubles(e, "lo");
    check(static_cast<int>(c.lo.size()) == dim, e, "lo", "lo needs one entry per chart axis");
  }
  if (r.has("grid", "hi")) {
    Entry& e = r.get("grid", "hi");
    c.hi = to_doubles(e, "hi");
    check(static_cast<int>(c.hi.size()) == dim, e, "hi", "hi needs one entry per chart axis");
  }
  {
    const int line = r.has("grid", "hi") ? r.get("grid", "hi").line : (r.has("grid", "lo") ? r.get("grid", "lo").line : 0);
    for (int a = 0; a < dim; ++a) {
      if (!(c.lo[a] < c.hi[a])) throw ParseError(line, "lo/hi", "grid window needs lo < hi on every axis");
      if (manifold.chart.periodic[a]) continue;
      const double slack = 1e-12 * manifold.chart.extent(a);
      if (c.lo[a] < manifold.chart.bounds[a].lo - slack || c.hi[a] > manifold.chart.bounds[a].hi + slack) {
        throw ParseError(line, "lo/hi", "grid window extends outside the chart");
      }
    }
  }
  if (r.has("grid", "resolution")) {
    Entry& e = r.get("grid", "resolution");
    const std::vector<double> res = to_doubles(e, "resolution");
    check(static_cast<int>(res.size()) == dim, e, "resolution", "resolution needs one entry per chart axis");
    c.resolution.clear();
    for (double v : res) {
      check(v == std::floor(v) && v >= 8 && v <= 1e5, e, "resolution", "resolution entries must be integers in [8, 100000]");
      c.resolution.push_back(static_cast<int>(v));
    }
  }

  // [integrator]
  if (r.has("integrator", "method")) {
    Entry& e = r.get("integrator", "method");
    c.integrator.method =
        convert(e, "method", [](const std::string& v) { return integrator_method_from_string(v); });
  }
  if (r.has("integrator", "step")) {
    Entry& e = r.get("integrator", "step");
    c.integrator.step = to_double(e, "step");
    check(c.integrator.step > 0.0, e, "step", "step must be > 0");
  }
  if (r.has("integrator", "abs_tol")) {
    Entry& e = r.get("integrator", "abs_tol");
    c.integrator.abs_tol = to_double(e, "abs_tol");
    check(c.integrator.abs_tol > 0.0, e, "abs_tol", "abs_tol must be > 0");
  }
  if (r.has("integrator", "rel_tol")) {
    Entry& e = r.get("integrator", "rel_tol");
    c.integrator.rel_tol = to_double(e, "rel_tol");
    check(c.integrator.rel_tol > 0.0, e, "rel_tol", "rel_tol must be > 0");
  }
  if (r.has("integrator", "max_steps")) {
    Entry& e = r.get("integrator", "max_steps");
    c.integrator.max_steps = to_integer(e, "max_steps");
    check(c.integrator.max_steps > 0, e, "max_steps", "max_steps must be > 0");
  }

  // [extraction]
  if (r.has("extraction", "quantile")) {
    Entry& e = r.get("extraction", "quantile");
    c.extraction.quantile = to_double(e, "quantile");
    check(c.extraction.quantile > 0.0 && c.extraction.quantile < 1.0, e, "quantile", "quantile out of (0,1)");
  }
  if (r.has("extraction", "min_gap")) {
    Entry& e = r.get("extraction", "min_gap");
    c.extraction.min_gap = to_double(e, "min_gap");
    check(c.extraction.min_gap >= 0.0, e, "min_gap", "min_gap must be >= 0");
  }
  if (r.has("extraction", "min_value")) {
    Entry& e = r.get("extraction", "min_value");
    c.extraction.min_value = to_double(e, "min_value");
    check(c.extraction.min_value >= 0.0, e, "min_value", "min_value must be >= 0");
  }
  if (r.has("extraction", "min_value_quantile")) {
    Entry& e = r.get("extraction", "min_value_quantile");
    c.extraction.min_value_quantile = to_double(e, "min_value_quantile");
    check(c.extraction.min_value_quantile >= 0.0 && c.extraction.min_value_quantile < 1.0, e, "min_value_quantile",
          "min_value_quantile out of [0,1)");
  }
  if (r.has("extraction", "alignment_min_rel_gap")) {
    Entry& e = r.get("extraction", "alignment_min_rel_gap");
    c.alignment_min_rel_gap = to_double(e, "alignment_min_rel_gap");
    check(c.alignment_min_rel_gap >= 0.0, e, "alignment_min_rel_gap", "alignment_min_rel_gap must be >= 0");
  }
  if (r.has("extraction", "alignment_max_median_deg")) {
    Entry& e = r.get("extraction", "alignment_max_median_deg");
    c.alignment_max_median_deg = to_double(e, "alignment_max_median_deg");
    check(c.alignment_max_median_deg > 0.0 && c.alignment_max_median_deg <= 90.0, e, "alignment_max_median_deg",
          "alignment_max_median_deg out of (0,90]");
  }

  // [output]
  if (r.has("output", "dir")) c.output_dir = r.get("output", "dir").value;

  r.reject_leftovers();
  return c;
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string serialize_config(const AnalysisConfig& c) {
  std::ostringstream o;
  o << "[manifold]\nid = " << c.manifold << "\n";
  for (const auto& [k, v] : c.manifold_params) o << k << " = " << format_double(v) << "\n";
  o << "\n[metric]\nregime = " << to_string(c.regime) << "\n";
  if (!c.randers_b.empty()) o << "randers_b = " << join(c.randers_b) << "\n";
  o << "structure = " << c.structure << "\n";
  o << "metric_eval = " << to_string(c.metric_eval) << "\n";
  o << "finsler_fallback = " << join(c.finsler_fallback) << "\n";
  o << "\n[flow]\nid = " << c.flow << "\n";
  for (const auto& [k, v] : c.flow_params) o << k << " = " << format_double(v) << "\n";
  o << "\n[time]\nt0 = " << format_double(c.t0) << "\nT = " << format_double(c.duration)
    << "\ndelta = " << format_double(c.offset) << "\n";
  std::vector<double> res(c.resolution.begin(), c.resolution.end());
  o << "\n[grid]\nlo = " << join(c.lo) << "\nhi = " << join(c.hi) << "\nresolution = " << join(res) << "\n";
  o << "\n[integrator]\nmethod = " << to_string(c.integrator.method) << "\nstep = " << format_double(c.integrator.step)
    << "\nabs_tol = " << format_double(c.integrator.abs_tol) << "\nrel_tol = " << format_double(c.integrator.rel_tol)
    << "\nmax_steps = " << c.integrator.max_steps << "\n";
  o << "\n[extraction]\nquantile = " << format_double(c.extraction.quantile)
    << "\nmin_gap = " << format_double(c.extraction.min_gap)
    << "\nmin_value = " << format_double(c.extraction.min_value)
    << "\nmin_value_quantile = " << format_double(c.extraction.min_value_quantile)
    << "\nalignment_min_rel_gap = " << format_double(c.alignment_min_rel_gap)
    << "\nalignment_max_median_deg = " << format_double(c.alignment_max_median_deg) << "\n";
  if (!c.output_dir.empty()) o << "\n[output]\ndir = " << c.output_dir << "\n";
  return o.str();
}

namespace {

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace

AnalysisSetup build_setup(const AnalysisConfig& c) {
  AnalysisSetup s;
  s.manifold = make_manifold(c.manifold, c.manifold_params);
  s.field = make_field(c.flow, c.flow_params);
  s.regime = c.regime;
  s.metric_eval = c.metric_eval;
  s.integrator = c.integrator;
  s.finsler_fallback = to_vec(c.finsler_fallback);
  if (c.regime == Regime::finsler) s.finsler = randers_norm(s.manifold.metric, to_vec(c.randers_b));
  if (c.regime == Regime::hypercomplex && !s.manifold.structure) {
    throw Error(ErrorCode::invalid_argument, "manifold '" + c.manifold + "' has no hypercomplex structure");
  }
  return s;
}

ChartDomain config_window(const AnalysisConfig& c, const ChartDomain& chart) {
  std::vector<Interval> bounds;
  for (std::size_t a = 0; a < c.lo.size(); ++a) bounds.push_back({c.lo[a], c.hi[a]});
  return make_window(chart, std::move(bounds));
}

std::string resolve_output_dir(const AnalysisConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "flcs_out";
}

}  // namespace flcs
