#include "flcs/io.hpp"

#include "flcs/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace flcs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::io, "cannot create output directory '" + dir.string() + "'");
  }
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + file.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& file) {
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write to '" + file.string() + "' failed");
}

std::string number(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

void write_array(const FieldGrid& field, const std::vector<double>& values, const fs::path& file) {
  std::ofstream out = open_out(file);
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Vec x = field.node(i);
    line.clear();
    for (Eigen::Index a = 0; a < x.size(); ++a) {
      line += format_double(x[a]);
      line += ',';
    }
    line += number(values[i]);
    line += '\n';
    out << line;
  }
  finish(out, file);
}

double parse_number(std::string_view s, const fs::path& file, long line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw Error(ErrorCode::parse, file.string() + ":" + std::to_string(line) + ": bad number '" + tmp + "'");
  }
  return v;
}

std::vector<double> read_array(const fs::path& file, std::size_t expected) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + file.string() + "'");
  std::vector<double> values;
  values.reserve(expected);
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    values.push_back(parse_number(std::string_view(line).substr(comma == std::string::npos ? 0 : comma + 1), file, n));
  }
  if (values.size() != expected) {
    throw Error(ErrorCode::parse, file.string() + ": expected " + std::to_string(expected) + " rows, found " +
                                      std::to_string(values.size()));
  }
  return values;
}

json load_json(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + file.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, file.string() + ": " + e.what());
  }
}

// NaN has no JSON spelling; null stands in for it.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double from_json_number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::vector<long> encode_mask(const std::vector<std::uint8_t>& valid) {
  std::vector<long> runs;
  std::uint8_t current = 1;
  long count = 0;
  for (std::uint8_t v : valid) {
    const std::uint8_t b = v ? 1 : 0;
    if (b != current) {
      runs.push_back(count);
      current = b;
      count = 0;
    }
    ++count;
  }
  runs.push_back(count);
  return runs;
}

std::vector<std::uint8_t> decode_mask(const std::vector<long>& runs) {
  std::vector<std::uint8_t> valid;
  std::uint8_t current = 1;
  for (long r : runs) {
    if (r < 0) throw Error(ErrorCode::parse, "negative run length in mask");
    valid.insert(valid.end(), static_cast<std::size_t>(r), current);
    current ^= 1;
  }
  return valid;
}

void write_field(const FieldGrid& field, const fs::path& dir) {
  field.validate();
  ensure_dir(dir);
  write_array(field, field.lambda1, dir / "lambda1.csv");
  write_array(field, field.ftle, dir / "ftle.csv");
  write_array(field, field.gap, dir / "gap.csv");
  for (std::size_t k = 0; k < field.xi1.size(); ++k) {
    write_array(field, field.xi1[k], dir / ("xi1_" + std::to_string(k) + ".csv"));
  }

  json meta;
  json lo = json::array(), hi = json::array(), periodic = json::array();
  for (int a = 0; a < field.window.dim; ++a) {
    lo.push_back(field.window.bounds[a].lo);
    hi.push_back(field.window.bounds[a].hi);
    periodic.push_back(static_cast<bool>(field.window.periodic[a]));
  }
  meta["window"] = {{"lo", lo}, {"hi", hi}, {"periodic", periodic}};
  meta["resolution"] = field.resolution;
  meta["t0"] = field.t0;
  meta["T"] = field.duration;
  meta["regime"] = std::string(to_string(field.regime));
  meta["config_hash"] = field.config_hash;
  meta["invalid_mask_rle"] = encode_mask(field.valid);
  meta["invalid_count"] = field.invalid_count;
  meta["coverage_warning"] = field.coverage_warning;
  meta["finsler_fallbacks"] = field.finsler_fallbacks;
  meta["max_commutation_defect"] = field.max_commutation_defect;
  meta["max_asymmetry"] = field.max_asymmetry;
  write_text(dir, "meta.json", meta.dump(2) + "\n");
}

FieldGrid read_field(const fs::path& dir) {
  const json meta = load_json(dir / "meta.json");
  FieldGrid f;
  try {
    std::vector<Interval> bounds;
    const auto lo = meta.at("window").at("lo").get<std::vector<double>>();
    const auto hi = meta.at("window").at("hi").get<std::vector<double>>();
    const auto periodic = meta.at("window").at("periodic").get<std::vector<bool>>();
    for (std::size_t a = 0; a < lo.size(); ++a) bounds.push_back({lo.at(a), hi.at(a)});
    f.window = make_chart(std::move(bounds), periodic);
    f.resolution = meta.at("resolution").get<std::vector<int>>();
    f.t0 = meta.at("t0").get<double>();
    f.duration = meta.at("T").get<double>();
    f.regime = regime_from_string(meta.at("regime").get<std::string>());
    f.config_hash = meta.at("config_hash").get<std::string>();
    f.valid = decode_mask(meta.at("invalid_mask_rle").get<std::vector<long>>());
    f.invalid_count = meta.at("invalid_count").get<long>();
    f.coverage_warning = meta.at("coverage_warning").get<bool>();
    f.finsler_fallbacks = meta.at("finsler_fallbacks").get<long>();
    f.max_commutation_defect = meta.at("max_commutation_defect").get<double>();
    f.max_asymmetry = meta.at("max_asymmetry").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, (dir / "meta.json").string() + ": " + e.what());
  }
  std::size_t n = 1;
  for (int r : f.resolution) n *= static_cast<std::size_t>(r);
  f.lambda1 = read_array(dir / "lambda1.csv", n);
  f.ftle = read_array(dir / "ftle.csv", n);
  f.gap = read_array(dir / "gap.csv", n);
  for (int k = 0; k < f.window.dim; ++k) f.xi1.push_back(read_array(dir / ("xi1_" + std::to_string(k) + ".csv"), n));
  f.validate();
  return f;
}

void write_ridges(const RidgeSet& ridges, const fs::path& dir, const std::string& stem) {
  ensure_dir(dir);
  json j;
  j["mode"] = std::string(to_string(ridges.mode));
  j["level"] = finite_or_null(ridges.level);
  j["polylines"] = json::array();
  for (const auto& line : ridges.polylines) {
    json pts = json::array();
    for (const auto& p : line.points) {
      pts.push_back({{"x", p.x}, {"y", p.y}, {"lambda1", finite_or_null(p.lambda1)}, {"nx", finite_or_null(p.nx)},
                     {"ny", finite_or_null(p.ny)}, {"xi_x", finite_or_null(p.xi_x)}, {"xi_y", finite_or_null(p.xi_y)},
                     {"angle", finite_or_null(p.angle)}, {"gap", finite_or_null(p.gap)}});
    }
    j["polylines"].push_back({{"closed", line.closed}, {"points", std::move(pts)}});
  }
  write_text(dir, stem + ".json", j.dump(1) + "\n");

  std::ostringstream csv;
  csv << "polyline,x,y,lambda1,angle\n";
  for (std::size_t i = 0; i < ridges.polylines.size(); ++i) {
    for (const auto& p : ridges.polylines[i].points) {
      csv << i << ',' << format_double(p.x) << ',' << format_double(p.y) << ',' << number(p.lambda1) << ','
          << number(p.angle) << '\n';
    }
  }
  write_text(dir, stem + ".csv", csv.str());
}

RidgeSet read_ridges(const fs::path& json_file) {
  const json j = load_json(json_file);
  RidgeSet r;
  try {
    r.mode = extraction_mode_from_string(j.at("mode").get<std::string>());
    r.level = from_json_number(j.at("level"));
    for (const auto& jl : j.at("polylines")) {
      Polyline line;
      line.closed = jl.at("closed").get<bool>();
      for (const auto& jp : jl.at("points")) {
        RidgePoint p;
        p.x = jp.at("x").get<double>();
        p.y = jp.at("y").get<double>();
        p.lambda1 = from_json_number(jp.at("lambda1"));
        p.nx = from_json_number(jp.at("nx"));
        p.ny = from_json_number(jp.at("ny"));
        p.xi_x = from_json_number(jp.at("xi_x"));
        p.xi_y = from_json_number(jp.at("xi_y"));
        p.angle = from_json_number(jp.at("angle"));
        p.gap = from_json_number(jp.at("gap"));
        line.points.push_back(p);
      }
      r.polylines.push_back(std::move(line));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, json_file.string() + ": " + e.what());
  }
  return r;
}

void write_text(const fs::path& dir, const std::string& name, const std::string& text) {
  ensure_dir(dir);
  const fs::path file = dir / name;
  std::ofstream out = open_out(file);
  out << text;
  finish(out, file);
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + file.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace flcs
