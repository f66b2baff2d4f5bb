#include "flcs/config.hpp"
#include "flcs/deformation.hpp"
#include "flcs/io.hpp"
#include "flcs/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace flcs;

namespace {

// Copies a flat node array into an ndarray shaped like the grid (last axis fastest).
py::array_t<double> shaped(const std::vector<double>& values, const std::vector<int>& resolution) {
  std::vector<py::ssize_t> shape(resolution.begin(), resolution.end());
  py::array_t<double> out(shape);
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<double> polyline_array(const Polyline& line) {
  py::array_t<double> out({static_cast<py::ssize_t>(line.points.size()), py::ssize_t{9}});
  auto a = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    const RidgePoint& p = line.points[static_cast<std::size_t>(i)];
    const double row[9] = {p.x, p.y, p.lambda1, p.nx, p.ny, p.xi_x, p.xi_y, p.angle, p.gap};
    for (int k = 0; k < 9; ++k) a(i, k) = row[k];
  }
  return out;
}

py::dict alignment_dict(const AlignmentReport& r) {
  py::dict d;
  d["total_points"] = r.total_points;
  d["used_points"] = r.used_points;
  d["mean"] = r.mean;
  d["median"] = r.median;
  d["p95"] = r.p95;
  d["max_median"] = r.max_median;
  d["passed"] = r.passed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FTLE fields and Lagrangian coherent structures on Riemannian, Finsler and hypercomplex manifolds.";

  static py::exception<Error> error(m, "FlcsError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<AnalysisConfig>(m, "Config")
      .def_readonly("manifold", &AnalysisConfig::manifold)
      .def_readonly("flow", &AnalysisConfig::flow)
      .def_property_readonly("regime", [](const AnalysisConfig& c) { return std::string(to_string(c.regime)); })
      .def_readonly("t0", &AnalysisConfig::t0)
      .def_readonly("duration", &AnalysisConfig::duration)
      .def_readonly("offset", &AnalysisConfig::offset)
      .def_readonly("lo", &AnalysisConfig::lo)
      .def_readonly("hi", &AnalysisConfig::hi)
      .def_readonly("resolution", &AnalysisConfig::resolution)
      .def_property_readonly("hash", [](const AnalysisConfig& c) { return config_hash(c); })
      .def("serialize", [](const AnalysisConfig& c) { return serialize_config(c); })
      .def("__eq__", [](const AnalysisConfig& a, const AnalysisConfig& b) { return a == b; });

  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));

  py::class_<FieldGrid>(m, "Field")
      .def_property_readonly("resolution", [](const FieldGrid& f) { return f.resolution; })
      .def_property_readonly("lo", [](const FieldGrid& f) {
        std::vector<double> v;
        for (const auto& b : f.window.bounds) v.push_back(b.lo);
        return v;
      })
      .def_property_readonly("hi", [](const FieldGrid& f) {
        std::vector<double> v;
        for (const auto& b : f.window.bounds) v.push_back(b.hi);
        return v;
      })
      .def_readonly("t0", &FieldGrid::t0)
      .def_readonly("duration", &FieldGrid::duration)
      .def_property_readonly("lambda1", [](const FieldGrid& f) { return shaped(f.lambda1, f.resolution); })
      .def_property_readonly("ftle", [](const FieldGrid& f) { return shaped(f.ftle, f.resolution); })
      .def_property_readonly("gap", [](const FieldGrid& f) { return shaped(f.gap, f.resolution); })
      .def_property_readonly("xi1", [](const FieldGrid& f) {
        py::list comps;
        for (const auto& c : f.xi1) comps.append(shaped(c, f.resolution));
        return comps;
      })
      .def_property_readonly("valid", [](const FieldGrid& f) {
        std::vector<double> v(f.valid.begin(), f.valid.end());
        return shaped(v, f.resolution).attr("astype")("bool");
      })
      .def_readonly("invalid_count", &FieldGrid::invalid_count)
      .def_readonly("coverage_warning", &FieldGrid::coverage_warning)
      .def_readonly("config_hash", &FieldGrid::config_hash)
      .def("node", [](const FieldGrid& f, std::size_t i) { return Vec(f.node(i)); }, py::arg("index"))
      .def("write", [](const FieldGrid& f, const std::filesystem::path& dir) { write_field(f, dir); }, py::arg("dir"));

  m.def("read_field", [](const std::filesystem::path& dir) { return read_field(dir); }, py::arg("dir"));

  py::class_<RidgeSet>(m, "RidgeSet")
      .def_property_readonly("mode", [](const RidgeSet& r) { return std::string(to_string(r.mode)); })
      .def_readonly("level", &RidgeSet::level)
      .def_property_readonly("point_count", &RidgeSet::point_count)
      .def_property_readonly(
          "polylines",
          [](const RidgeSet& r) {
            py::list out;
            for (const auto& line : r.polylines) out.append(polyline_array(line));
            return out;
          },
          "One (n, 9) array per polyline: x, y, lambda1, nx, ny, xi_x, xi_y, angle, gap.")
      .def_property_readonly("closed", [](const RidgeSet& r) {
        std::vector<bool> c;
        for (const auto& line : r.polylines) c.push_back(line.closed);
        return c;
      })
      .def("write", [](const RidgeSet& r, const std::filesystem::path& dir, const std::string& stem) {
        write_ridges(r, dir, stem);
      }, py::arg("dir"), py::arg("stem") = "ridges");

  m.def("compute_field", &run_field, py::arg("config"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("extract_level_set", &extract_level_set, py::arg("field"), py::arg("quantile") = 0.95);
  m.def("extract_ridges", py::overload_cast<const FieldGrid&, double, double>(&extract_ridges), py::arg("field"),
        py::arg("min_gap") = 0.0, py::arg("min_value") = 0.0);
  m.def("verify_alignment", [](const RidgeSet& r, double gap, double deg) {
    return alignment_dict(verify_alignment(r, gap, deg));
  }, py::arg("ridges"), py::arg("min_rel_gap") = kAlignmentMinRelGap, py::arg("max_median_deg") = kAlignmentMaxMedianDeg);
  m.def("hausdorff", [](const RidgeSet& a, const RidgeSet& b, const FieldGrid& f) { return hausdorff(a, b, f.window); },
        py::arg("a"), py::arg("b"), py::arg("field"));
  m.def("read_ridges", [](const std::filesystem::path& file) { return read_ridges(file); }, py::arg("file"));

  m.def("run_lcs", [](const AnalysisConfig& c, int threads) {
    LcsOutcome o;
    {
      py::gil_scoped_release release;
      o = run_lcs(c, threads);
    }
    py::dict d;
    d["field"] = o.field;
    d["level_set"] = o.level_set.ridges;
    d["ridges"] = o.ridge.ridges;
    d["report"] = report_json(o);
    return d;
  }, py::arg("config"), py::arg("threads") = 1);

  m.def("flowmap_json", &flowmap_json, py::arg("config"), py::arg("x"));

  m.def("validate", [](const AnalysisConfig& c, int threads) {
    std::vector<std::tuple<std::string, bool, std::string, bool>> out;
    for (const auto& r : run_validation(c, threads)) out.emplace_back(r.name, r.passed, r.detail, r.informational);
    return out;
  }, py::arg("config"), py::arg("threads") = 1);

  m.def("generalized_eigh", [](const Mat& C, const Mat& G0) {
    CauchyGreenTensor t;
    t.C = C;
    t.G0 = G0;
    const EigenDecomposition e = generalized_eigendecomp(t);
    return py::make_tuple(Vec(e.values), Mat(e.vectors));
  }, py::arg("C"), py::arg("G0"), "Descending eigenvalues and G0-orthonormal eigenvectors (columns) of C xi = lambda G0 xi.");
  m.def("cauchy_green", [](const Mat& F, const Mat& g_start, const Mat& g_end) {
    return Mat(cauchy_green_riemannian(F, g_start, g_end).C);
  }, py::arg("F"), py::arg("g_start"), py::arg("g_end"));
  m.def("ftle", &ftle, py::arg("lambda1"), py::arg("duration"));
  m.def("randers_fundamental_tensor", [](const Mat& a, const Vec& b, const Vec& y) {
    RiemannianMetric metric{"constant", static_cast<int>(a.rows()), [a](const Vec&) { return a; }};
    const Vec x = Vec::Zero(a.rows());
    return Mat(fundamental_tensor(randers_norm(metric, b), x, y));
  }, py::arg("a"), py::arg("b"), py::arg("y"), "Fundamental tensor of the Randers norm sqrt(y.a.y) + b.y.");

  m.attr("manifold_ids") = manifold_ids();
  m.attr("field_ids") = field_ids();
}
