#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dctmap/derivatives.hpp"
#include "dctmap/error.hpp"
#include "dctmap/eval.hpp"
#include "dctmap/forward_model.hpp"
#include "dctmap/grid_map.hpp"
#include "dctmap/map_fit.hpp"
#include "dctmap/scan_io.hpp"
#include "dctmap/simulate.hpp"

namespace py = pybind11;
using namespace dctmap;

namespace {

template <typename T, typename Writer>
std::string to_text(const T& value, Writer write) {
  std::ostringstream out;
  write(out, value);
  return out.str();
}

template <typename Reader>
auto from_text(const std::string& text, Reader read) {
  std::istringstream in(text);
  return read(in);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral decay-rate maps for lidar: forward model, fitting, grid baseline.";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InitFailure>(m, "InitFailure", PyExc_RuntimeError);

  py::class_<Ray2>(m, "Ray2")
      .def(py::init([](double x, double y, double vx, double vy) { return Ray2({x, y}, {vx, vy}); }),
           py::arg("x"), py::arg("y"), py::arg("vx"), py::arg("vy"))
      .def_static("from_angle", [](double x, double y, double a) { return Ray2::from_angle({x, y}, a); })
      .def_property_readonly("origin", [](const Ray2& r) { return std::pair{r.origin().x, r.origin().y}; })
      .def_property_readonly("direction", [](const Ray2& r) { return std::pair{r.direction().x, r.direction().y}; });

  py::class_<SensorLimits>(m, "SensorLimits")
      .def(py::init<double, double>(), py::arg("r_min") = 0.04, py::arg("r_max") = 80.0)
      .def_readwrite("r_min", &SensorLimits::r_min)
      .def_readwrite("r_max", &SensorLimits::r_max);

  py::class_<RayOutcome> outcome(m, "RayOutcome");
  py::enum_<RayOutcome::Kind>(outcome, "Kind")
      .value("Sub", RayOutcome::Kind::Sub)
      .value("Super", RayOutcome::Kind::Super)
      .value("Return", RayOutcome::Kind::Return);
  outcome.def_static("sub", &RayOutcome::sub)
      .def_static("super", &RayOutcome::super, py::arg("cutoff") = std::numeric_limits<double>::infinity())
      .def_static("hit", &RayOutcome::hit)
      .def_readonly("kind", &RayOutcome::kind)
      .def_readonly("range", &RayOutcome::range);

  py::class_<LidarRay>(m, "LidarRay")
      .def(py::init<Ray2, RayOutcome>())
      .def_readonly("ray", &LidarRay::ray)
      .def_readonly("outcome", &LidarRay::outcome);

  py::class_<ScanSet>(m, "ScanSet")
      .def(py::init<>())
      .def_readwrite("rays", &ScanSet::rays)
      .def_readwrite("limits", &ScanSet::limits)
      .def_property(
          "extent",
          [](const ScanSet& s) -> std::optional<std::pair<double, double>> {
            if (!s.extent) return std::nullopt;
            return std::pair{s.extent->x, s.extent->y};
          },
          [](ScanSet& s, std::optional<std::pair<double, double>> e) {
            s.extent = e ? std::optional<Extent>(Extent{e->first, e->second}) : std::nullopt;
          })
      .def("__len__", [](const ScanSet& s) { return s.rays.size(); })
      .def("to_text", [](const ScanSet& s) { return to_text(s, write_scan_set); })
      .def_static("from_text", [](const std::string& t) { return from_text(t, read_scan_set); });

  py::class_<SpectralMap>(m, "SpectralMap")
      .def(py::init<const Eigen::MatrixXd&, double, double>(), py::arg("coeffs"), py::arg("extent_x"),
           py::arg("extent_y"))
      .def_property_readonly("coeffs", &SpectralMap::matrix)
      .def_property_readonly("extent", [](const SpectralMap& m) {
        return std::pair{m.shape().extent_x, m.shape().extent_y};
      })
      .def("decay", [](const SpectralMap& m, double x, double y) { return eval_lambda(m, {x, y}); })
      .def("to_text", [](const SpectralMap& m) { return to_text(m, write_spectral_map); })
      .def_static("from_text", [](const std::string& t) { return from_text(t, read_spectral_map); });

  py::class_<GridDecayMap>(m, "GridDecayMap")
      .def_property_readonly("shape", [](const GridDecayMap& g) { return std::pair{g.geometry().rows, g.geometry().cols}; })
      .def("decay", &GridDecayMap::decay, py::arg("ix"), py::arg("iy"))
      .def("observed", &GridDecayMap::observed, py::arg("ix"), py::arg("iy"), py::arg("require_hit") = false)
      .def("to_text", [](const GridDecayMap& g) { return to_text(g, write_grid_map); })
      .def_static("from_text", [](const std::string& t) { return from_text(t, read_grid_map); });

  m.def("line_integral", &line_integral_S, py::arg("map"), py::arg("ray"), py::arg("r"));
  m.def("survival", &survival_N, py::arg("map"), py::arg("ray"), py::arg("r"));
  m.def("ray_log_likelihood", &ray_log_likelihood, py::arg("map"), py::arg("ray"), py::arg("limits"));
  m.def("scan_log_likelihood", &scan_log_likelihood, py::arg("map"), py::arg("scans"));
  m.def(
      "scan_gradient",
      [](const SpectralMap& map, const ScanSet& scans, bool hessian) {
        GradHess g = scan_loglik_grad(map, scans, hessian);
        return std::pair{g.grad, g.hess};
      },
      py::arg("map"), py::arg("scans"), py::arg("hessian") = false);
  m.def(
      "fd_check",
      [](const SpectralMap& map, const ScanSet& scans, double step, int order) {
        const FdReport r = fd_check(map, scans, step, order);
        return py::dict(py::arg("max_rel_error") = r.max_rel_error, py::arg("index") = r.index,
                        py::arg("index2") = r.index2);
      },
      py::arg("map"), py::arg("scans"), py::arg("step") = 0.0, py::arg("order") = 1);

  m.def(
      "fit",
      [](const ScanSet& scans, int rows, int cols, int max_iters, double rel_tol, bool newton) {
        if (!scans.extent) throw InvalidInput("scans need an extent");
        FitConfig config;
        config.rows = rows;
        config.cols = cols;
        config.max_iters = max_iters;
        config.rel_tol = rel_tol;
        config.hessian_mode = newton ? HessianMode::Newton : HessianMode::GradientOnly;
        py::gil_scoped_release release;
        auto [map, report] = fit(scans, *scans.extent, config);
        py::gil_scoped_acquire acquire;
        py::dict info(py::arg("final_loglik") = report.final_loglik, py::arg("iterations") = report.iterations,
                      py::arg("converged") = report.converged, py::arg("loglik_trace") = report.loglik_trace);
        return py::make_tuple(map, info);
      },
      py::arg("scans"), py::arg("rows"), py::arg("cols"), py::arg("max_iters") = 100, py::arg("rel_tol") = 1e-3,
      py::arg("newton") = true);

  m.def(
      "build_grid",
      [](const ScanSet& scans, int resolution) {
        if (!scans.extent) throw InvalidInput("scans need an extent");
        return build_grid(scans, GridGeometry::covering(*scans.extent, resolution, resolution));
      },
      py::arg("scans"), py::arg("resolution"));
  m.def("grid_scan_log_likelihood", &grid_scan_log_likelihood, py::arg("map"), py::arg("scans"));

  m.def(
      "simulate",
      [](const SpectralMap& field, std::size_t rays, const SensorLimits& limits, std::uint64_t seed) {
        return simulate_scan(field, random_rays(field.shape().extent(), rays, seed), limits, seed + 1);
      },
      py::arg("field"), py::arg("rays"), py::arg("limits") = SensorLimits{}, py::arg("seed"));

  m.def("p_ref", &p_ref);
  m.def(
      "rasterize",
      [](const SpectralMap& field, int rows, int cols) {
        const Raster r = rasterize(field, rows, cols);
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                   r.values.data(), r.rows, r.cols)
            .eval();
      },
      py::arg("field"), py::arg("rows"), py::arg("cols"));
  m.def(
      "render_pgm",
      [](const SpectralMap& field, int rows, int cols) { return py::bytes(render_pgm(rasterize(field, rows, cols))); },
      py::arg("field"), py::arg("rows") = 200, py::arg("cols") = 200);
}
