#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "beamsi/pipeline.hpp"

namespace py = pybind11;
using namespace beamsi;

namespace {

py::dict metrics_dict(const MetricsReport& r) {
  py::dict d;
  d["method"] = r.method;
  d["interpolation_mae"] = r.interpolation_mae;
  d["extrapolation_mae"] = r.extrapolation_mae;
  d["peak_error_ratio"] = r.peak_error_ratio;
  d["extrapolation_peak_error_ratio"] = r.extrapolation_peak_error_ratio;
  d["frechet_P"] = r.frechet_modulus;
  d["frechet_C"] = r.frechet_damping;
  d["frechet_P_normalized"] = r.frechet_modulus_normalized;
  d["frechet_C_normalized"] = r.frechet_damping_normalized;
  d["inference_seconds"] = r.inference_seconds;
  return d;
}

LogSink sink(const py::object& log) {
  if (log.is_none()) return {};
  return [log](const std::string& s) {
    py::gil_scoped_acquire g;
    log(s);
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Beam stiffness and damping identification";
  m.attr("__version__") = kToolVersion;

  static py::exception<Error> base(m, "BeamsiError");
  static py::exception<Error> config_error(m, "ConfigError", base.ptr());
  static py::exception<Error> numerical_error(m, "NumericalError", base.ptr());
  static py::exception<Error> artifact_error(m, "ArtifactError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Config: PyErr_SetString(config_error.ptr(), e.what()); return;
        case ErrorKind::Numerical: PyErr_SetString(numerical_error.ptr(), e.what()); return;
        case ErrorKind::Artifact: PyErr_SetString(artifact_error.ptr(), e.what()); return;
      }
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("parse", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("to_text", &to_text)
      .def("hash", &config_hash)
      .def("validate", &RunConfig::validate)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("nodes", &RunConfig::nodes)
      .def_readwrite("n_save", &RunConfig::n_save)
      .def_readwrite("t_end", &RunConfig::t_end)
      .def_property(
          "epochs", [](const RunConfig& c) { return c.train.epochs; },
          [](RunConfig& c, int v) { c.train.epochs = v; })
      .def_property(
          "dnn_epochs", [](const RunConfig& c) { return c.dnn.epochs; },
          [](RunConfig& c, int v) { c.dnn.epochs = v; })
      .def_property(
          "pinn_epochs", [](const RunConfig& c) { return c.pinn.epochs; },
          [](RunConfig& c, int v) { c.pinn.epochs = v; })
      .def("__repr__", [](const RunConfig& c) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "<RunConfig %016llx>", static_cast<unsigned long long>(config_hash(c)));
        return std::string(buf);
      });

  m.def(
      "simulate",
      [](const RunConfig& cfg, int multiplier) {
        cfg.validate();
        const auto p = cfg.problem().extended(multiplier);
        const auto t = solve(p, p.truth_fields());
        return py::make_tuple(t.times(), t.displacements());
      },
      py::arg("config"), py::arg("multiplier") = 1,
      "Ground-truth response: (times, displacements[save, node]).");

  m.def(
      "truth_fields",
      [](const RunConfig& cfg) {
        const auto p = cfg.problem();
        const auto f = p.truth_fields();
        return py::make_tuple(p.grid().all_coordinates(), f.modulus(), f.damping());
      },
      py::arg("config"), "(x at all n+2 points, P at all points, C at interior nodes)");

  m.def(
      "discrete_frechet",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
         py::array_t<double, py::array::c_style | py::array::forcecast> b) {
        const auto curve = [](const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
          if (arr.ndim() != 2 || arr.shape(1) != 2) throw DomainError("curves must be (k, 2) arrays");
          const auto r = arr.unchecked<2>();
          std::vector<Point2> out;
          for (py::ssize_t i = 0; i < r.shape(0); ++i) out.push_back({r(i, 0), r(i, 1)});
          return out;
        };
        return discrete_frechet(curve(a), curve(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "generate",
      [](const RunConfig& cfg, const fs::path& out, const py::object& log) {
        py::gil_scoped_release r;
        cmd_generate(cfg, out, sink(log));
      },
      py::arg("config"), py::arg("out"), py::arg("log") = py::none());

  m.def(
      "train",
      [](const RunConfig& cfg, const std::string& method, const fs::path& out, const py::object& log) {
        const Method mm = parse_method(method);
        py::gil_scoped_release r;
        cmd_train(cfg, mm, out, sink(log));
      },
      py::arg("config"), py::arg("method"), py::arg("out"), py::arg("log") = py::none());

  m.def(
      "evaluate",
      [](const RunConfig& cfg, const fs::path& out, const std::vector<std::string>& methods,
         const py::object& log) {
        std::vector<Method> ms;
        for (const auto& s : methods) ms.push_back(parse_method(s));
        std::vector<MetricsReport> reports;
        {
          py::gil_scoped_release r;
          reports = cmd_eval(cfg, out, ms, sink(log));
        }
        py::list l;
        for (const auto& rep : reports) l.append(metrics_dict(rep));
        return l;
      },
      py::arg("config"), py::arg("out"), py::arg("methods") = std::vector<std::string>{},
      py::arg("log") = py::none());

  m.def(
      "sweep",
      [](const RunConfig& cfg, const std::string& axis, const std::vector<double>& values, const fs::path& out,
         int threads, const py::object& log) {
        const SweepAxis a = parse_axis(axis);
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release r;
          rows = cmd_sweep(cfg, a, values, out, threads, sink(log));
        }
        py::list l;
        for (const auto& row : rows) {
          py::dict d = row.ok ? metrics_dict(row.report) : py::dict();
          d["value"] = row.value;
          d["ok"] = row.ok;
          d["final_loss"] = row.final_loss;
          d["message"] = row.message;
          l.append(d);
        }
        return l;
      },
      py::arg("config"), py::arg("axis"), py::arg("values"), py::arg("out"), py::arg("threads") = 1,
      py::arg("log") = py::none());

  m.def(
      "read_trajectory",
      [](const fs::path& path) {
        const auto t = read_trajectory_csv(path);
        return py::make_tuple(t.times(), t.displacements());
      },
      py::arg("path"));
}
