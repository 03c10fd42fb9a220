#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qosim/error.hpp"
#include "qosim/metrics.hpp"
#include "qosim/qdisc.hpp"
#include "qosim/scenario.hpp"

namespace py = pybind11;
using namespace qosim;

namespace {

py::list summary_rows(const std::vector<SummaryRow>& rows) {
  py::list out;
  for (const SummaryRow& r : rows) {
    py::dict d;
    d["class"] = r.cls;
    d["metric"] = std::string(to_string(r.metric));
    d["mean"] = r.mean;
    d["max"] = r.max;
    d["p95"] = r.p95;
    d["points"] = r.points;
    out.append(std::move(d));
  }
  return out;
}

py::dict counters(const Counters& c) {
  py::dict d;
  for (const auto& [k, v] : c.rows()) d[py::str(k)] = v;
  return d;
}

py::list series(const std::vector<MetricSeries>& all) {
  py::list out;
  for (const MetricSeries& s : all) {
    std::vector<double> t, v;
    std::vector<bool> w;
    t.reserve(s.samples.size());
    v.reserve(s.samples.size());
    w.reserve(s.samples.size());
    for (const Sample& x : s.samples) {
      t.push_back(x.time);
      v.push_back(x.value);
      w.push_back(x.warmup);
    }
    py::dict d;
    d["class"] = s.cls;
    d["metric"] = std::string(to_string(s.metric));
    d["time"] = std::move(t);
    d["value"] = std::move(v);
    d["warmup"] = std::move(w);
    out.append(std::move(d));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Discrete-event QoS network simulator";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  // Registered last so it is tried first; attaches line and key.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::object type = py::module_::import("qosim._core").attr("ConfigError");
      py::object err = type(e.what());
      err.attr("line") = e.line();
      err.attr("key") = e.key();
      PyErr_SetObject(type.ptr(), err.ptr());
    }
  });

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("name", &Scenario::name)
      .def_readonly("preset", &Scenario::preset)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("duration", &Scenario::duration)
      .def_readwrite("warmup", &Scenario::warmup)
      .def_readonly("topology", &Scenario::topology)
      .def_readonly("monitor", &Scenario::monitor)
      .def_property_readonly("discipline",
                             [](const Scenario& s) { return std::string(to_string(s.qos.discipline)); })
      .def_property_readonly("buffer_limit", [](const Scenario& s) { return s.qos.buffer_limit; })
      .def("dump", &dump_scenario, "Resolved configuration text; loads back to the same scenario.")
      .def("validate", &validate)
      .def("__repr__", [](const Scenario& s) {
        return "<Scenario " + s.name + " " + std::string(to_string(s.qos.discipline)) + " seed=" +
               std::to_string(s.seed) + ">";
      });

  py::class_<RunOutput>(m, "RunOutput")
      .def_readonly("label", &RunOutput::label)
      .def_readonly("scenario", &RunOutput::scenario)
      .def_property_readonly("summary", [](const RunOutput& r) { return summary_rows(r.summary); })
      .def_property_readonly("summary_quantized",
                             [](const RunOutput& r) { return summary_rows(r.summary_quantized); })
      .def_property_readonly("counters", [](const RunOutput& r) { return counters(r.result.counters); })
      .def_property_readonly("series", [](const RunOutput& r) { return series(r.result.series); })
      .def_property_readonly("conserved", [](const RunOutput& r) { return r.result.counters.conserved(); })
      .def_property_readonly("events", [](const RunOutput& r) { return r.result.sim.events_fired; })
      .def("mean", [](const RunOutput& r, const std::string& cls, const std::string& metric) -> py::object {
             const SummaryRow* row = find_summary(r.summary, cls, parse_metric(metric));
             if (!row) return py::none();
             return py::float_(row->mean);
           }, py::arg("cls"), py::arg("metric"))
      .def("write", &write_run, py::arg("dir"));

  m.def("preset_names", &preset_names);
  m.def("preset_description", [](const std::string& n) { return preset_description(n); });
  m.def("load", [](const std::string& text, const std::vector<std::string>& ov) {
          return load_scenario(text, ov);
        }, py::arg("text"), py::arg("overrides") = std::vector<std::string>{});
  m.def("load_file", &load_scenario_file, py::arg("path"),
        py::arg("overrides") = std::vector<std::string>{});
  m.def("preset", [](const std::string& n, const std::vector<std::string>& ov) {
          return preset_scenario(n, ov);
        }, py::arg("name"), py::arg("overrides") = std::vector<std::string>{});
  m.def("run", [](const Scenario& s, std::optional<std::filesystem::path> out, bool parallel) {
          py::gil_scoped_release release;
          return run_all(s, out.value_or(std::filesystem::path{}), parallel);
        }, py::arg("scenario"), py::arg("out") = py::none(), py::arg("parallel") = true);
}
