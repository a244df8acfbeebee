#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "themis/analysis.hpp"
#include "themis/bbn.hpp"
#include "themis/error.hpp"
#include "themis/model.hpp"
#include "themis/scenario.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Documents cross the boundary as JSON text; the Python wrapper decodes them.
themis::RegionModel model_of(const std::string& text) { return themis::model_from_json(json::parse(text)); }

std::string analyze(const std::string& model_text, double variance_threshold, std::size_t max_vars,
                    double r_threshold) {
  const auto m = model_of(model_text);
  const auto panel = themis::analysis::standardize(m.series);
  const auto keys = themis::analysis::select_key_variables(themis::analysis::pca(panel), panel, variance_threshold,
                                                           max_vars);
  const auto signs =
      themis::analysis::estimate_signs(panel, keys, m.adjacency ? &*m.adjacency : nullptr, r_threshold);
  return json{{"key_variables", themis::analysis::to_json(keys)}, {"sign_matrix", themis::analysis::to_json(signs)}}
      .dump();
}

std::string run(const std::string& model_text, const std::string& config_text) {
  const auto cfg = themis::scenario::run_config_from_json(json::parse(config_text));
  themis::scenario::PipelineRun result;
  {
    py::gil_scoped_release release;
    result = themis::scenario::run_pipeline(model_of(model_text), cfg);
  }
  return themis::scenario::to_json(result).dump();
}

std::string what_if(const std::string& run_text, const std::string& edits_text) {
  const auto parent = themis::scenario::run_from_json(json::parse(run_text));
  std::vector<themis::scenario::Edit> edits;
  const auto doc = json::parse(edits_text);
  for (std::size_t i = 0; i < doc.size(); ++i)
    edits.push_back(themis::scenario::edit_from_json(doc[i], "/edits/" + std::to_string(i)));
  return themis::scenario::to_json(themis::scenario::what_if(parent, edits)).dump();
}

std::string report(const std::string& run_text, double tripwire) {
  const auto r = themis::scenario::run_from_json(json::parse(run_text));
  return themis::scenario::to_json(themis::scenario::compute_intervention_index(r, tripwire)).dump();
}

std::string infer(const std::string& network_text, const std::string& query,
                  const std::map<std::string, std::string>& evidence) {
  const auto net = themis::bbn::network_from_json(json::parse(network_text));
  themis::bbn::validate_network(net);
  return themis::bbn::to_json(themis::bbn::infer(net, query, evidence)).dump();
}

}  // namespace

PYBIND11_MODULE(_themis, m) {
  m.attr("__version__") = THEMIS_VERSION;

  static py::exception<themis::Error> error(m, "ThemisError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const themis::Error& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(e.what(), e.code(), e.path()).ptr());
    } catch (const json::exception& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(e.what(), "parse_error", "").ptr());
    }
  });

  m.def("validate", [](const std::string& text) { themis::validate(model_of(text)); });
  m.def("fingerprint", [](const std::string& text) { return themis::fingerprint(model_of(text)); });
  m.def("load_model", [](const std::string& path) { return themis::to_json(themis::load_region_model(path)).dump(); });
  m.def("analyze", &analyze, py::arg("model"), py::arg("variance_threshold") = 0.90, py::arg("max_vars") = 7,
        py::arg("r_threshold") = 0.3);
  m.def("run", &run, py::arg("model"), py::arg("config"));
  m.def("what_if", &what_if, py::arg("run"), py::arg("edits"));
  m.def("report", &report, py::arg("run"), py::arg("tripwire"));
  m.def("infer", &infer, py::arg("network"), py::arg("query"), py::arg("evidence") = std::map<std::string, std::string>{});
  m.def("aggregate_scenarios", [](const std::map<std::string, std::pair<double, double>>& per) {
    std::map<std::string, themis::scenario::ScenarioOutcome> in;
    for (const auto& [id, wp] : per) in[id] = {wp.first, wp.second};
    return themis::scenario::aggregate_scenarios(in);
  });
}
