#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "te/choice_eval.hpp"
#include "te/crowd.hpp"
#include "te/error.hpp"
#include "te/harness.hpp"
#include "te/lm_port.hpp"
#include "te/name_pool.hpp"
#include "te/stats.hpp"

namespace py = pybind11;

namespace {

py::dict median_iqr_dict(const std::vector<double>& xs) {
  const auto m = te::stats::median_iqr(xs);
  py::dict d;
  d["median"] = m.median;
  d["q1"] = m.q1;
  d["q3"] = m.q3;
  d["iqr"] = m.iqr;
  return d;
}

py::dict evaluate_choice(const std::string& script_json, const std::string& prompt,
                         const std::vector<std::string>& choices, const std::string& mode, std::size_t samples,
                         std::uint64_t seed) {
  const auto backend = te::ScriptedBackend::from_json(nlohmann::json::parse(script_json));
  te::ChoiceSettings settings;
  settings.mode = te::parse_choice_mode(mode);
  settings.samples = samples;
  te::ChoiceOutcome o;
  {
    py::gil_scoped_release release;
    o = te::evaluate({prompt, choices}, *backend, settings, seed);
  }
  py::dict d;
  d["probabilities"] = o.probabilities;
  d["validity_rate"] = o.validity_rate;
  d["mode"] = std::string(te::to_string(o.mode));
  d["n_samples"] = o.n_samples;
  d["n_valid"] = o.n_valid;
  return d;
}

std::vector<std::pair<std::string, std::string>> ug_pairing(std::uint64_t seed) {
  const auto design = te::build_ug_pairing(te::load_surnames(), seed);
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(design.pairs.size());
  for (const auto& p : design.pairs) out.emplace_back(p.proposer.display(), p.responder.display());
  return out;
}

py::dict run_command(const std::string& command, const std::string& config_text,
                     const std::vector<std::string>& overrides) {
  te::FlatConfig cfg = te::FlatConfig::parse(config_text);
  for (const auto& o : overrides) cfg.apply_override(o);
  te::CommandResult r;
  {
    py::gil_scoped_release release;
    if (command == "validate") {
      r = te::cmd_validate(te::RunConfig::from(cfg, te::RunMode::Validate));
    } else if (command == "run") {
      r = te::cmd_run(te::RunConfig::from(cfg, te::RunMode::Full));
    } else if (command == "report") {
      r = te::cmd_report(cfg.get_string("output_dir"));
    } else {
      throw te::Error(te::ErrorCode::InvalidArgument, "unknown command " + command);
    }
  }
  py::dict d;
  d["exit_code"] = r.exit_code;
  d["items"] = r.items;
  d["failures"] = r.failures;
  d["message"] = r.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulated human-subject experiments against language models";
  static py::exception<te::Error> te_error(m, "TeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const te::Error& e) {
      py::object exc = te_error;
      py::object inst = exc(e.what());
      inst.attr("code") = std::string(te::to_string(e.code()));
      PyErr_SetObject(te_error.ptr(), inst.ptr());
    }
  });

  m.def("version", [] { return std::string(te::code_version()); });
  m.def("parse_estimate", [](const std::string& s) { return te::parse_estimate(s); });
  m.def("mean", [](const std::vector<double>& xs) { return te::stats::mean(xs); });
  m.def("sem", [](const std::vector<double>& xs) { return te::stats::sem(xs); });
  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return te::stats::pearson(x, y); });
  m.def("rank_sum", [](const std::vector<double>& a, const std::vector<double>& b) { return te::stats::rank_sum(a, b); });
  m.def("rank_sum_exact",
        [](const std::vector<double>& a, const std::vector<double>& b) { return te::stats::rank_sum_exact(a, b); });
  m.def("rank_sum_normal",
        [](const std::vector<double>& a, const std::vector<double>& b) { return te::stats::rank_sum_normal(a, b); });
  m.def("median_iqr", &median_iqr_dict);
  m.def("evaluate_choice", &evaluate_choice, py::arg("script_json"), py::arg("prompt"), py::arg("choices"),
        py::arg("mode") = "scored", py::arg("samples") = 100, py::arg("seed") = 0);
  m.def("ug_pairing", &ug_pairing, py::arg("seed"));
  m.def("run_command", &run_command, py::arg("command"), py::arg("config_text"),
        py::arg("overrides") = std::vector<std::string>{});
  m.def("validate_output_violations",
        [](const std::filesystem::path& dir) { return te::validate_output_violations(dir); });
}
