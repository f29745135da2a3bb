/*
 * Copyright 2026 The crossrisk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Python bindings for the crossrisk core.

#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "crossrisk/attribution.hpp"
#include "crossrisk/common.hpp"
#include "crossrisk/entanglement.hpp"
#include "crossrisk/eval.hpp"
#include "crossrisk/model.hpp"
#include "crossrisk/pipeline.hpp"
#include "crossrisk/planted.hpp"
#include "crossrisk/protocol.hpp"
#include "crossrisk/quant.hpp"

namespace py = pybind11;

namespace {

using namespace crossrisk;
using BackendPtr = std::shared_ptr<model::Backend>;

BackendPtr Mutable(std::shared_ptr<const model::Backend> b) {
  return std::const_pointer_cast<model::Backend>(std::move(b));
}

model::PromptAnswerPair Pair(const std::string& prompt, const std::string& answer) {
  model::PromptAnswerPair p;
  p.prompt = prompt;
  p.answer = answer;
  return p;
}

py::dict StatusDict(const pipeline::StageStatus& s) {
  py::dict d;
  d["partial"] = s.partial;
  d["warnings"] = s.warnings;
  return d;
}

quant::MetricSeries Series(quant::MetricKind kind, std::vector<double> values,
                           quant::Orientation orientation) {
  quant::MetricSeries s;
  s.kind = kind;
  s.task_id = "task";
  s.sub_dimension = "default";
  s.orientation = orientation;
  s.values = std::move(values);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cross-risk analysis of base/defense model pairs";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "Error", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error.get_stored();
      py::object inst = type(py::str(e.what()));
      inst.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  py::enum_<RiskTag>(m, "RiskTag")
      .value("SAFETY", RiskTag::kSafety)
      .value("FAIRNESS", RiskTag::kFairness)
      .value("PRIVACY", RiskTag::kPrivacy);
  py::enum_<Verdict>(m, "Verdict")
      .value("CONSISTENT", Verdict::kConsistent)
      .value("INCONSISTENT", Verdict::kInconsistent)
      .value("UNCERTAIN", Verdict::kUncertain);
  py::enum_<quant::MetricKind>(m, "MetricKind")
      .value("ACCURACY", quant::MetricKind::kAccuracy)
      .value("TOXICITY", quant::MetricKind::kToxicity)
      .value("RTA", quant::MetricKind::kRta)
      .value("TD", quant::MetricKind::kTd);
  py::enum_<quant::Orientation>(m, "Orientation")
      .value("HIGHER_IS_RISKIER", quant::Orientation::kHigherIsRiskier)
      .value("HIGHER_IS_SAFER", quant::Orientation::kHigherIsSafer);
  py::enum_<quant::Direction>(m, "Direction")
      .value("INCREASED_RISK", quant::Direction::kIncreasedRisk)
      .value("DECREASED_RISK", quant::Direction::kDecreasedRisk)
      .value("UNCHANGED", quant::Direction::kUnchanged);

  py::class_<NeuronRef>(m, "NeuronRef")
      .def(py::init<>())
      .def(py::init([](int layer, int neuron) { return NeuronRef{layer, neuron}; }),
           py::arg("layer"), py::arg("neuron"))
      .def_readwrite("layer", &NeuronRef::layer)
      .def_readwrite("neuron", &NeuronRef::neuron)
      .def(py::self == py::self)
      .def(py::self < py::self)
      .def("__hash__", [](const NeuronRef& r) { return std::hash<NeuronRef>{}(r); })
      .def("__str__", [](const NeuronRef& r) { return ToString(r); })
      .def("__repr__", [](const NeuronRef& r) { return "NeuronRef(" + ToString(r) + ")"; });

  py::class_<model::ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("n_layers", &model::ModelSpec::n_layers)
      .def_readwrite("d_model", &model::ModelSpec::d_model)
      .def_readwrite("d_ff", &model::ModelSpec::d_ff)
      .def_readwrite("vocab_size", &model::ModelSpec::vocab_size)
      .def_readwrite("max_context", &model::ModelSpec::max_context)
      .def_readwrite("seed", &model::ModelSpec::seed)
      .def_readwrite("init_std", &model::ModelSpec::init_std);

  py::class_<model::Backend, BackendPtr>(m, "Backend")
      .def_property_readonly("n_layers", [](const model::Backend& b) { return b.Meta().n_layers; })
      .def_property_readonly("d_ff", [](const model::Backend& b) { return b.Meta().d_ff; })
      .def_property_readonly("default_temperature",
                             [](const model::Backend& b) { return b.Meta().default_temperature; })
      .def("generate",
           [](const model::Backend& b, const std::string& prompt, double temperature,
              int max_new_tokens, std::uint64_t trial_seed) {
             return b.Generate(prompt, {temperature, max_new_tokens, trial_seed});
           },
           py::arg("prompt"), py::arg("temperature") = 0.0,
           py::arg("max_new_tokens") = model::kDefaultMaxNewTokens, py::arg("trial_seed") = 0,
           py::call_guard<py::gil_scoped_release>())
      .def("answer_logprob",
           [](const model::Backend& b, const std::string& prompt, const std::string& answer) {
             return b.AnswerLogProb(Pair(prompt, answer));
           },
           py::arg("prompt"), py::arg("answer"))
      .def("answer_probability",
           [](const model::Backend& b, const std::string& prompt, const std::string& answer) {
             return b.AnswerProbability(Pair(prompt, answer));
           },
           py::arg("prompt"), py::arg("answer"))
      .def("activations",
           [](const model::Backend& b, const std::string& prompt, const std::string& answer) {
             return b.CaptureActivations(Pair(prompt, answer)).values;
           },
           py::arg("prompt"), py::arg("answer"))
      .def("activation_gradient",
           [](const model::Backend& b, const std::string& prompt, const std::string& answer,
              const NeuronRef& neuron, double alpha) {
             return b.ActivationGradient(Pair(prompt, answer), neuron, alpha);
           },
           py::arg("prompt"), py::arg("answer"), py::arg("neuron"), py::arg("alpha") = 1.0);

  m.def("open_backend", [](const std::string& address) {
        return Mutable(pipeline::OpenBackend(address));
      },
      py::arg("address"),
      "Backend from an address: toy:SEED, planted:SEED, planted-defense:SEED, "
      "tcp://host:port or stdio:COMMAND.");
  m.def("toy_backend", [](const model::ModelSpec& spec, double default_temperature) {
        return BackendPtr(std::make_shared<model::ToyBackend>(model::BuildToyModel(spec),
                                                              default_temperature));
      },
      py::arg("spec"), py::arg("default_temperature") = 1.0);
  m.attr("PLANTED_NEURON") = py::cast(model::kPlantedNeuron);
  m.attr("RELAY_NEURON") = py::cast(model::kRelayNeuron);

  m.def("integrated_attribution",
        [](const model::Backend& b, const std::string& prompt, const std::string& answer,
           const NeuronRef& neuron, int steps) {
          return attribution::IntegratedAttribution(b, Pair(prompt, answer), neuron, {steps})
              .value;
        },
        py::arg("backend"), py::arg("prompt"), py::arg("answer"), py::arg("neuron"),
        py::arg("steps") = 20);
  m.def("attribute_all",
        [](const model::Backend& b, const std::string& prompt, const std::string& answer,
           int steps, int workers) {
          return attribution::AttributeAll(b, Pair(prompt, answer), {steps}, workers).values;
        },
        py::arg("backend"), py::arg("prompt"), py::arg("answer"), py::arg("steps") = 20,
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("select_top_fraction",
        [](const std::vector<double>& values, double z) {
          return attribution::SelectTopFraction(values, z);
        },
        py::arg("values"), py::arg("z_percent"));

  py::class_<attribution::RiskNeuronProfile>(m, "RiskNeuronProfile")
      .def_readonly("risk", &attribution::RiskNeuronProfile::risk)
      .def_readonly("probe_count", &attribution::RiskNeuronProfile::probe_count)
      .def_readonly("neurons", &attribution::RiskNeuronProfile::neurons)
      .def_readonly("signed_summary", &attribution::RiskNeuronProfile::signed_summary)
      .def_readonly("support", &attribution::RiskNeuronProfile::support)
      .def("__contains__", &attribution::RiskNeuronProfile::contains);

  m.def("select_risk_neurons",
        [](const std::vector<std::vector<double>>& per_prompt, int n_layers, int d_ff,
           RiskTag risk, double z, double p) {
          std::vector<attribution::NeuronAttributions> rows;
          for (std::size_t i = 0; i < per_prompt.size(); ++i) {
            rows.push_back({"p" + std::to_string(i), {n_layers, d_ff}, per_prompt[i]});
          }
          attribution::SelectionConfig config;
          config.z_percent = z;
          config.p_percent = p;
          config.probe_count = static_cast<int>(rows.size());
          return attribution::SelectRiskNeurons(rows, config, risk);
        },
        py::arg("per_prompt"), py::arg("n_layers"), py::arg("d_ff"), py::arg("risk"),
        py::arg("z_percent") = 1.0, py::arg("p_percent") = 60.0,
        "Risk profile from per-prompt attribution vectors (flat, layer-major).");

  py::class_<entanglement::ConflictSet>(m, "ConflictSet")
      .def_readonly("risk_a", &entanglement::ConflictSet::risk_a)
      .def_readonly("risk_b", &entanglement::ConflictSet::risk_b)
      .def_readonly("entangled", &entanglement::ConflictSet::entangled)
      .def_readonly("conflict", &entanglement::ConflictSet::conflict)
      .def_readonly("signs", &entanglement::ConflictSet::signs);
  m.def("conflict_entangled", &entanglement::ConflictEntangled, py::arg("a"), py::arg("b"));

  py::class_<entanglement::TrendReport>(m, "TrendReport")
      .def(py::init<>())
      .def_readwrite("target_risk", &entanglement::TrendReport::target_risk)
      .def_readwrite("n_trend", &entanglement::TrendReport::n_trend)
      .def_readwrite("aligned_count", &entanglement::TrendReport::aligned_count)
      .def_readwrite("moved_count", &entanglement::TrendReport::moved_count)
      .def_readwrite("total_count", &entanglement::TrendReport::total_count);
  m.def("n_trend",
        [](const std::map<NeuronRef, double>& deltas,
           const attribution::RiskNeuronProfile& target,
           const entanglement::ConflictSet& conflict) {
          std::vector<entanglement::ActivationDelta> rows;
          for (const auto& [ref, d] : deltas) rows.push_back({ref, d});
          return entanglement::NTrend(rows, target, conflict);
        },
        py::arg("deltas"), py::arg("target_profile"), py::arg("conflict"));

  py::class_<quant::WelchResult>(m, "WelchResult")
      .def_readonly("t", &quant::WelchResult::t)
      .def_readonly("df", &quant::WelchResult::df)
      .def_readonly("p_value", &quant::WelchResult::p_value)
      .def_readonly("exact_separation", &quant::WelchResult::exact_separation);
  m.def("welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return quant::WelchTTest(a, b);
        },
        py::arg("a"), py::arg("b"));

  py::class_<quant::RiskChange>(m, "RiskChange")
      .def(py::init<>())
      .def_readwrite("mean_before", &quant::RiskChange::mean_before)
      .def_readwrite("mean_after", &quant::RiskChange::mean_after)
      .def_readwrite("rcr_percent", &quant::RiskChange::rcr_percent)
      .def_readwrite("direction", &quant::RiskChange::direction)
      .def_readwrite("p_value", &quant::RiskChange::p_value)
      .def_readwrite("significant", &quant::RiskChange::significant)
      .def_readwrite("degenerate", &quant::RiskChange::degenerate)
      .def_readwrite("exact_separation", &quant::RiskChange::exact_separation);
  m.def("quantify",
        [](const std::vector<double>& before, const std::vector<double>& after,
           quant::MetricKind kind, quant::Orientation orientation) {
          return quant::Quantify(Series(kind, before, orientation),
                                 Series(kind, after, orientation));
        },
        py::arg("before"), py::arg("after"), py::arg("kind") = quant::MetricKind::kTd,
        py::arg("orientation") = quant::Orientation::kHigherIsRiskier,
        "RCR, direction and Welch p-value for two per-trial metric series.");

  py::class_<quant::ConsistencyVerdict>(m, "ConsistencyVerdict")
      .def_readonly("verdict", &quant::ConsistencyVerdict::verdict)
      .def_readonly("rcr_direction", &quant::ConsistencyVerdict::rcr_direction)
      .def_readonly("n_trend", &quant::ConsistencyVerdict::n_trend)
      .def_readonly("note", &quant::ConsistencyVerdict::note);
  m.def("classify_consistency",
        [](const quant::RiskChange& change, const entanglement::TrendReport* report,
           double low, double high) {
          return quant::ClassifyConsistency(change, report, {low, high});
        },
        py::arg("change"), py::arg("report").none(true), py::arg("low") = 0.45,
        py::arg("high") = 0.55);

  m.def("is_refusal", [](const std::string& text) {
        static const eval::LexiconRefusalDetector detector;
        return detector.IsRefusal(text);
      },
      py::arg("text"));
  m.def("toxicity_score", [](const std::string& text) {
        static const eval::LexiconToxicityScorer scorer;
        return scorer.Score(text);
      },
      py::arg("text"));
  m.def("normalize_text", &eval::NormalizeText, py::arg("text"));

  m.def("handle_request", &protocol::HandleLine, py::arg("backend"), py::arg("line"),
        "One wire-protocol request line in, one response line out.");

  py::class_<pipeline::StudyConfig>(m, "StudyConfig")
      .def_readwrite("model_pair", &pipeline::StudyConfig::model_pair)
      .def_readwrite("base_backend", &pipeline::StudyConfig::base_backend)
      .def_readwrite("defense_backend", &pipeline::StudyConfig::defense_backend)
      .def_readwrite("trials", &pipeline::StudyConfig::trials)
      .def_readwrite("workers", &pipeline::StudyConfig::workers);
  m.def("load_study_config", &pipeline::LoadStudyConfig, py::arg("path"));
  m.def("run_study",
        [](const pipeline::StudyConfig& config, const std::filesystem::path& out) {
          pipeline::ValidateStudyConfig(config);
          pipeline::StageStatus status;
          {
            py::gil_scoped_release release;
            const auto base = pipeline::OpenBackend(config.base_backend);
            const auto defense = pipeline::OpenBackend(config.defense_backend);
            status = pipeline::RunStudy(config, *base, *defense, out);
          }
          return StatusDict(status);
        },
        py::arg("config"), py::arg("out"));
  m.def("render_report", &pipeline::RenderReport, py::arg("dir"));
}
