// Copyright 2026 The ulaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Python bindings: configuration helpers, the statistical kernels and the
// staged audit pipeline.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulaudit/common.h"
#include "ulaudit/config.h"
#include "ulaudit/inference.h"
#include "ulaudit/metrics.h"
#include "ulaudit/pipeline.h"

namespace py = pybind11;

namespace ulaudit {
namespace {

RocCurve Roc(const std::vector<double>& scores, const std::vector<bool>& truths) {
  Require(scores.size() == truths.size(), "scores and truths differ in length");
  auto flags = std::make_unique<bool[]>(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) flags[i] = truths[i];
  return ComputeRoc(scores, std::span<const bool>(flags.get(), truths.size()));
}

py::dict MetricsDict(const AttackMetrics& m) {
  py::dict d;
  d["attack"] = m.attack;
  d["subset"] = m.subset;
  d["auc"] = m.auc;
  d["attack_accuracy"] = m.attack_accuracy;
  d["tpr_at_fpr"] = m.tpr_at_fpr;
  return d;
}

}  // namespace
}  // namespace ulaudit

PYBIND11_MODULE(_core, m) {
  using namespace ulaudit;
  m.doc() = "Membership-inference audits of machine unlearning";

  // Error kinds map to subclasses of one base exception. The types live for
  // the interpreter's lifetime.
  static PyObject* base =
      PyErr_NewException("ulaudit._core.UlauditError", PyExc_RuntimeError, nullptr);
  static PyObject* config_error = PyErr_NewException("ulaudit._core.ConfigError", base, nullptr);
  static PyObject* compute_error =
      PyErr_NewException("ulaudit._core.ComputeError", base, nullptr);
  static PyObject* io_error = PyErr_NewException("ulaudit._core.IoError", base, nullptr);
  m.add_object("UlauditError", py::handle(base));
  m.add_object("ConfigError", py::handle(config_error));
  m.add_object("ComputeError", py::handle(compute_error));
  m.add_object("IoError", py::handle(io_error));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyObject* type = io_error;
      switch (e.kind()) {
        case ErrorKind::kInvalidArgument:
        case ErrorKind::kConfig: type = config_error; break;
        case ErrorKind::kCompute: type = compute_error; break;
        case ErrorKind::kIo: type = io_error; break;
      }
      PyErr_SetString(type, e.what());
    }
  });

  m.def("default_config_yaml", &DefaultConfigYaml, "Commented YAML template of every default.");
  m.def(
      "config_hash", [](const std::string& yaml) { return ConfigHash(ParseConfig(yaml)); },
      py::arg("yaml"), "Stable hash of a parsed configuration.");
  m.def(
      "canonical_config", [](const std::string& yaml) { return CanonicalConfig(ParseConfig(yaml)); },
      py::arg("yaml"), "Canonical JSON of a parsed configuration.");

  m.def(
      "roc_auc",
      [](const std::vector<double>& s, const std::vector<bool>& t) { return Roc(s, t).Auc(); },
      py::arg("scores"), py::arg("truths"));
  m.def(
      "tpr_at_fpr",
      [](const std::vector<double>& s, const std::vector<bool>& t, double fpr) {
        return TprAtFpr(Roc(s, t), fpr);
      },
      py::arg("scores"), py::arg("truths"), py::arg("fpr"));
  m.def(
      "attack_accuracy",
      [](const std::vector<double>& s, const std::vector<bool>& t) {
        return AttackAccuracy(Roc(s, t));
      },
      py::arg("scores"), py::arg("truths"));
  m.def(
      "ks_two_sample",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const KsResult r = KsTwoSample(a, b);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("a"), py::arg("b"), "Two-sided exact KS test: (statistic, p_value).");

  py::class_<DensityModel>(m, "DensityModel")
      .def(py::init([](std::vector<double> values, std::optional<double> bandwidth) {
             return bandwidth ? DensityModel::WithBandwidth(std::move(values), *bandwidth)
                              : DensityModel::Fit(std::move(values));
           }),
           py::arg("values"), py::arg("bandwidth") = std::nullopt)
      .def("density", &DensityModel::Density, py::arg("x"))
      .def_property_readonly("bandwidth", &DensityModel::bandwidth);
  m.def("lambda_score", &LambdaScore, py::arg("query"), py::arg("unlearned"),
        py::arg("held_out"), "Log density ratio of unlearned vs held-out.");
  m.def("psi_score", &PsiScore, py::arg("query"), py::arg("unlearned"), py::arg("out"),
        "Log density ratio of unlearned vs out.");

  m.def(
      "run_audit",
      [](const std::string& yaml, std::size_t jobs, bool resume) {
        PipelineOptions o;
        o.jobs = jobs;
        o.resume = resume;
        ReportSummary s;
        {
          py::gil_scoped_release release;
          Pipeline p(ParseConfig(yaml), o);
          s = p.Report();
        }
        py::list out;
        for (const auto& metric : s.metrics) out.append(MetricsDict(metric));
        return out;
      },
      py::arg("yaml"), py::arg("jobs") = 1, py::arg("resume") = false,
      "Runs every stage and returns the metric rows; artifacts go to output_dir.");
  m.def("compare_runs", &CompareRuns, py::arg("run_dirs"),
        "CSV table comparing finished run directories.");
}
