// Copyright 2026 The dpaudit Authors
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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpaudit/audit_runner.h"
#include "dpaudit/config.h"
#include "dpaudit/gdp_math.h"
#include "dpaudit/hidden_state_sim.h"
#include "dpaudit/stats.h"

namespace py = pybind11;

namespace dpaudit {
namespace {

std::vector<ScoreRecord> ToRecords(py::array_t<double> scores,
                                   py::array_t<bool> inserted) {
  auto s = scores.unchecked<1>();
  auto b = inserted.unchecked<1>();
  if (s.shape(0) != b.shape(0)) {
    throw std::invalid_argument("scores and inserted differ in length");
  }
  std::vector<ScoreRecord> out(s.shape(0));
  for (py::ssize_t i = 0; i < s.shape(0); ++i) out[i] = {s(i), b(i)};
  return out;
}

py::dict ReportDict(const AuditReport& r) {
  py::dict d;
  d["eps_hat"] = r.eps_hat;
  d["eps_theory"] = r.eps_theory;
  d["mu_hat"] = r.mu_hat.mu;
  d["alpha_bound"] = r.alpha_bound;
  d["beta_bound"] = r.beta_bound;
  d["tn"] = r.counts.tn;
  d["tp"] = r.counts.tp;
  d["fn"] = r.counts.fn;
  d["fp"] = r.counts.fp;
  d["threshold"] = r.threshold;
  d["direction"] = DirectionName(r.direction);
  d["delta"] = r.delta;
  d["confidence"] = r.confidence;
  return d;
}

}  // namespace
}  // namespace dpaudit

PYBIND11_MODULE(_dpaudit, m) {
  using namespace dpaudit;
  m.doc() = "Privacy auditing of DP-SGD with hidden intermediate models.";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::domain_error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("gdp_to_eps",
        [](double mu, double delta) { return GdpToEps(GdpMu{mu}, delta); },
        py::arg("mu"), py::arg("delta"));
  m.def("gdp_to_delta",
        [](double mu, double eps) { return GdpToDelta(GdpMu{mu}, eps); },
        py::arg("mu"), py::arg("eps"));
  m.def("gdp_tradeoff",
        [](double mu, double alpha) { return GdpTradeoff(GdpMu{mu}, alpha); },
        py::arg("mu"), py::arg("alpha"));
  m.def("compose_gaussian_gdp",
        [](int64_t n, double sigma) { return ComposeGaussianGdp(n, sigma).mu; },
        py::arg("n_insertions"), py::arg("sigma"));
  m.def("clopper_pearson_upper", &ClopperPearsonUpper, py::arg("errors"),
        py::arg("trials"), py::arg("confidence") = 0.95);
  m.def("error_rates_to_mu",
        [](double a, double b) { return ErrorRatesToMu(a, b).mu; },
        py::arg("alpha_bound"), py::arg("beta_bound"));

  m.def(
      "audit_epsilon",
      [](py::array_t<double> scores, py::array_t<bool> inserted, double delta,
         double confidence) {
        return ReportDict(
            AuditEpsilon(ToRecords(scores, inserted), delta, confidence));
      },
      py::arg("scores"), py::arg("inserted"), py::arg("delta") = 1e-5,
      py::arg("confidence") = 0.95);
  m.def(
      "audit_epsilon_held_out",
      [](py::array_t<double> scores, py::array_t<bool> inserted, double delta,
         double confidence, double fraction) {
        return ReportDict(AuditEpsilonHeldOut(ToRecords(scores, inserted),
                                              delta, confidence, fraction));
      },
      py::arg("scores"), py::arg("inserted"), py::arg("delta") = 1e-5,
      py::arg("confidence") = 0.95, py::arg("selection_fraction") = 0.2);

  m.def(
      "run_audit",
      [](const std::string& config_text) {
        const ExperimentSpec spec =
            ExperimentSpecFromConfig(ParseConfigText(config_text));
        AuditResult r;
        {
          py::gil_scoped_release release;
          r = RunAudit(spec);
        }
        py::dict d = ReportDict(r.report);
        d["scores"] = py::array_t<double>(r.scores.size(), r.scores.data());
        d["bits"] = py::array_t<int>(r.bits.size(), r.bits.data());
        d["failed_runs"] = r.failed_runs;
        d["insertions"] = r.insertions;
        return d;
      },
      py::arg("config_text") = "");

  m.def(
      "simulate_hidden",
      [](const std::string& config_text) {
        const SimConfig cfg = SimConfigFromConfig(ParseConfigText(config_text));
        std::vector<double> eps;
        double theory = 0.0;
        {
          py::gil_scoped_release release;
          const SimCurve c =
              AuditSim(cfg, DriftFunction::WorstCase(OptimalThreshold(cfg.clip_c)));
          eps = c.eps_hat();
          theory = c.eps_theory;
        }
        py::dict d;
        d["eps_hat"] = eps;
        d["eps_theory"] = theory;
        return d;
      },
      py::arg("config_text") = "[sim]\n");
}
