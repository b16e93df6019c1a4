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

#include "dpaudit/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dpaudit/csv.h"

namespace dpaudit {
namespace {

std::string Trim(const std::string& s) {
  const size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void Fail(const std::string& field, const std::string& value,
                       const std::string& what) {
  throw std::invalid_argument(field + ": " + what + " (got '" + value + "')");
}

double ToDouble(const std::string& field, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(field, value, "expected a number");
}

int64_t ToInt(const std::string& field, const std::string& value) {
  int64_t v = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) Fail(field, value, "expected an integer");
  return v;
}

uint64_t ToUint(const std::string& field, const std::string& value) {
  uint64_t v = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    Fail(field, value, "expected a non-negative integer");
  }
  return v;
}

bool ToBool(const std::string& field, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  Fail(field, value, "expected true or false");
}

using Setter = std::function<void(const std::string& field,
                                  const std::string& value)>;
using SectionSetters = std::map<std::string, Setter>;

void Apply(const ConfigSections& sections,
           const std::map<std::string, SectionSetters>& schema,
           const std::set<std::string>& ignored) {
  for (const auto& [section, entries] : sections) {
    if (ignored.count(section)) continue;
    const auto it = schema.find(section);
    if (it == schema.end()) {
      throw std::invalid_argument("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : entries) {
      const std::string field = section + "." + key;
      const auto setter = it->second.find(key);
      if (setter == it->second.end()) {
        throw std::invalid_argument(field + ": unknown key");
      }
      setter->second(field, value);
    }
  }
}

std::string Lookup(const ConfigSections& sections, const std::string& section,
                   const std::string& key) {
  const auto s = sections.find(section);
  if (s == sections.end()) return "";
  const auto k = s->second.find(key);
  return k == s->second.end() ? "" : k->second;
}

std::string SimulationName(SimStrategy::Simulation s) {
  return s == SimStrategy::Simulation::kNoisy ? "noisy" : "noiseless";
}

std::string RankName(SimStrategy::Rank r) {
  return r == SimStrategy::Rank::kPerStep ? "per-step" : "final-model";
}

std::string Widths(const std::vector<int64_t>& widths) {
  std::string out;
  for (size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(widths[i]);
  }
  return out;
}

}  // namespace

ConfigSections ParseConfigText(const std::string& text) {
  ConfigSections sections;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument(where + ": unterminated section header");
      }
      section = Trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw std::invalid_argument(where + ": empty section name");
      }
      sections[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(where + ": expected key = value");
    }
    if (section.empty()) {
      throw std::invalid_argument(where + ": key outside of any section");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + ": empty key");
    if (!sections[section].emplace(key, value).second) {
      throw std::invalid_argument(section + "." + key + ": duplicate key");
    }
  }
  return sections;
}

ConfigSections ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfigText(buf.str());
}

ExperimentSpec ExperimentSpecFromConfig(const ConfigSections& sections) {
  const std::string preset = Lookup(sections, "experiment", "preset");
  ExperimentSpec spec;
  if (preset.empty() || preset == "housing") {
    spec = HousingAnalogSpec();
  } else if (preset == "overparameterized") {
    spec = OverparameterizedSpec();
  } else {
    Fail("experiment.preset", preset, "expected housing or overparameterized");
  }

  TrainConfig& t = spec.train;
  AdversarySpec& a = spec.adversary;
  DatasetSpec& d = spec.dataset;
  MlpArchitecture& m = spec.architecture;
  const std::map<std::string, SectionSetters> schema = {
      {"experiment",
       {{"preset", [](auto&, auto&) {}},
        {"jobs", [&](auto& f, auto& v) { spec.jobs = ToInt(f, v); }},
        {"output_dir", [&](auto&, auto& v) { spec.output_dir = v; }}}},
      {"train",
       {{"eta", [&](auto& f, auto& v) { t.eta = ToDouble(f, v); }},
        {"clip_c", [&](auto& f, auto& v) { t.clip_c = ToDouble(f, v); }},
        {"sigma", [&](auto& f, auto& v) { t.sigma = ToDouble(f, v); }},
        {"steps", [&](auto& f, auto& v) { t.steps = ToInt(f, v); }},
        {"periodicity",
         [&](auto& f, auto& v) { t.periodicity = ToInt(f, v); }},
        {"batch_size", [&](auto& f, auto& v) { t.batch_size = ToInt(f, v); }},
        {"runs", [&](auto& f, auto& v) { t.runs = ToInt(f, v); }},
        {"delta", [&](auto& f, auto& v) { t.delta = ToDouble(f, v); }},
        {"confidence",
         [&](auto& f, auto& v) { t.confidence = ToDouble(f, v); }},
        {"seed", [&](auto& f, auto& v) { t.seed = ToUint(f, v); }},
        {"random_init_per_run",
         [&](auto& f, auto& v) { t.random_init_per_run = ToBool(f, v); }}}},
      {"adversary",
       {{"kind",
         [&](auto& f, auto& v) {
           try {
             a.kind = ParseAdversaryKind(v);
           } catch (const std::invalid_argument&) {
             Fail(f, v, "expected gc-r, gc-s, cots or loss");
           }
         }},
        {"simulation",
         [&](auto& f, auto& v) {
           if (v == "noisy") {
             a.strategy.simulation = SimStrategy::Simulation::kNoisy;
           } else if (v == "noiseless") {
             a.strategy.simulation = SimStrategy::Simulation::kNoiseless;
           } else {
             Fail(f, v, "expected noisy or noiseless");
           }
         }},
        {"rank",
         [&](auto& f, auto& v) {
           if (v == "per-step") {
             a.strategy.rank = SimStrategy::Rank::kPerStep;
           } else if (v == "final-model") {
             a.strategy.rank = SimStrategy::Rank::kFinalModel;
           } else {
             Fail(f, v, "expected per-step or final-model");
           }
         }},
        {"sim_runs",
         [&](auto& f, auto& v) {
           a.strategy.sim_runs = static_cast<int>(ToInt(f, v));
         }}}},
      {"dataset",
       {{"csv_path", [&](auto&, auto& v) { d.csv_path = v; }},
        {"seed", [&](auto& f, auto& v) { d.seed = ToUint(f, v); }},
        {"n", [&](auto& f, auto& v) { d.n = ToInt(f, v); }},
        {"d", [&](auto& f, auto& v) { d.d = ToInt(f, v); }}}},
      {"model",
       {{"widths",
         [&](auto& f, auto& v) {
           m.widths.clear();
           for (const std::string& w : SplitCsvLine(v)) {
             m.widths.push_back(ToInt(f, Trim(w)));
           }
         }},
        {"activation",
         [&](auto& f, auto& v) {
           try {
             m.hidden = ParseActivation(v);
           } catch (const std::exception&) {
             Fail(f, v, "expected tanh or relu");
           }
         }}}},
  };
  Apply(sections, schema, {});
  if (spec.jobs < 0) Fail("experiment.jobs", std::to_string(spec.jobs),
                          "must be >= 0");
  if (a.strategy.sim_runs < 1) {
    Fail("adversary.sim_runs", std::to_string(a.strategy.sim_runs),
         "must be >= 1");
  }
  ValidateExperimentSpec(spec);
  return spec;
}

SimConfig SimConfigFromConfig(const ConfigSections& sections) {
  SimConfig c;
  const std::map<std::string, SectionSetters> schema = {
      {"sim",
       {{"steps", [&](auto& f, auto& v) { c.steps = ToInt(f, v); }},
        {"batch_b", [&](auto& f, auto& v) { c.batch_b = ToInt(f, v); }},
        {"clip_c", [&](auto& f, auto& v) { c.clip_c = ToDouble(f, v); }},
        {"sigma", [&](auto& f, auto& v) { c.sigma = ToDouble(f, v); }},
        {"runs", [&](auto& f, auto& v) { c.runs = ToInt(f, v); }},
        {"delta", [&](auto& f, auto& v) { c.delta = ToDouble(f, v); }},
        {"confidence",
         [&](auto& f, auto& v) { c.confidence = ToDouble(f, v); }},
        {"seed", [&](auto& f, auto& v) { c.seed = ToUint(f, v); }},
        {"jobs",
         [&](auto& f, auto& v) { c.jobs = static_cast<int>(ToInt(f, v)); }}}},
  };
  Apply(sections, schema, {});
  ValidateSimConfig(c);
  return c;
}

std::string ExperimentSpecToConfigText(const ExperimentSpec& spec) {
  const TrainConfig& t = spec.train;
  const AdversarySpec& a = spec.adversary;
  std::ostringstream out;
  out << "[experiment]\n"
      << "jobs = " << spec.jobs << "\n";
  if (!spec.output_dir.empty()) out << "output_dir = " << spec.output_dir << "\n";
  out << "\n[train]\n"
      << "eta = " << FormatDouble(t.eta) << "\n"
      << "clip_c = " << FormatDouble(t.clip_c) << "\n"
      << "sigma = " << FormatDouble(t.sigma) << "\n"
      << "steps = " << t.steps << "\n"
      << "periodicity = " << t.periodicity << "\n"
      << "batch_size = " << t.batch_size << "\n"
      << "runs = " << t.runs << "\n"
      << "delta = " << FormatDouble(t.delta) << "\n"
      << "confidence = " << FormatDouble(t.confidence) << "\n"
      << "seed = " << t.seed << "\n"
      << "random_init_per_run = " << (t.random_init_per_run ? "true" : "false")
      << "\n\n[adversary]\n"
      << "kind = " << AdversaryName(a.kind) << "\n"
      << "simulation = " << SimulationName(a.strategy.simulation) << "\n"
      << "rank = " << RankName(a.strategy.rank) << "\n"
      << "sim_runs = " << a.strategy.sim_runs << "\n\n[dataset]\n";
  if (!spec.dataset.csv_path.empty()) {
    out << "csv_path = " << spec.dataset.csv_path << "\n";
  }
  out << "seed = " << spec.dataset.seed << "\n"
      << "n = " << spec.dataset.n << "\n"
      << "d = " << spec.dataset.d << "\n\n[model]\n"
      << "widths = " << Widths(spec.architecture.widths) << "\n"
      << "activation = " << ActivationName(spec.architecture.hidden) << "\n";
  return out.str();
}

std::string SimConfigToConfigText(const SimConfig& c) {
  std::ostringstream out;
  out << "[sim]\n"
      << "steps = " << c.steps << "\n"
      << "batch_b = " << c.batch_b << "\n"
      << "clip_c = " << FormatDouble(c.clip_c) << "\n"
      << "sigma = " << FormatDouble(c.sigma) << "\n"
      << "runs = " << c.runs << "\n"
      << "delta = " << FormatDouble(c.delta) << "\n"
      << "confidence = " << FormatDouble(c.confidence) << "\n"
      << "seed = " << c.seed << "\n"
      << "jobs = " << c.jobs << "\n";
  return out.str();
}

}  // namespace dpaudit
