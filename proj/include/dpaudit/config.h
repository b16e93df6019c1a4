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

// Experiment files are flat `key = value` lines grouped under `[section]`
// headers; `#` starts a comment. For example:
//
//   [experiment]
//   preset = housing
//
//   [train]
//   sigma = 4
//   runs = 5000
//
//   [adversary]
//   kind = gc-s
//
// Every key is optional and overrides the preset. Unknown sections or keys
// are errors.

#ifndef DPAUDIT_CONFIG_H_
#define DPAUDIT_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>

#include "dpaudit/audit_runner.h"
#include "dpaudit/hidden_state_sim.h"

namespace dpaudit {

// section -> key -> raw value, in sorted order.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

// Throws std::invalid_argument with the line number on malformed input.
ConfigSections ParseConfigText(const std::string& text);
ConfigSections ReadConfigFile(const std::filesystem::path& path);

// Errors name the offending field as `section.key`.
ExperimentSpec ExperimentSpecFromConfig(const ConfigSections& sections);
SimConfig SimConfigFromConfig(const ConfigSections& sections);

// Fully resolved configs; parsing the text back gives the same spec.
std::string ExperimentSpecToConfigText(const ExperimentSpec& spec);
std::string SimConfigToConfigText(const SimConfig& cfg);

}  // namespace dpaudit

#endif  // DPAUDIT_CONFIG_H_
