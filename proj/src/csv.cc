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

#include "dpaudit/csv.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpaudit {

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string JoinCsv(std::initializer_list<std::string> fields) {
  return JoinCsv(std::vector<std::string>(fields));
}

std::string JoinCsv(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void WriteCsv(const std::filesystem::path& path, const std::string& header,
              const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << header << '\n';
  for (const std::string& row : rows) out << row << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty csv file: " + path.string());
  }
  table.header = SplitCsvLine(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    table.rows.push_back(SplitCsvLine(line));
    if (table.rows.back().size() != table.header.size()) {
      throw std::runtime_error("ragged csv row in " + path.string());
    }
  }
  return table;
}

}  // namespace dpaudit
