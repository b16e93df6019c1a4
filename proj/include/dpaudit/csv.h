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

#ifndef DPAUDIT_CSV_H_
#define DPAUDIT_CSV_H_

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace dpaudit {

// Shortest round-trippable decimal representation ("%.17g").
std::string FormatDouble(double value);

std::string JoinCsv(std::initializer_list<std::string> fields);
std::string JoinCsv(const std::vector<std::string>& fields);

std::vector<std::string> SplitCsvLine(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Writes a header row followed by pre-joined rows. Throws std::runtime_error
// if the file cannot be opened.
void WriteCsv(const std::filesystem::path& path, const std::string& header,
              const std::vector<std::string>& rows);

CsvTable ReadCsv(const std::filesystem::path& path);

}  // namespace dpaudit

#endif  // DPAUDIT_CSV_H_
