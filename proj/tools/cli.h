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

#ifndef DPAUDIT_TOOLS_CLI_H_
#define DPAUDIT_TOOLS_CLI_H_

#include <ostream>

namespace dpaudit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Output files go to --output-dir, else $DPAUDIT_OUTPUT_DIR, else the
// current directory.
inline constexpr char kOutputDirEnv[] = "DPAUDIT_OUTPUT_DIR";

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace dpaudit

#endif  // DPAUDIT_TOOLS_CLI_H_
