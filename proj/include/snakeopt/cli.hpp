// Copyright 2026 The snakeopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snakeopt {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitBadArguments = 2,
  kExitInputError = 3,
  kExitNumericalError = 4,
};

/// Runs one `snakeopt` invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snakeopt
