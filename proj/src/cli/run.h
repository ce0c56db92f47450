// Copyright 2026 The rangemia Authors
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

#ifndef RANGEMIA_CLI_RUN_H_
#define RANGEMIA_CLI_RUN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rangemia::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipelineError = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  std::string command;
  std::filesystem::path config_path;
  std::optional<uint64_t> seed;
  std::filesystem::path out_dir = "runs";
  int jobs = 1;
  bool force = false;
};

const std::vector<std::string>& CommandNames();

// Runs one subcommand. A one-line JSON status goes to `out`; failures are
// reported to `err` as {"error": {"code", "message"}, "command"}.
int RunCommand(const CommandOptions& options, std::ostream& out,
               std::ostream& err);

}  // namespace rangemia::cli

#endif  // RANGEMIA_CLI_RUN_H_
