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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cli/run.h"
#include "glog/logging.h"

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  rangemia::cli::CommandOptions options;
  std::optional<uint64_t> seed;
  CLI::App app{"Range membership inference attacks: simulate, sample, score, "
               "sweep and evaluate."};
  app.add_option("command", options.command, "Subcommand")
      ->required()
      ->check(CLI::IsMember(rangemia::cli::CommandNames()));
  app.add_option("--config", options.config_path, "Run configuration (JSON)")
      ->required();
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out-dir", options.out_dir, "Parent of run directories")
      ->capture_default_str();
  app.add_option("--jobs", options.jobs, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_flag("--force", options.force, "Recompute existing outputs");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rangemia::cli::kExitUsage;
  }
  options.seed = seed;
  return rangemia::cli::RunCommand(options, std::cout, std::cerr);
}
