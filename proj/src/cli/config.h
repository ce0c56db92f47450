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

#ifndef RANGEMIA_CLI_CONFIG_H_
#define RANGEMIA_CLI_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/game_sim.h"
#include "rangemia/range_engine.h"
#include "rangemia/record.h"
#include "rangemia/scorers.h"

namespace rangemia::cli {

// Paths of externally produced files. Unset entries are looked up in the run
// directory only.
struct InputPaths {
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> signals;
  std::optional<std::filesystem::path> ranges;
  std::optional<std::filesystem::path> pools;
  std::optional<std::filesystem::path> column_means;
  std::optional<std::filesystem::path> population;
  std::optional<std::filesystem::path> vocabulary;
  std::optional<std::filesystem::path> fill_lists;
  std::optional<std::filesystem::path> attack_sets;
  std::optional<std::filesystem::path> candidates;
  std::optional<std::filesystem::path> calibration_dir;
};

struct SweepSettings {
  std::optional<SampleOrigin> branch;  // default follows the range kinds
  double step = 5.0;
};

struct RunConfig {
  uint64_t seed = 0;
  ScorerKind scorer = ScorerKind::kRmia;
  std::optional<double> rmia_a;  // default depends on the experiment
  double rmia_gamma = 1.0;
  int n_samples = 20;
  bool include_mode_imputed = true;
  std::optional<double> member_density;
  TrimConfig trim;
  std::optional<SweepSettings> sweep;
  std::optional<SimulatorConfig> simulator;
  InputPaths inputs;
  int repeat_seeds = 5;
  std::vector<double> fpr_targets = {0.01, 0.001};
};

// Usage errors (exit code 2) are reported as InvalidArgument.
absl::StatusOr<RunConfig> ParseRunConfig(const nlohmann::json& json,
                                         const std::filesystem::path& base_dir);
absl::StatusOr<RunConfig> LoadRunConfig(const std::filesystem::path& path);

// Canonical form of the effective configuration. Input paths are absolute.
nlohmann::json RunConfigToJson(const RunConfig& config);

// First 16 hex digits of SHA-256 over the canonical configuration.
std::string ConfigHash(const RunConfig& config);

std::string Sha256Hex(std::string_view bytes);

std::string_view SampleOriginName(SampleOrigin origin);

}  // namespace rangemia::cli

#endif  // RANGEMIA_CLI_CONFIG_H_
