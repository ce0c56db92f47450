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

#include "cli/config.h"

#include <openssl/evp.h>

#include <array>
#include <initializer_list>

#include "absl/strings/str_cat.h"
#include "rangemia/io.h"
#include "rangemia/status_macros.h"
#include "rangemia/strings.h"

namespace rangemia::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

absl::Status CheckKeys(const json& j, std::initializer_list<const char*> known,
                       std::string_view where) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat("\"", AbslView(where), "\" must be an object"));
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown key \"", it.key(), "\" in ", AbslView(where)));
    }
  }
  return absl::OkStatus();
}

absl::Status TypeError(std::string_view where, const char* key,
                       const char* type) {
  return absl::InvalidArgumentError(
      absl::StrCat("\"", AbslView(where), ".", key, "\" must be ", type));
}

absl::StatusOr<std::optional<double>> GetNumber(const json& j, const char* key,
                                                std::string_view where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) return TypeError(where, key, "a number");
  return it->get<double>();
}

absl::StatusOr<std::optional<int64_t>> GetInt(const json& j, const char* key,
                                              std::string_view where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) return TypeError(where, key, "an integer");
  return it->get<int64_t>();
}

absl::StatusOr<std::optional<std::string>> GetString(const json& j,
                                                     const char* key,
                                                     std::string_view where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) return TypeError(where, key, "a string");
  return it->get<std::string>();
}

absl::Status ParseAttack(const json& j, RunConfig& c) {
  RETURN_IF_ERROR(CheckKeys(j, {"scorer", "a", "gamma"}, "attack"));
  ASSIGN_OR_RETURN(auto scorer, GetString(j, "scorer", "attack"));
  if (scorer.has_value()) {
    if (*scorer == "loss") {
      c.scorer = ScorerKind::kLoss;
    } else if (*scorer == "rmia") {
      c.scorer = ScorerKind::kRmia;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown scorer \"", *scorer, "\" (expected loss or rmia)"));
    }
  }
  ASSIGN_OR_RETURN(c.rmia_a, GetNumber(j, "a", "attack"));
  ASSIGN_OR_RETURN(auto gamma, GetNumber(j, "gamma", "attack"));
  if (gamma.has_value()) c.rmia_gamma = *gamma;
  if (c.rmia_a.has_value() && !(*c.rmia_a >= 0.0 && *c.rmia_a <= 1.0)) {
    return absl::InvalidArgumentError("attack.a must lie in [0, 1]");
  }
  if (!(c.rmia_gamma > 0.0)) {
    return absl::InvalidArgumentError("attack.gamma must be > 0");
  }
  return absl::OkStatus();
}

absl::Status ParseSampler(const json& j, RunConfig& c) {
  RETURN_IF_ERROR(CheckKeys(
      j, {"n_samples", "include_mode_imputed", "member_density"}, "sampler"));
  ASSIGN_OR_RETURN(auto n, GetInt(j, "n_samples", "sampler"));
  if (n.has_value()) {
    if (*n < 1) return absl::InvalidArgumentError("sampler.n_samples must be >= 1");
    c.n_samples = static_cast<int>(*n);
  }
  if (auto it = j.find("include_mode_imputed"); it != j.end()) {
    if (!it->is_boolean()) return TypeError("sampler", "include_mode_imputed", "a boolean");
    c.include_mode_imputed = it->get<bool>();
  }
  ASSIGN_OR_RETURN(c.member_density, GetNumber(j, "member_density", "sampler"));
  if (c.member_density.has_value() &&
      !(*c.member_density >= 0.0 && *c.member_density <= 1.0)) {
    return absl::InvalidArgumentError("sampler.member_density must lie in [0, 1]");
  }
  return absl::OkStatus();
}

absl::Status ParseTrim(const json& j, RunConfig& c) {
  RETURN_IF_ERROR(CheckKeys(j, {"q_s", "q_e"}, "trim"));
  ASSIGN_OR_RETURN(auto q_s, GetNumber(j, "q_s", "trim"));
  ASSIGN_OR_RETURN(auto q_e, GetNumber(j, "q_e", "trim"));
  if (q_s.has_value()) c.trim.q_s = *q_s;
  if (q_e.has_value()) c.trim.q_e = *q_e;
  return ValidateTrim(c.trim);
}

absl::Status ParseSweep(const json& j, RunConfig& c) {
  RETURN_IF_ERROR(CheckKeys(j, {"branch", "step"}, "sweep"));
  SweepSettings s;
  ASSIGN_OR_RETURN(auto branch, GetString(j, "branch", "sweep"));
  if (branch.has_value()) {
    if (*branch == "real") {
      s.branch = SampleOrigin::kReal;
    } else if (*branch == "synthetic") {
      s.branch = SampleOrigin::kSynthetic;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown sweep branch \"", *branch, "\" (expected real or synthetic)"));
    }
  }
  ASSIGN_OR_RETURN(auto step, GetNumber(j, "step", "sweep"));
  if (step.has_value()) s.step = *step;
  if (!(s.step > 0.0 && s.step <= 100.0)) {
    return absl::InvalidArgumentError("sweep.step must lie in (0, 100]");
  }
  c.sweep = s;
  return absl::OkStatus();
}

absl::Status ParseInputs(const json& j, const fs::path& base, RunConfig& c) {
  RETURN_IF_ERROR(CheckKeys(j,
                            {"manifest", "signals", "ranges", "pools",
                             "column_means", "population", "vocabulary",
                             "fill_lists", "attack_sets", "candidates",
                             "calibration_dir"},
                            "inputs"));
  InputPaths& in = c.inputs;
  const std::pair<const char*, std::optional<fs::path>*> fields[] = {
      {"manifest", &in.manifest},       {"signals", &in.signals},
      {"ranges", &in.ranges},           {"pools", &in.pools},
      {"column_means", &in.column_means}, {"population", &in.population},
      {"vocabulary", &in.vocabulary},   {"fill_lists", &in.fill_lists},
      {"attack_sets", &in.attack_sets}, {"candidates", &in.candidates},
      {"calibration_dir", &in.calibration_dir},
  };
  for (const auto& [key, slot] : fields) {
    ASSIGN_OR_RETURN(auto value, GetString(j, key, "inputs"));
    if (value.has_value()) *slot = fs::absolute(base / *value).lexically_normal();
  }
  return absl::OkStatus();
}

absl::Status ParseEval(const json& j, RunConfig& c) {
  RETURN_IF_ERROR(CheckKeys(j, {"fpr_targets"}, "eval"));
  if (auto it = j.find("fpr_targets"); it != j.end()) {
    if (!it->is_array() || it->empty()) {
      return absl::InvalidArgumentError("eval.fpr_targets must be a non-empty array");
    }
    c.fpr_targets.clear();
    for (const json& v : *it) {
      if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
        return absl::InvalidArgumentError("eval.fpr_targets entries must lie in (0, 1)");
      }
      c.fpr_targets.push_back(v.get<double>());
    }
  }
  return absl::OkStatus();
}

json PathJson(const std::optional<fs::path>& p) {
  return p.has_value() ? json(p->string()) : json(nullptr);
}

}  // namespace

std::string_view SampleOriginName(SampleOrigin origin) {
  return origin == SampleOrigin::kReal ? "real" : "synthetic";
}

absl::StatusOr<RunConfig> ParseRunConfig(const json& j, const fs::path& base_dir) {
  RETURN_IF_ERROR(CheckKeys(j,
                            {"seed", "attack", "sampler", "trim", "sweep",
                             "simulator", "inputs", "repeat", "eval"},
                            "config"));
  RunConfig c;
  ASSIGN_OR_RETURN(auto seed, GetInt(j, "seed", "config"));
  if (seed.has_value()) {
    if (*seed < 0) return absl::InvalidArgumentError("seed must be >= 0");
    c.seed = static_cast<uint64_t>(*seed);
  }
  if (auto it = j.find("attack"); it != j.end()) RETURN_IF_ERROR(ParseAttack(*it, c));
  if (auto it = j.find("sampler"); it != j.end()) RETURN_IF_ERROR(ParseSampler(*it, c));
  if (auto it = j.find("trim"); it != j.end()) RETURN_IF_ERROR(ParseTrim(*it, c));
  if (auto it = j.find("sweep"); it != j.end() && !it->is_null()) {
    RETURN_IF_ERROR(ParseSweep(*it, c));
  }
  if (auto it = j.find("simulator"); it != j.end() && !it->is_null()) {
    ASSIGN_OR_RETURN(SimulatorConfig sim, SimulatorConfigFromJson(*it));
    if (c.member_density.has_value()) sim.member_density = c.member_density;
    sim.sampler.n_samples = c.n_samples;
    sim.sampler.include_mode_imputed = c.include_mode_imputed;
    RETURN_IF_ERROR(ValidateSimulatorConfig(sim));
    c.simulator = sim;
  }
  if (auto it = j.find("inputs"); it != j.end()) {
    RETURN_IF_ERROR(ParseInputs(*it, base_dir, c));
  }
  if (auto it = j.find("repeat"); it != j.end()) {
    RETURN_IF_ERROR(CheckKeys(*it, {"n_seeds"}, "repeat"));
    ASSIGN_OR_RETURN(auto n, GetInt(*it, "n_seeds", "repeat"));
    if (n.has_value()) {
      if (*n < 2) return absl::InvalidArgumentError("repeat.n_seeds must be >= 2");
      c.repeat_seeds = static_cast<int>(*n);
    }
  }
  if (auto it = j.find("eval"); it != j.end()) RETURN_IF_ERROR(ParseEval(*it, c));
  return c;
}

absl::StatusOr<RunConfig> LoadRunConfig(const fs::path& path) {
  auto text = ReadFile(path);
  if (!text.ok()) return absl::InvalidArgumentError(text.status().message());
  ASSIGN_OR_RETURN(json j, ParseJson(*text, path.string()));
  return ParseRunConfig(j, fs::absolute(path).parent_path());
}

json RunConfigToJson(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["attack"] = {{"scorer", c.scorer == ScorerKind::kLoss ? "loss" : "rmia"},
                 {"a", c.rmia_a.has_value() ? json(*c.rmia_a) : json(nullptr)},
                 {"gamma", c.rmia_gamma}};
  j["sampler"] = {{"n_samples", c.n_samples},
                  {"include_mode_imputed", c.include_mode_imputed},
                  {"member_density", c.member_density.has_value()
                                         ? json(*c.member_density)
                                         : json(nullptr)}};
  j["trim"] = {{"q_s", c.trim.q_s}, {"q_e", c.trim.q_e}};
  if (c.sweep.has_value()) {
    j["sweep"] = {{"branch", c.sweep->branch.has_value()
                                 ? json(std::string(SampleOriginName(*c.sweep->branch)))
                                 : json(nullptr)},
                  {"step", c.sweep->step}};
  } else {
    j["sweep"] = nullptr;
  }
  j["simulator"] =
      c.simulator.has_value() ? SimulatorConfigToJson(*c.simulator) : json(nullptr);
  const InputPaths& in = c.inputs;
  j["inputs"] = {{"manifest", PathJson(in.manifest)},
                 {"signals", PathJson(in.signals)},
                 {"ranges", PathJson(in.ranges)},
                 {"pools", PathJson(in.pools)},
                 {"column_means", PathJson(in.column_means)},
                 {"population", PathJson(in.population)},
                 {"vocabulary", PathJson(in.vocabulary)},
                 {"fill_lists", PathJson(in.fill_lists)},
                 {"attack_sets", PathJson(in.attack_sets)},
                 {"candidates", PathJson(in.candidates)},
                 {"calibration_dir", PathJson(in.calibration_dir)}};
  j["repeat"] = {{"n_seeds", c.repeat_seeds}};
  j["eval"] = {{"fpr_targets", c.fpr_targets}};
  return j;
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
             nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string ConfigHash(const RunConfig& config) {
  return Sha256Hex(RunConfigToJson(config).dump()).substr(0, 16);
}

}  // namespace rangemia::cli
