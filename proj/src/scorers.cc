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

#include "rangemia/scorers.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rangemia/status_macros.h"

namespace rangemia {

namespace {

absl::Status ValidateRmiaConfig(const SignalMatrix& signals,
                                const RmiaConfig& config) {
  if (signals.n_refs() < 1) {
    return absl::FailedPreconditionError(
        "offline RMIA needs at least one reference model");
  }
  if (!(config.a >= 0.0 && config.a <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("RMIA a must lie in [0, 1], got ", config.a));
  }
  if (!(config.gamma > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("RMIA gamma must be positive, got ", config.gamma));
  }
  return absl::OkStatus();
}

double Marginal(std::span<const double> refs, double a) {
  double sum = 0.0;
  for (double v : refs) sum += v;
  const double mean_out = sum / static_cast<double>(refs.size());
  const double p_in = a * mean_out + (1.0 - a);
  return 0.5 * p_in + 0.5 * mean_out;
}

absl::StatusOr<double> LikelihoodRatio(RecordId id, const SignalMatrix& signals,
                                       double a) {
  ASSIGN_OR_RETURN(size_t row, signals.Row(id));
  return signals.target(row) / Marginal(signals.references(row), a);
}

bool Dominates(double ratio_x, double ratio_z, double gamma) {
  return ratio_x / ratio_z >= gamma;
}

}  // namespace

absl::StatusOr<double> LossScore(RecordId id, const SignalMatrix& signals) {
  ASSIGN_OR_RETURN(double p, signals.Target(id));
  const double loss = -std::log(p);
  return std::exp(-loss);
}

absl::StatusOr<double> RmiaMarginal(RecordId id, const SignalMatrix& signals,
                                    const RmiaConfig& config) {
  RETURN_IF_ERROR(ValidateRmiaConfig(signals, config));
  ASSIGN_OR_RETURN(size_t row, signals.Row(id));
  return Marginal(signals.references(row), config.a);
}

absl::StatusOr<double> RmiaScore(RecordId id, const SignalMatrix& signals,
                                 const RmiaConfig& config) {
  RETURN_IF_ERROR(ValidateRmiaConfig(signals, config));
  if (config.population_ids.empty()) {
    return absl::FailedPreconditionError("RMIA population Z is empty");
  }
  ASSIGN_OR_RETURN(double ratio_x, LikelihoodRatio(id, signals, config.a));
  size_t dominated = 0;
  for (RecordId z : config.population_ids) {
    ASSIGN_OR_RETURN(double ratio_z, LikelihoodRatio(z, signals, config.a));
    if (Dominates(ratio_x, ratio_z, config.gamma)) ++dominated;
  }
  return static_cast<double>(dominated) /
         static_cast<double>(config.population_ids.size());
}

absl::StatusOr<std::unique_ptr<RmiaScorer>> RmiaScorer::Create(
    const SignalMatrix& signals, RmiaConfig config) {
  RETURN_IF_ERROR(ValidateRmiaConfig(signals, config));
  if (config.population_ids.empty()) {
    return absl::FailedPreconditionError("RMIA population Z is empty");
  }
  std::vector<double> ratios;
  ratios.reserve(config.population_ids.size());
  for (RecordId z : config.population_ids) {
    ASSIGN_OR_RETURN(double r, LikelihoodRatio(z, signals, config.a));
    ratios.push_back(r);
  }
  std::sort(ratios.begin(), ratios.end());
  return std::unique_ptr<RmiaScorer>(
      new RmiaScorer(signals, std::move(config), std::move(ratios)));
}

absl::StatusOr<double> RmiaScorer::Ratio(RecordId id) const {
  return LikelihoodRatio(id, signals_, config_.a);
}

absl::StatusOr<double> RmiaScorer::Score(RecordId id) const {
  ASSIGN_OR_RETURN(double ratio_x, Ratio(id));
  const double gamma = config_.gamma;
  // Dominated points form a prefix of the ascending ratios.
  auto end = std::partition_point(
      sorted_population_ratios_.begin(), sorted_population_ratios_.end(),
      [&](double ratio_z) { return Dominates(ratio_x, ratio_z, gamma); });
  const auto dominated = end - sorted_population_ratios_.begin();
  return static_cast<double>(dominated) /
         static_cast<double>(sorted_population_ratios_.size());
}

absl::StatusOr<std::unique_ptr<PointScorer>> MakeScorer(
    const SignalMatrix& signals, const ScorerSpec& spec) {
  if (spec.kind == ScorerKind::kLoss) {
    return std::unique_ptr<PointScorer>(new LossScorer(signals));
  }
  ASSIGN_OR_RETURN(std::unique_ptr<RmiaScorer> rmia,
                   RmiaScorer::Create(signals, spec.rmia));
  return std::unique_ptr<PointScorer>(std::move(rmia));
}

absl::Status CheckPopulationDisjoint(std::span<const RecordId> population,
                                     std::span<const RecordId> member_ids) {
  std::set<RecordId> members(member_ids.begin(), member_ids.end());
  for (RecordId z : population) {
    if (members.contains(z)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "population record ", z, " is a training-set member"));
    }
  }
  return absl::OkStatus();
}

}  // namespace rangemia
