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

#ifndef RANGEMIA_EVAL_H_
#define RANGEMIA_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/record.h"

namespace rangemia {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RangeScore {
  std::string range_id;
  double score = 0.0;
};

// ROC of range-level predictions. Thresholds run over the distinct scores in
// descending order and each tie group moves the curve in one step, so the
// result always starts at (0,0) and ends at (1,1).
absl::StatusOr<std::vector<RocPoint>> Roc(std::span<const double> scores,
                                          std::span<const int> labels);
absl::StatusOr<std::vector<RocPoint>> Roc(std::span<const RangeScore> scores,
                                          std::span<const RangeLabel> labels);

// Trapezoidal area under an FPR-sorted ROC.
absl::StatusOr<double> Auc(std::span<const RocPoint> points);

// Convenience: AUC straight from scores and labels.
absl::StatusOr<double> AucFromScores(std::span<const double> scores,
                                     std::span<const int> labels);

// Largest TPR reached at FPR <= target, per target (step function).
absl::StatusOr<std::vector<double>> TprAtFpr(std::span<const RocPoint> points,
                                             std::span<const double> targets);

// Midrank percentile of `value` within `distribution`, in [0, 1]: the
// fraction strictly below plus half the fraction tied.
double MidrankPercentile(double value, std::span<const double> sorted_distribution);

// Pearson correlation between each member's percentile among non-members
// under the point attack and under the range attack.
absl::StatusOr<double> PercentileCorrelation(
    std::span<const double> member_point_scores,
    std::span<const double> member_range_scores,
    std::span<const double> nonmember_point_scores,
    std::span<const double> nonmember_range_scores);

absl::StatusOr<double> PearsonCorrelation(std::span<const double> x,
                                          std::span<const double> y);

// Evaluation of one attack over a set of labelled ranges.
struct AttackEvaluation {
  std::string attack;
  std::vector<RocPoint> roc;
  double auc = 0.0;
  std::vector<double> fpr_targets;
  std::vector<double> tpr_at_targets;
  size_t n_ranges = 0;
};

absl::StatusOr<AttackEvaluation> EvaluateAttack(
    std::string attack, std::span<const RangeScore> scores,
    std::span<const RangeLabel> labels, std::vector<double> fpr_targets);

struct EvalReport {
  std::optional<AttackEvaluation> mia;
  std::optional<AttackEvaluation> ramia;
  std::optional<double> percentile_correlation;
  std::optional<TrimConfig> trim;
  uint64_t seed = 0;
};

// Key used in summaries for a TPR@FPR target, e.g. 0.01 -> "tpr@1%".
std::string TprKey(double fpr_target);

nlohmann::json SummaryJson(const EvalReport& report);
std::string FormatRocCsv(std::span<const RocPoint> points);

// Writes roc.csv (range attack when present, else the point attack),
// roc_mia.csv when both attacks are present, and summary.json (with the AUC
// delta when both are present).
absl::Status EmitReport(const std::filesystem::path& dir,
                        const EvalReport& report);

}  // namespace rangemia

#endif  // RANGEMIA_EVAL_H_
