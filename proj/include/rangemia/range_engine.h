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

#ifndef RANGEMIA_RANGE_ENGINE_H_
#define RANGEMIA_RANGE_ENGINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/dataset.h"
#include "rangemia/eval.h"
#include "rangemia/record.h"
#include "rangemia/samplers.h"
#include "rangemia/scorers.h"
#include "rangemia/signal_matrix.h"

namespace rangemia {

// Range predicate. Candidate-pool ranges need `pools`; the other kinds ignore
// it.
absl::StatusOr<bool> InRange(const RangeQuery& range, const DataRecord& record,
                             const CandidateProvider* pools = nullptr);

// Ground truth of the range game: 1 iff some member lies in the range. A
// candidate-pool range whose center carries an identity tag is an in-range
// iff some member shares that tag; without a tag, iff a member is pooled.
absl::StatusOr<RangeLabel> LabelRange(const RangeQuery& range,
                                      std::span<const DataRecord> members,
                                      const CandidateProvider* pools = nullptr);

struct ScoredSample {
  RecordId id = 0;
  double score = 0.0;
};

// Positions (0-based, into the ascending order) kept by the trim window for n
// samples: sample i+1 has percentile 100 * (i+1) / n and is dropped iff
// q_s < percentile <= q_e. Empty when everything is trimmed.
std::vector<size_t> KeptSortedPositions(size_t n, const TrimConfig& trim);

// One-sided trimmed mean. Samples are ordered by (score, id); when the window
// drops every sample the untrimmed mean is returned.
absl::StatusOr<double> TrimmedAverage(std::span<const ScoredSample> samples,
                                      const TrimConfig& trim);
absl::StatusOr<double> TrimmedAverage(std::span<const double> scores,
                                      const TrimConfig& trim);

// Sampled candidates of one range.
struct AttackSet {
  std::string range_id;
  std::vector<RecordId> candidates;
};

// State of one range through the scoring pipeline.
struct RangeJob {
  RangeQuery range;
  std::vector<RecordId> attack_set;
  std::vector<double> scores;
  TrimConfig trim;
  std::optional<double> aggregated;
};

// Scores every candidate with `scorer` and aggregates with the trimmed mean.
absl::StatusOr<RangeJob> ScoreRange(const RangeQuery& range,
                                    std::span<const RecordId> attack_set,
                                    const PointScorer& scorer,
                                    const TrimConfig& trim);

// Scores a batch of ranges; `attack_sets[i]` belongs to `ranges[i]`.
absl::StatusOr<std::vector<RangeJob>> ScoreRanges(
    std::span<const RangeQuery> ranges, std::span<const AttackSet> attack_sets,
    const PointScorer& scorer, const TrimConfig& trim, int jobs = 1);

// Range scores of the point baseline: each range is scored by its query
// record (`query_id`, falling back to the center id).
absl::StatusOr<std::vector<RangeScore>> PointBaselineScores(
    std::span<const RangeQuery> ranges, const PointScorer& scorer);

// Aggregated range scores for ranges and their (possibly unordered) attack
// sets.
absl::StatusOr<std::vector<RangeScore>> RangeAttackScores(
    std::span<const RangeQuery> ranges, std::span<const AttackSet> attack_sets,
    const PointScorer& scorer, const TrimConfig& trim, int jobs = 1);

// Which side of the trimmed mean a sampler's output calls for: real
// in-distribution samples keep q_s = 0 and sweep q_e; synthetic samples keep
// q_e = 100 and sweep q_s.
enum class SampleOrigin { kReal, kSynthetic };

std::vector<TrimConfig> DefaultTrimGrid(SampleOrigin origin, double step = 5.0);

// Calibration world for picking the trim window: reference models, each with
// its own training set, and ranges over records they were trained around.
struct SweepInput {
  const Dataset* dataset = nullptr;          // calibration records
  const SignalMatrix* signals = nullptr;     // columns ref_0..ref_{n-1} used
  std::vector<std::vector<RecordId>> members_by_model;
  std::vector<RangeQuery> ranges;
  std::vector<AttackSet> attack_sets;
  const CandidateProvider* pools = nullptr;
  ScorerSpec scorer;                         // population derived per model
  std::vector<TrimConfig> grid;
  uint64_t seed = 0;
  int jobs = 1;
};

struct SweepResult {
  TrimConfig best;
  int temporary_target = 0;
  std::vector<double> aucs;  // per grid point
};

// Picks one reference model (by seed) as the temporary target, attacks it
// with the others over every grid point and returns the highest-AUC window.
// Ties go to the narrower window, then to the lower q_s.
absl::StatusOr<SweepResult> SweepTrim(const SweepInput& input);

// Temporary target model a sweep with `seed` uses among `n_refs` models.
int PickTemporaryTarget(uint64_t seed, int n_refs);

// File formats.
nlohmann::json RangeToJson(const RangeQuery& range);
absl::StatusOr<RangeQuery> RangeFromJson(const nlohmann::json& json,
                                         PayloadSchema schema);
std::string FormatRanges(std::span<const RangeQuery> ranges);
absl::StatusOr<std::vector<RangeQuery>> ParseRanges(const nlohmann::json& json,
                                                    PayloadSchema schema);
absl::StatusOr<std::vector<RangeQuery>> LoadRanges(
    const std::filesystem::path& path, PayloadSchema schema);

std::string FormatAttackSets(std::span<const AttackSet> sets);
absl::StatusOr<std::vector<AttackSet>> ParseAttackSets(const nlohmann::json& json);
absl::StatusOr<std::vector<AttackSet>> LoadAttackSets(
    const std::filesystem::path& path);

// Puts attack sets in the order of `ranges`; every range needs one.
absl::StatusOr<std::vector<AttackSet>> AlignAttackSets(
    std::span<const RangeQuery> ranges, std::span<const AttackSet> sets);

std::string FormatLabels(std::span<const RangeLabel> labels);
absl::StatusOr<std::vector<RangeLabel>> ParseLabels(std::string_view csv);

std::string FormatRangeScores(std::span<const RangeScore> scores);
absl::StatusOr<std::vector<RangeScore>> ParseRangeScores(std::string_view csv);

}  // namespace rangemia

#endif  // RANGEMIA_RANGE_ENGINE_H_
