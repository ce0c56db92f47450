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

#include "rangemia/range_engine.h"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rangemia/io.h"
#include "rangemia/parallel.h"
#include "rangemia/rng.h"
#include "rangemia/status_macros.h"

namespace rangemia {

using nlohmann::json;

absl::StatusOr<bool> InRange(const RangeQuery& range, const DataRecord& record,
                             const CandidateProvider* pools) {
  switch (range.range_fn) {
    case RangeFunction::kMaskedColumns: {
      if (!range.center.is_binary() || !record.is_binary() ||
          range.center.length() != record.length()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "range ", range.range_id, ": record ", record.id,
            " does not match the binary schema of the center"));
      }
      const BitVector& c = range.center.bits();
      const BitVector& x = record.bits();
      std::vector<uint8_t> masked(c.size(), 0);
      for (int j : range.mask) {
        if (j < 0 || static_cast<size_t>(j) >= c.size()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "range ", range.range_id, ": mask index ", j, " out of bounds"));
        }
        masked[j] = 1;
      }
      for (size_t j = 0; j < c.size(); ++j) {
        if (!masked[j] && c[j] != x[j]) return false;
      }
      return true;
    }
    case RangeFunction::kHamming: {
      if (!range.center.is_tokens() || !record.is_tokens()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "range ", range.range_id, ": record ", record.id,
            " is not a token sequence"));
      }
      const TokenSequence& c = range.center.tokens();
      const TokenSequence& x = record.tokens();
      if (c.size() != x.size()) return false;
      int distance = 0;
      for (size_t j = 0; j < c.size(); ++j) distance += c[j] != x[j];
      return distance <= range.size;
    }
    case RangeFunction::kCandidatePool: {
      if (pools == nullptr || !range.pool_id.has_value()) {
        return absl::FailedPreconditionError(absl::StrCat(
            "range ", range.range_id, ": candidate pools not available"));
      }
      const auto* pool = pools->Find(*range.pool_id);
      if (pool == nullptr) {
        return absl::NotFoundError(absl::StrCat(
            "range ", range.range_id, ": unknown pool ", *range.pool_id));
      }
      const size_t limit = range.size > 0
                               ? std::min(pool->size(), static_cast<size_t>(range.size))
                               : pool->size();
      for (size_t i = 0; i < limit; ++i) {
        if ((*pool)[i].id == record.id) return true;
      }
      return false;
    }
  }
  return false;
}

absl::StatusOr<RangeLabel> LabelRange(const RangeQuery& range,
                                      std::span<const DataRecord> members,
                                      const CandidateProvider* pools) {
  RangeLabel label{range.range_id, 0};
  if (range.range_fn == RangeFunction::kCandidatePool &&
      range.center.identity_tag.has_value()) {
    for (const DataRecord& m : members) {
      if (m.identity_tag == range.center.identity_tag) {
        label.bit = 1;
        break;
      }
    }
    return label;
  }
  for (const DataRecord& m : members) {
    ASSIGN_OR_RETURN(bool inside, InRange(range, m, pools));
    if (inside) {
      label.bit = 1;
      break;
    }
  }
  return label;
}

std::vector<size_t> KeptSortedPositions(size_t n, const TrimConfig& trim) {
  std::vector<size_t> kept;
  const double dn = static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    // percentile = 100 (i+1) / n, compared without dividing.
    const double scaled = 100.0 * static_cast<double>(i + 1);
    const bool dropped = trim.q_s * dn < scaled && scaled <= trim.q_e * dn;
    if (!dropped) kept.push_back(i);
  }
  return kept;
}

absl::StatusOr<double> TrimmedAverage(std::span<const ScoredSample> samples,
                                      const TrimConfig& trim) {
  if (samples.empty()) {
    return absl::InvalidArgumentError("cannot aggregate an empty attack set");
  }
  RETURN_IF_ERROR(ValidateTrim(trim));
  std::vector<ScoredSample> sorted(samples.begin(), samples.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredSample& a, const ScoredSample& b) {
                     if (a.score != b.score) return a.score < b.score;
                     return a.id < b.id;
                   });
  std::vector<size_t> kept = KeptSortedPositions(sorted.size(), trim);
  if (kept.empty()) {
    kept.resize(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i) kept[i] = i;
  }
  double sum = 0.0;
  for (size_t i : kept) sum += sorted[i].score;
  const double mean = sum / static_cast<double>(kept.size());
  return std::clamp(mean, sorted[kept.front()].score, sorted[kept.back()].score);
}

absl::StatusOr<double> TrimmedAverage(std::span<const double> scores,
                                      const TrimConfig& trim) {
  std::vector<ScoredSample> samples(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    samples[i] = {static_cast<RecordId>(i), scores[i]};
  }
  return TrimmedAverage(samples, trim);
}

absl::StatusOr<RangeJob> ScoreRange(const RangeQuery& range,
                                    std::span<const RecordId> attack_set,
                                    const PointScorer& scorer,
                                    const TrimConfig& trim) {
  RangeJob job;
  job.range = range;
  job.attack_set.assign(attack_set.begin(), attack_set.end());
  job.trim = trim;
  std::vector<ScoredSample> samples;
  samples.reserve(attack_set.size());
  for (RecordId id : attack_set) {
    ASSIGN_OR_RETURN(double s, scorer.Score(id));
    job.scores.push_back(s);
    samples.push_back({id, s});
  }
  auto aggregated = TrimmedAverage(samples, trim);
  if (!aggregated.ok()) {
    return absl::Status(aggregated.status().code(),
                        absl::StrCat("range ", range.range_id, ": ",
                                     aggregated.status().message()));
  }
  job.aggregated = *aggregated;
  return job;
}

absl::StatusOr<std::vector<RangeJob>> ScoreRanges(
    std::span<const RangeQuery> ranges, std::span<const AttackSet> attack_sets,
    const PointScorer& scorer, const TrimConfig& trim, int jobs) {
  if (ranges.size() != attack_sets.size()) {
    return absl::InvalidArgumentError("one attack set per range is required");
  }
  std::vector<absl::StatusOr<RangeJob>> results(ranges.size(),
                                                absl::UnknownError("not run"));
  ParallelFor(ranges.size(), jobs, [&](size_t i) {
    results[i] = ScoreRange(ranges[i], attack_sets[i].candidates, scorer, trim);
  });
  std::vector<RangeJob> out;
  out.reserve(results.size());
  for (auto& r : results) {
    if (!r.ok()) return r.status();
    out.push_back(*std::move(r));
  }
  return out;
}

absl::StatusOr<std::vector<RangeScore>> PointBaselineScores(
    std::span<const RangeQuery> ranges, const PointScorer& scorer) {
  std::vector<RangeScore> out;
  out.reserve(ranges.size());
  for (const RangeQuery& r : ranges) {
    const RecordId query = r.query_id.value_or(r.center.id);
    ASSIGN_OR_RETURN(double s, scorer.Score(query));
    out.push_back({r.range_id, s});
  }
  return out;
}

absl::StatusOr<std::vector<RangeScore>> RangeAttackScores(
    std::span<const RangeQuery> ranges, std::span<const AttackSet> attack_sets,
    const PointScorer& scorer, const TrimConfig& trim, int jobs) {
  ASSIGN_OR_RETURN(std::vector<AttackSet> aligned,
                   AlignAttackSets(ranges, attack_sets));
  ASSIGN_OR_RETURN(std::vector<RangeJob> done,
                   ScoreRanges(ranges, aligned, scorer, trim, jobs));
  std::vector<RangeScore> out;
  out.reserve(done.size());
  for (const RangeJob& job : done) out.push_back({job.range.range_id, *job.aggregated});
  return out;
}

std::vector<TrimConfig> DefaultTrimGrid(SampleOrigin origin, double step) {
  std::vector<TrimConfig> grid;
  const int n = static_cast<int>(100.0 / step + 0.5);
  for (int i = 0; i <= n; ++i) {
    const double q = std::min(100.0, step * i);
    if (origin == SampleOrigin::kSynthetic) {
      grid.push_back({q, 100.0});
    } else {
      grid.push_back({0.0, q});
    }
  }
  return grid;
}

int PickTemporaryTarget(uint64_t seed, int n_refs) {
  Rng rng = MakeRng(seed, "temporary-target");
  std::uniform_int_distribution<int> pick(0, n_refs - 1);
  return pick(rng);
}

absl::StatusOr<SweepResult> SweepTrim(const SweepInput& input) {
  if (input.dataset == nullptr || input.signals == nullptr) {
    return absl::InvalidArgumentError("sweep needs calibration data and signals");
  }
  const int n_refs = input.signals->n_refs();
  if (n_refs < 2) {
    return absl::FailedPreconditionError(absl::StrCat(
        "sweeping the trim window needs >= 2 reference models, got ", n_refs));
  }
  if (input.members_by_model.size() != static_cast<size_t>(n_refs)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected a training set per reference model (", n_refs, "), got ",
        input.members_by_model.size()));
  }
  if (input.grid.empty()) return absl::InvalidArgumentError("empty trim grid");
  for (const TrimConfig& t : input.grid) RETURN_IF_ERROR(ValidateTrim(t));

  SweepResult result;
  result.temporary_target = PickTemporaryTarget(input.seed, n_refs);
  const int t = result.temporary_target;
  ASSIGN_OR_RETURN(SignalMatrix attack_view, input.signals->WithReferenceAsTarget(t));

  const std::set<RecordId> members(input.members_by_model[t].begin(),
                                   input.members_by_model[t].end());
  std::vector<DataRecord> member_records;
  for (RecordId id : members) {
    ASSIGN_OR_RETURN(const DataRecord* r, input.dataset->Get(id));
    member_records.push_back(*r);
  }
  std::vector<int> labels;
  for (const RangeQuery& range : input.ranges) {
    ASSIGN_OR_RETURN(RangeLabel label,
                     LabelRange(range, member_records, input.pools));
    labels.push_back(label.bit);
  }

  ScorerSpec scorer_spec = input.scorer;
  if (scorer_spec.kind == ScorerKind::kRmia) {
    scorer_spec.rmia.population_ids.clear();
    for (const DataRecord& r : input.dataset->records()) {
      if (!members.contains(r.id)) scorer_spec.rmia.population_ids.push_back(r.id);
    }
  }
  ASSIGN_OR_RETURN(std::unique_ptr<PointScorer> scorer,
                   MakeScorer(attack_view, scorer_spec));
  ASSIGN_OR_RETURN(std::vector<AttackSet> sets,
                   AlignAttackSets(input.ranges, input.attack_sets));

  // Per-sample scores do not depend on the window; compute them once.
  std::vector<std::vector<ScoredSample>> samples(sets.size());
  std::vector<absl::Status> errors(sets.size());
  ParallelFor(sets.size(), input.jobs, [&](size_t i) {
    for (RecordId id : sets[i].candidates) {
      auto s = scorer->Score(id);
      if (!s.ok()) {
        errors[i] = s.status();
        return;
      }
      samples[i].push_back({id, *s});
    }
  });
  for (const absl::Status& e : errors) RETURN_IF_ERROR(e);

  result.aucs.assign(input.grid.size(), 0.0);
  std::vector<absl::Status> grid_errors(input.grid.size());
  ParallelFor(input.grid.size(), input.jobs, [&](size_t g) {
    std::vector<double> range_scores;
    range_scores.reserve(samples.size());
    for (const auto& s : samples) {
      auto agg = TrimmedAverage(s, input.grid[g]);
      if (!agg.ok()) {
        grid_errors[g] = agg.status();
        return;
      }
      range_scores.push_back(*agg);
    }
    auto auc = AucFromScores(range_scores, labels);
    if (!auc.ok()) {
      grid_errors[g] = auc.status();
      return;
    }
    result.aucs[g] = *auc;
  });
  for (const absl::Status& e : grid_errors) RETURN_IF_ERROR(e);

  size_t best = 0;
  for (size_t g = 1; g < input.grid.size(); ++g) {
    const TrimConfig& a = input.grid[g];
    const TrimConfig& b = input.grid[best];
    const double wa = a.q_e - a.q_s;
    const double wb = b.q_e - b.q_s;
    if (result.aucs[g] > result.aucs[best] ||
        (result.aucs[g] == result.aucs[best] &&
         (wa < wb || (wa == wb && a.q_s < b.q_s)))) {
      best = g;
    }
  }
  result.best = input.grid[best];
  return result;
}

json RangeToJson(const RangeQuery& range) {
  json j;
  j["range_id"] = range.range_id;
  j["center"] = DataRecordToJson(range.center);
  j["range_fn"] = std::string(RangeFunctionName(range.range_fn));
  j["size"] = range.size;
  if (!range.mask.empty()) j["mask"] = range.mask;
  if (range.pool_id.has_value()) j["pool_id"] = *range.pool_id;
  if (range.query_id.has_value()) j["query_id"] = *range.query_id;
  return j;
}

absl::StatusOr<RangeQuery> RangeFromJson(const json& j, PayloadSchema schema) {
  if (!j.is_object()) return absl::InvalidArgumentError("range must be an object");
  RangeQuery range;
  auto id_it = j.find("range_id");
  if (id_it == j.end() || !id_it->is_string()) {
    return absl::InvalidArgumentError("range needs a string \"range_id\"");
  }
  range.range_id = id_it->get<std::string>();
  auto center_it = j.find("center");
  if (center_it == j.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("range ", range.range_id, ": missing \"center\""));
  }
  ASSIGN_OR_RETURN(range.center, DataRecordFromJson(*center_it, schema));
  auto fn_it = j.find("range_fn");
  if (fn_it == j.end() || !fn_it->is_string()) {
    return absl::InvalidArgumentError(
        absl::StrCat("range ", range.range_id, ": missing \"range_fn\""));
  }
  auto fn = ParseRangeFunction(fn_it->get<std::string>());
  if (!fn.has_value()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "range ", range.range_id, ": unknown range_fn ", fn_it->dump()));
  }
  range.range_fn = *fn;
  if (auto it = j.find("size"); it != j.end()) {
    if (!it->is_number_integer()) {
      return absl::InvalidArgumentError(
          absl::StrCat("range ", range.range_id, ": size must be an integer"));
    }
    range.size = it->get<int>();
  }
  if (auto it = j.find("mask"); it != j.end()) {
    if (!it->is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat("range ", range.range_id, ": mask must be an array"));
    }
    for (const json& v : *it) {
      if (!v.is_number_integer()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "range ", range.range_id, ": mask entries must be integers"));
      }
      range.mask.push_back(v.get<int>());
    }
  }
  if (auto it = j.find("pool_id"); it != j.end() && !it->is_null()) {
    range.pool_id = it->get<std::string>();
  }
  if (auto it = j.find("query_id"); it != j.end() && !it->is_null()) {
    range.query_id = it->get<RecordId>();
  }
  RETURN_IF_ERROR(ValidateRange(range));
  return range;
}

std::string FormatRanges(std::span<const RangeQuery> ranges) {
  json out = json::array();
  for (const RangeQuery& r : ranges) out.push_back(RangeToJson(r));
  return out.dump() + "\n";
}

absl::StatusOr<std::vector<RangeQuery>> ParseRanges(const json& j,
                                                    PayloadSchema schema) {
  if (!j.is_array()) return absl::InvalidArgumentError("ranges file must be an array");
  std::vector<RangeQuery> ranges;
  std::set<std::string> ids;
  for (const json& entry : j) {
    ASSIGN_OR_RETURN(RangeQuery r, RangeFromJson(entry, schema));
    if (!ids.insert(r.range_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate range id ", r.range_id));
    }
    ranges.push_back(std::move(r));
  }
  return ranges;
}

absl::StatusOr<std::vector<RangeQuery>> LoadRanges(
    const std::filesystem::path& path, PayloadSchema schema) {
  ASSIGN_OR_RETURN(json j, ReadJsonFile(path));
  return ParseRanges(j, schema);
}

std::string FormatAttackSets(std::span<const AttackSet> sets) {
  json out = json::array();
  for (const AttackSet& s : sets) {
    out.push_back({{"range_id", s.range_id}, {"candidates", s.candidates}});
  }
  return out.dump() + "\n";
}

absl::StatusOr<std::vector<AttackSet>> ParseAttackSets(const json& j) {
  if (!j.is_array()) {
    return absl::InvalidArgumentError("attack-set file must be an array");
  }
  std::vector<AttackSet> sets;
  for (const json& entry : j) {
    if (!entry.is_object() || !entry.contains("range_id") ||
        !entry.contains("candidates") || !entry["candidates"].is_array()) {
      return absl::InvalidArgumentError(
          "attack set needs \"range_id\" and a \"candidates\" array");
    }
    AttackSet s;
    s.range_id = entry["range_id"].get<std::string>();
    for (const json& v : entry["candidates"]) {
      if (!v.is_number_integer()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "attack set ", s.range_id, ": candidate ids must be integers"));
      }
      s.candidates.push_back(v.get<RecordId>());
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

absl::StatusOr<std::vector<AttackSet>> LoadAttackSets(
    const std::filesystem::path& path) {
  ASSIGN_OR_RETURN(json j, ReadJsonFile(path));
  return ParseAttackSets(j);
}

absl::StatusOr<std::vector<AttackSet>> AlignAttackSets(
    std::span<const RangeQuery> ranges, std::span<const AttackSet> sets) {
  std::map<std::string, const AttackSet*> by_id;
  for (const AttackSet& s : sets) by_id[s.range_id] = &s;
  std::vector<AttackSet> out;
  out.reserve(ranges.size());
  for (const RangeQuery& r : ranges) {
    auto it = by_id.find(r.range_id);
    if (it == by_id.end()) {
      return absl::NotFoundError(
          absl::StrCat("range ", r.range_id, " has no attack set"));
    }
    if (it->second->candidates.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("range ", r.range_id, " has an empty attack set"));
    }
    out.push_back(*it->second);
  }
  return out;
}

std::string FormatLabels(std::span<const RangeLabel> labels) {
  std::string out = "range_id,bit\n";
  for (const RangeLabel& l : labels) absl::StrAppend(&out, l.range_id, ",", l.bit, "\n");
  return out;
}

absl::StatusOr<std::vector<RangeLabel>> ParseLabels(std::string_view csv) {
  auto rows = SplitCsv(csv);
  if (rows.empty() || rows.front() != std::vector<std::string>{"range_id", "bit"}) {
    return absl::InvalidArgumentError("labels CSV needs header range_id,bit");
  }
  std::vector<RangeLabel> labels;
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2 || (rows[r][1] != "0" && rows[r][1] != "1")) {
      return absl::InvalidArgumentError(
          absl::StrCat("labels CSV line ", r + 1, ": expected range_id,0|1"));
    }
    labels.push_back({rows[r][0], rows[r][1] == "1" ? 1 : 0});
  }
  return labels;
}

std::string FormatRangeScores(std::span<const RangeScore> scores) {
  std::string out = "range_id,score\n";
  for (const RangeScore& s : scores) {
    absl::StrAppend(&out, s.range_id, ",", FormatDouble(s.score), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<RangeScore>> ParseRangeScores(std::string_view csv) {
  auto rows = SplitCsv(csv);
  if (rows.empty() ||
      rows.front() != std::vector<std::string>{"range_id", "score"}) {
    return absl::InvalidArgumentError("score CSV needs header range_id,score");
  }
  std::vector<RangeScore> scores;
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) {
      return absl::InvalidArgumentError(
          absl::StrCat("score CSV line ", r + 1, ": expected 2 fields"));
    }
    ASSIGN_OR_RETURN(double s, ParseDouble(rows[r][1]));
    scores.push_back({rows[r][0], s});
  }
  return scores;
}

}  // namespace rangemia
