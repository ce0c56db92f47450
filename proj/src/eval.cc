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

#include "rangemia/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "rangemia/io.h"
#include "rangemia/status_macros.h"

namespace rangemia {

using nlohmann::json;

absl::StatusOr<std::vector<RocPoint>> Roc(std::span<const double> scores,
                                          std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    return absl::InvalidArgumentError("scores and labels differ in length");
  }
  size_t positives = 0;
  for (int b : labels) {
    if (b != 0 && b != 1) {
      return absl::InvalidArgumentError(absl::StrCat("label ", b, " is not 0/1"));
    }
    positives += b;
  }
  const size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    return absl::FailedPreconditionError(
        "ROC needs at least one positive and one negative range");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> points = {{0.0, 0.0}};
  size_t tp = 0;
  size_t fp = 0;
  for (size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      (labels[order[i]] ? tp : fp) += 1;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                      static_cast<double>(tp) / static_cast<double>(positives)});
  }
  return points;
}

absl::StatusOr<std::vector<RocPoint>> Roc(std::span<const RangeScore> scores,
                                          std::span<const RangeLabel> labels) {
  std::map<std::string, int> by_id;
  for (const RangeLabel& l : labels) by_id[l.range_id] = l.bit;
  std::vector<double> s;
  std::vector<int> b;
  s.reserve(scores.size());
  b.reserve(scores.size());
  for (const RangeScore& rs : scores) {
    auto it = by_id.find(rs.range_id);
    if (it == by_id.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("range ", rs.range_id, " has a score but no label"));
    }
    s.push_back(rs.score);
    b.push_back(it->second);
  }
  return Roc(s, b);
}

absl::StatusOr<double> Auc(std::span<const RocPoint> points) {
  if (points.empty()) return absl::InvalidArgumentError("empty ROC");
  for (size_t i = 1; i < points.size(); ++i) {
    if (points[i].fpr < points[i - 1].fpr) {
      return absl::InvalidArgumentError("ROC points are not sorted by FPR");
    }
  }
  double area = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) *
            (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

absl::StatusOr<double> AucFromScores(std::span<const double> scores,
                                     std::span<const int> labels) {
  ASSIGN_OR_RETURN(std::vector<RocPoint> roc, Roc(scores, labels));
  return Auc(roc);
}

absl::StatusOr<std::vector<double>> TprAtFpr(std::span<const RocPoint> points,
                                             std::span<const double> targets) {
  if (targets.empty()) {
    return absl::InvalidArgumentError("no FPR targets given");
  }
  std::vector<double> out;
  out.reserve(targets.size());
  for (double target : targets) {
    if (!(target > 0.0 && target < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("FPR target ", target, " is outside (0, 1)"));
    }
    double best = 0.0;
    for (const RocPoint& p : points) {
      if (p.fpr <= target) best = std::max(best, p.tpr);
    }
    out.push_back(best);
  }
  return out;
}

double MidrankPercentile(double value, std::span<const double> sorted) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), value);
  const auto hi = std::upper_bound(lo, sorted.end(), value);
  const double below = static_cast<double>(lo - sorted.begin());
  const double tied = static_cast<double>(hi - lo);
  return (below + 0.5 * tied) / static_cast<double>(sorted.size());
}

absl::StatusOr<double> PearsonCorrelation(std::span<const double> x,
                                          std::span<const double> y) {
  if (x.size() != y.size()) {
    return absl::InvalidArgumentError("correlation inputs differ in length");
  }
  if (x.size() < 2) {
    return absl::FailedPreconditionError(
        "correlation needs at least two observations");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    return absl::FailedPreconditionError(
        "correlation undefined: an input has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

absl::StatusOr<double> PercentileCorrelation(
    std::span<const double> member_point_scores,
    std::span<const double> member_range_scores,
    std::span<const double> nonmember_point_scores,
    std::span<const double> nonmember_range_scores) {
  if (nonmember_point_scores.empty() || nonmember_range_scores.empty()) {
    return absl::InvalidArgumentError("non-member score sets must be non-empty");
  }
  if (member_point_scores.size() != member_range_scores.size()) {
    return absl::InvalidArgumentError(
        "member point and range score lists differ in length");
  }
  if (member_point_scores.size() < 2) {
    return absl::FailedPreconditionError(
        "percentile correlation needs at least two members");
  }
  std::vector<double> point_ref(nonmember_point_scores.begin(),
                                nonmember_point_scores.end());
  std::vector<double> range_ref(nonmember_range_scores.begin(),
                                nonmember_range_scores.end());
  std::sort(point_ref.begin(), point_ref.end());
  std::sort(range_ref.begin(), range_ref.end());
  std::vector<double> point_pct;
  std::vector<double> range_pct;
  for (size_t i = 0; i < member_point_scores.size(); ++i) {
    point_pct.push_back(MidrankPercentile(member_point_scores[i], point_ref));
    range_pct.push_back(MidrankPercentile(member_range_scores[i], range_ref));
  }
  return PearsonCorrelation(point_pct, range_pct);
}

absl::StatusOr<AttackEvaluation> EvaluateAttack(
    std::string attack, std::span<const RangeScore> scores,
    std::span<const RangeLabel> labels, std::vector<double> fpr_targets) {
  AttackEvaluation ev;
  ev.attack = std::move(attack);
  ASSIGN_OR_RETURN(ev.roc, Roc(scores, labels));
  ASSIGN_OR_RETURN(ev.auc, Auc(ev.roc));
  ASSIGN_OR_RETURN(ev.tpr_at_targets, TprAtFpr(ev.roc, fpr_targets));
  ev.fpr_targets = std::move(fpr_targets);
  ev.n_ranges = scores.size();
  return ev;
}

std::string TprKey(double fpr_target) {
  return absl::StrFormat("tpr@%g%%", fpr_target * 100.0);
}

namespace {

json AttackJson(const AttackEvaluation& ev) {
  json j;
  j["auc"] = ev.auc;
  j["n_ranges"] = ev.n_ranges;
  for (size_t i = 0; i < ev.fpr_targets.size(); ++i) {
    j[TprKey(ev.fpr_targets[i])] = ev.tpr_at_targets[i];
  }
  return j;
}

}  // namespace

json SummaryJson(const EvalReport& report) {
  json j = json::object();
  if (report.ramia.has_value()) j["ramia"] = AttackJson(*report.ramia);
  if (report.mia.has_value()) j["mia"] = AttackJson(*report.mia);
  if (report.mia.has_value() && report.ramia.has_value()) {
    j["delta"] = {{"auc", report.ramia->auc - report.mia->auc}};
  }
  if (report.percentile_correlation.has_value()) {
    j["percentile_correlation"] = *report.percentile_correlation;
  }
  if (report.trim.has_value()) {
    j["trim"] = {{"q_s", report.trim->q_s}, {"q_e", report.trim->q_e}};
  }
  j["seed"] = report.seed;
  return j;
}

std::string FormatRocCsv(std::span<const RocPoint> points) {
  std::string out = "fpr,tpr\n";
  for (const RocPoint& p : points) {
    absl::StrAppend(&out, FormatDouble(p.fpr), ",", FormatDouble(p.tpr), "\n");
  }
  return out;
}

absl::Status EmitReport(const std::filesystem::path& dir,
                        const EvalReport& report) {
  if (!report.mia.has_value() && !report.ramia.has_value()) {
    return absl::FailedPreconditionError(
        "nothing to report: no attack results were evaluated");
  }
  const AttackEvaluation& primary =
      report.ramia.has_value() ? *report.ramia : *report.mia;
  RETURN_IF_ERROR(WriteFile(dir / "roc.csv", FormatRocCsv(primary.roc)));
  if (report.mia.has_value() && report.ramia.has_value()) {
    RETURN_IF_ERROR(WriteFile(dir / "roc_mia.csv", FormatRocCsv(report.mia->roc)));
  }
  return WriteFile(dir / "summary.json", SummaryJson(report).dump(2) + "\n");
}

}  // namespace rangemia
