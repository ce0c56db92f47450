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

#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "rangemia/io.h"
#include "test_util.h"

namespace rangemia {
namespace {

double MannWhitney(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  double pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// Largest TPR over thresholds t (predict in iff score >= t) whose FPR stays
// at or under `target`.
double BruteTprAtFpr(const std::vector<double>& s, const std::vector<int>& y,
                     double target) {
  double pos = 0, neg = 0;
  for (int b : y) (b ? pos : neg) += 1;
  double best = 0;
  std::vector<double> thresholds = s;
  thresholds.push_back(1e300);
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp) += 1;
    }
    if (fp / neg <= target) best = std::max(best, tp / pos);
  }
  return best;
}

TEST(RocTest, PerfectSeparation) {
  const std::vector<double> s = {1, 1, 0, 0};
  const std::vector<int> y = {1, 1, 0, 0};
  ASSERT_OK_AND_ASSIGN(auto roc, Roc(s, y));
  EXPECT_EQ(roc, (std::vector<RocPoint>{{0, 0}, {0, 1}, {1, 1}}));
  EXPECT_DOUBLE_EQ(*Auc(roc), 1.0);
  const std::vector<double> targets = {0.01};
  EXPECT_EQ(*TprAtFpr(roc, targets), (std::vector<double>{1.0}));
}

TEST(RocTest, AllTiedIsOneStep) {
  const std::vector<double> s = {0.3, 0.3, 0.3};
  const std::vector<int> y = {1, 0, 1};
  ASSERT_OK_AND_ASSIGN(auto roc, Roc(s, y));
  EXPECT_EQ(roc, (std::vector<RocPoint>{{0, 0}, {1, 1}}));
  EXPECT_DOUBLE_EQ(*Auc(roc), 0.5);
  const std::vector<double> targets = {0.01};
  EXPECT_EQ(*TprAtFpr(roc, targets), (std::vector<double>{0.0}));
}

TEST(RocTest, ThreePointInstance) {
  const std::vector<double> s = {0.9, 0.4, 0.6};
  const std::vector<int> y = {1, 1, 0};
  ASSERT_OK_AND_ASSIGN(auto roc, Roc(s, y));
  EXPECT_EQ(roc, (std::vector<RocPoint>{{0, 0}, {0, 0.5}, {1, 0.5}, {1, 1}}));
  EXPECT_DOUBLE_EQ(*Auc(roc), 0.5);
}

TEST(RocTest, Errors) {
  const std::vector<double> s = {0.1, 0.2};
  EXPECT_EQ(Roc(s, std::vector<int>{1, 1}).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(Roc(s, std::vector<int>{1}).ok());
  EXPECT_FALSE(Roc(s, std::vector<int>{1, 2}).ok());
  EXPECT_FALSE(Auc(std::vector<RocPoint>{{0.5, 0.5}, {0.1, 1}}).ok());
  EXPECT_FALSE(Auc(std::vector<RocPoint>{}).ok());
  const std::vector<RangeScore> scored = {{"a", 0.1}, {"b", 0.2}};
  const std::vector<RangeLabel> labels = {{"a", 1}, {"c", 0}};
  EXPECT_FALSE(Roc(scored, labels).ok());
  ASSERT_OK_AND_ASSIGN(auto roc, Roc(s, std::vector<int>{0, 1}));
  EXPECT_FALSE(TprAtFpr(roc, std::vector<double>{}).ok());
}

TEST(RocTest, RangeScoresMatchByRangeId) {
  const std::vector<RangeScore> scored = {{"a", 0.9}, {"b", 0.1}};
  const std::vector<RangeLabel> labels = {{"b", 0}, {"a", 1}};
  ASSERT_OK_AND_ASSIGN(auto roc, Roc(scored, labels));
  EXPECT_DOUBLE_EQ(*Auc(roc), 1.0);
}

TEST(AucPropertyTest, RandomInstances) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> size(2, 200);
    std::uniform_int_distribution<int> level(0, 9);
    const int n = size(rng);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = level(rng) / 10.0;
      y[i] = static_cast<int>(rng() & 1);
    }
    y[0] = 1;
    y[1] = 0;
    ASSERT_OK_AND_ASSIGN(auto roc, Roc(s, y));
    for (size_t i = 1; i < roc.size(); ++i) {
      EXPECT_GE(roc[i].fpr, roc[i - 1].fpr);
      EXPECT_GE(roc[i].tpr, roc[i - 1].tpr);
    }
    EXPECT_EQ(roc.front(), (RocPoint{0, 0}));
    EXPECT_EQ(roc.back(), (RocPoint{1, 1}));
    ASSERT_OK_AND_ASSIGN(double auc, Auc(roc));
    EXPECT_NEAR(auc, MannWhitney(s, y), 1e-12);

    std::vector<int> flipped(y);
    for (int& b : flipped) b = 1 - b;
    EXPECT_NEAR(*AucFromScores(s, flipped), 1.0 - auc, 1e-12);

    const std::vector<double> targets = {0.001, 0.01, 0.1, 0.3, 0.5, 0.999};
    ASSERT_OK_AND_ASSIGN(auto tprs, TprAtFpr(roc, targets));
    for (size_t k = 0; k < targets.size(); ++k) {
      EXPECT_DOUBLE_EQ(tprs[k], BruteTprAtFpr(s, y, targets[k]));
      if (k > 0) {
        EXPECT_GE(tprs[k], tprs[k - 1]);
      }
    }
  }
}

TEST(PercentileTest, Midrank) {
  const std::vector<double> dist = {0.1, 0.2, 0.2, 0.4};
  EXPECT_DOUBLE_EQ(MidrankPercentile(0.0, dist), 0.0);
  EXPECT_DOUBLE_EQ(MidrankPercentile(0.2, dist), 0.5);
  EXPECT_DOUBLE_EQ(MidrankPercentile(0.3, dist), 0.75);
  EXPECT_DOUBLE_EQ(MidrankPercentile(1.0, dist), 1.0);
}

TEST(CorrelationTest, Examples) {
  const std::vector<double> x = {0.1, 0.9};
  EXPECT_DOUBLE_EQ(*PearsonCorrelation(x, x), 1.0);
  EXPECT_DOUBLE_EQ(*PearsonCorrelation(x, std::vector<double>{0.9, 0.1}), -1.0);
  EXPECT_FALSE(PearsonCorrelation(std::vector<double>{1}, std::vector<double>{1}).ok());
  EXPECT_FALSE(PearsonCorrelation(x, std::vector<double>{1, 1}).ok());

  const std::vector<double> non = {0.0, 0.2, 0.4, 0.6, 0.8};
  const std::vector<double> members = {0.1, 0.5, 0.9};
  EXPECT_NEAR(*PercentileCorrelation(members, members, non, non), 1.0, 1e-12);
  const std::vector<double> reversed = {0.9, 0.5, 0.1};
  EXPECT_NEAR(*PercentileCorrelation(members, reversed, non, non), -1.0, 1e-12);
  EXPECT_FALSE(PercentileCorrelation(std::vector<double>{0.1}, std::vector<double>{0.1},
                                     non, non)
                   .ok());
  EXPECT_FALSE(PercentileCorrelation(members, members, {}, non).ok());
}

TEST(ReportTest, TprKeys) {
  EXPECT_EQ(TprKey(0.01), "tpr@1%");
  EXPECT_EQ(TprKey(0.001), "tpr@0.1%");
}

AttackEvaluation FixedEvaluation(std::string name, double auc) {
  AttackEvaluation ev;
  ev.attack = std::move(name);
  ev.roc = {{0, 0}, {0.5, 0.8}, {1, 1}};
  ev.auc = auc;
  ev.fpr_targets = {0.01, 0.001};
  ev.tpr_at_targets = {0.2, 0.1};
  ev.n_ranges = 10;
  return ev;
}

TEST(ReportTest, EmptyReportIsRefused) {
  const auto dir = testing::TempDir("report_empty");
  EXPECT_EQ(EmitReport(dir, EvalReport{}).code(), absl::StatusCode::kFailedPrecondition);
}

TEST(ReportTest, DeltaAndDeterminism) {
  EvalReport report;
  report.mia = FixedEvaluation("mia", 0.632);
  report.ramia = FixedEvaluation("ramia", 0.657);
  report.trim = TrimConfig{45, 100};
  report.seed = 3;
  const nlohmann::json summary = SummaryJson(report);
  EXPECT_NEAR(summary["delta"]["auc"].get<double>(), 0.025, 1e-12);
  EXPECT_EQ(summary["ramia"]["tpr@1%"], 0.2);
  EXPECT_EQ(summary["ramia"]["n_ranges"], 10);
  EXPECT_EQ(summary["trim"]["q_s"], 45.0);
  EXPECT_EQ(summary["seed"], 3);

  const auto a = testing::TempDir("report_a");
  const auto b = testing::TempDir("report_b");
  ASSERT_OK(EmitReport(a, report));
  ASSERT_OK(EmitReport(b, report));
  for (const char* f : {"roc.csv", "roc_mia.csv", "summary.json"}) {
    EXPECT_EQ(*ReadFile(a / f), *ReadFile(b / f)) << f;
  }
  EXPECT_EQ(*ReadFile(a / "roc.csv"), "fpr,tpr\n0,0\n0.5,0.8\n1,1\n");
}

TEST(ReportTest, EvaluateAttack) {
  const std::vector<RangeScore> scored = {{"a", 0.9}, {"b", 0.1}, {"c", 0.5}};
  const std::vector<RangeLabel> labels = {{"a", 1}, {"b", 0}, {"c", 0}};
  ASSERT_OK_AND_ASSIGN(AttackEvaluation ev,
                       EvaluateAttack("ramia", scored, labels, {0.01}));
  EXPECT_DOUBLE_EQ(ev.auc, 1.0);
  EXPECT_EQ(ev.n_ranges, 3u);
  EXPECT_EQ(ev.tpr_at_targets, (std::vector<double>{1.0}));
}

}  // namespace
}  // namespace rangemia
