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
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace rangemia {
namespace {

DataRecord Bits(RecordId id, BitVector bits, Split split = Split::kUnknown) {
  DataRecord r;
  r.id = id;
  r.payload = std::move(bits);
  r.split = split;
  return r;
}

DataRecord Words(RecordId id, std::string_view text) {
  DataRecord r;
  r.id = id;
  r.payload = Tokenize(text);
  return r;
}

RangeQuery HammingRange(const DataRecord& center, int size) {
  RangeQuery range;
  range.range_id = "h";
  range.center = center;
  range.range_fn = RangeFunction::kHamming;
  range.size = size;
  return range;
}

RangeQuery PoolRange(std::string range_id, std::string pool_id) {
  RangeQuery range;
  range.range_id = std::move(range_id);
  range.center = Bits(-2, {0});
  range.range_fn = RangeFunction::kCandidatePool;
  range.pool_id = std::move(pool_id);
  return range;
}

// Independent trimmed mean: percentiles as exact fractions, kept items
// collected longhand.
double OracleTrimmedMean(std::vector<double> xs, int q_s, int q_e) {
  std::sort(xs.begin(), xs.end());
  const int n = static_cast<int>(xs.size());
  double sum = 0;
  int kept = 0;
  for (int rank = 1; rank <= n; ++rank) {
    // percentile 100 * rank / n lies in (q_s, q_e] iff
    // q_s * n < 100 * rank and 100 * rank <= q_e * n.
    const int num = 100 * rank;
    const bool inside = q_s * n < num && num <= q_e * n;
    if (!inside) {
      sum += xs[rank - 1];
      ++kept;
    }
  }
  if (kept == 0) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  }
  return sum / kept;
}

TEST(InRangeTest, MaskedColumns) {
  const RangeQuery range = MakeMaskedRange("r", Bits(1, {1, 0, 1, 1}), {1, 2});
  EXPECT_TRUE(*InRange(range, Bits(1, {1, 0, 1, 1})));
  EXPECT_TRUE(*InRange(range, Bits(2, {1, 1, 0, 1})));
  EXPECT_FALSE(*InRange(range, Bits(3, {0, 0, 1, 1})));
  const RangeQuery all = MakeMaskedRange("all", Bits(1, {1, 0, 1, 1}), {0, 1, 2, 3});
  EXPECT_TRUE(*InRange(all, Bits(4, {0, 1, 0, 0})));
  EXPECT_FALSE(InRange(range, Bits(5, {1, 0})).ok());
  EXPECT_FALSE(InRange(range, Words(6, "a b c d")).ok());
}

TEST(InRangeTest, HammingCountsDifferingWords) {
  const DataRecord center = Words(1, "one two three four five");
  const DataRecord other = Words(2, "one TWO THREE four FIVE");
  EXPECT_FALSE(*InRange(HammingRange(center, 2), other));
  EXPECT_TRUE(*InRange(HammingRange(center, 3), other));
  EXPECT_TRUE(*InRange(HammingRange(center, 0), center));
  EXPECT_FALSE(*InRange(HammingRange(center, 9), Words(3, "one two three four")));
  EXPECT_FALSE(InRange(HammingRange(center, 1), Bits(4, {1})).ok());
}

TEST(InRangeTest, CandidatePoolUsesMembershipOfPool) {
  CandidateProvider pools;
  pools.AddPool("p", {Bits(1, {0}), Bits(2, {0}), Bits(3, {0})});
  RangeQuery range = PoolRange("r", "p");
  EXPECT_TRUE(*InRange(range, Bits(2, {0}), &pools));
  EXPECT_FALSE(*InRange(range, Bits(7, {0}), &pools));
  range.size = 1;
  EXPECT_FALSE(*InRange(range, Bits(2, {0}), &pools));
  EXPECT_EQ(InRange(range, Bits(2, {0})).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(InRange(PoolRange("r", "missing"), Bits(2, {0}), &pools).status().code(),
            absl::StatusCode::kNotFound);
}

TEST(LabelRangeTest, EmptyMembersGiveZero) {
  const RangeQuery range = MakeMaskedRange("r", Bits(1, {1, 1}), {0});
  ASSERT_OK_AND_ASSIGN(RangeLabel label, LabelRange(range, {}));
  EXPECT_EQ(label.bit, 0);
  EXPECT_EQ(label.range_id, "r");
}

TEST(LabelRangeTest, SelfMatchAndCollision) {
  BitVector member_bits(600, 0);
  for (int j = 0; j < 600; j += 3) member_bits[j] = 1;
  const DataRecord member = Bits(1, member_bits, Split::kMember);
  const std::vector<DataRecord> members = {member};

  ASSERT_OK_AND_ASSIGN(RangeLabel self,
                       LabelRange(MakeMaskedRange("self", member, {0, 3, 7}), members));
  EXPECT_EQ(self.bit, 1);

  // A held-out record that differs from the member only on the masked
  // columns collides with it and becomes an in-range.
  BitVector test_bits = member_bits;
  std::vector<int> mask;
  for (int j = 0; j < 10; ++j) {
    mask.push_back(j * 50);
    test_bits[j * 50] ^= 1;
  }
  const DataRecord test = Bits(2, test_bits, Split::kNonmember);
  ASSERT_OK_AND_ASSIGN(RangeLabel collision,
                       LabelRange(MakeMaskedRange("c", test, mask), members));
  EXPECT_EQ(collision.bit, 1);

  mask.pop_back();
  ASSERT_OK_AND_ASSIGN(RangeLabel apart,
                       LabelRange(MakeMaskedRange("a", test, mask), members));
  EXPECT_EQ(apart.bit, 0);
}

TEST(LabelRangeTest, PoolRangesUseIdentityTagWhenPresent) {
  CandidateProvider pools;
  pools.AddPool("p", {Bits(5, {0}), Bits(6, {0})});
  DataRecord m = Bits(9, {0}, Split::kMember);
  m.identity_tag = "alice";
  RangeQuery tagged = PoolRange("t", "p");
  tagged.center.identity_tag = "alice";
  EXPECT_EQ(LabelRange(tagged, std::vector<DataRecord>{m}, &pools)->bit, 1);
  tagged.center.identity_tag = "bob";
  EXPECT_EQ(LabelRange(tagged, std::vector<DataRecord>{m}, &pools)->bit, 0);

  const RangeQuery untagged = PoolRange("u", "p");
  EXPECT_EQ(LabelRange(untagged, std::vector<DataRecord>{m}, &pools)->bit, 0);
  const DataRecord pooled = Bits(6, {0}, Split::kMember);
  EXPECT_EQ(LabelRange(untagged, std::vector<DataRecord>{pooled}, &pools)->bit, 1);
}

TEST(LabelRangeTest, SizeZeroIsPointMembership) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DataRecord> members;
    for (int i = 0; i < 4; ++i) {
      BitVector b(4);
      for (auto& v : b) v = coin(rng);
      members.push_back(Bits(i, b, Split::kMember));
    }
    BitVector c(4);
    for (auto& v : c) v = coin(rng);
    const DataRecord center = Bits(100, c);
    bool point_member = false;
    for (const DataRecord& m : members) point_member |= m.bits() == c;
    ASSERT_OK_AND_ASSIGN(RangeLabel label,
                         LabelRange(MakeMaskedRange("z", center, {}), members));
    EXPECT_EQ(label.bit, point_member ? 1 : 0);
  }
  const DataRecord sentence = Words(1, "a b c");
  EXPECT_EQ(LabelRange(HammingRange(sentence, 0), std::vector{Words(2, "a b c")})->bit, 1);
  EXPECT_EQ(LabelRange(HammingRange(sentence, 0), std::vector{Words(2, "a b d")})->bit, 0);
}

TEST(TrimmedAverageTest, Examples) {
  const std::vector<double> xs = {1, 2, 3, 4};
  for (double q : {0.0, 25.0, 60.0, 100.0}) {
    EXPECT_DOUBLE_EQ(*TrimmedAverage(xs, {q, q}), 2.5);
  }
  EXPECT_DOUBLE_EQ(*TrimmedAverage(xs, {0, 50}), 3.5);
  EXPECT_DOUBLE_EQ(*TrimmedAverage(std::vector<double>{5}, {0, 25}), 5.0);
  EXPECT_DOUBLE_EQ(*TrimmedAverage(xs, {0, 100}), 2.5);
  EXPECT_DOUBLE_EQ(*TrimmedAverage(std::vector<double>{4, 1, 3, 2}, {50, 100}), 1.5);
}

TEST(TrimmedAverageTest, Errors) {
  EXPECT_FALSE(TrimmedAverage(std::vector<double>{}, {0, 100}).ok());
  EXPECT_FALSE(TrimmedAverage(std::vector<double>{1}, {60, 40}).ok());
  EXPECT_FALSE(TrimmedAverage(std::vector<double>{1}, {-1, 40}).ok());
  EXPECT_FALSE(TrimmedAverage(std::vector<double>{1}, {0, 101}).ok());
}

TEST(TrimmedAverageTest, KeptCountsForCommonSettings) {
  std::vector<size_t> first9(9), first6(6);
  std::iota(first9.begin(), first9.end(), 0);
  std::iota(first6.begin(), first6.end(), 0);
  EXPECT_EQ(KeptSortedPositions(20, {45, 100}), first9);
  EXPECT_EQ(KeptSortedPositions(15, {40, 100}), first6);
  EXPECT_EQ(KeptSortedPositions(1, {0, 25}), (std::vector<size_t>{0}));
}

TEST(TrimmedAverageTest, MatchesOracleExhaustively) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> value(0, 5);
  const int grid[] = {0, 25, 50, 75, 100};
  for (int n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> xs(n);
      for (double& x : xs) x = value(rng) / 5.0;
      for (int q_s : grid) {
        for (int q_e : grid) {
          if (q_s > q_e) continue;
          ASSERT_OK_AND_ASSIGN(double got, TrimmedAverage(xs, {double(q_s), double(q_e)}));
          EXPECT_NEAR(got, OracleTrimmedMean(xs, q_s, q_e), 1e-12)
              << "n=" << n << " q_s=" << q_s << " q_e=" << q_e;
        }
      }
    }
  }
}

TEST(TrimmedAverageTest, Properties) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> q(0, 100);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 30;
    std::vector<double> xs(n);
    for (double& x : xs) x = u(rng);
    int a = q(rng), b = q(rng);
    const TrimConfig trim{double(std::min(a, b)), double(std::max(a, b))};
    ASSERT_OK_AND_ASSIGN(double t, TrimmedAverage(xs, trim));
    EXPECT_GE(t, *std::min_element(xs.begin(), xs.end()));
    EXPECT_LE(t, *std::max_element(xs.begin(), xs.end()));

    std::vector<double> shuffled = xs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(*TrimmedAverage(shuffled, trim), t, 1e-12);

    // Raising the largest kept score keeps the partition and cannot lower the
    // mean.
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const auto kept = KeptSortedPositions(n, trim);
    if (!kept.empty() && kept.back() == static_cast<size_t>(n - 1)) {
      sorted.back() += 0.5;
      EXPECT_GE(*TrimmedAverage(sorted, trim), t - 1e-12);
    }
    if (kept.size() == static_cast<size_t>(n)) {
      EXPECT_NEAR(t, std::accumulate(xs.begin(), xs.end(), 0.0) / n, 1e-12);
    }
  }
}

TEST(TrimmedAverageTest, TiesBreakById) {
  const std::vector<ScoredSample> samples = {{3, 0.5}, {1, 0.5}, {2, 0.9}};
  ASSERT_OK_AND_ASSIGN(double t, TrimmedAverage(samples, {50, 100}));
  EXPECT_DOUBLE_EQ(t, 0.5);
}

TEST(DefaultTrimGridTest, BranchesSweepOppositeEnds) {
  const auto synthetic = DefaultTrimGrid(SampleOrigin::kSynthetic, 25);
  ASSERT_EQ(synthetic.size(), 5u);
  EXPECT_EQ(synthetic[1], (TrimConfig{25, 100}));
  const auto real = DefaultTrimGrid(SampleOrigin::kReal, 25);
  EXPECT_EQ(real[3], (TrimConfig{0, 75}));
}

// Four pool ranges over records 0..15; members 0 and 4 make r0 and r1
// in-ranges. In-ranges have flat scores of 0.5; out-ranges mix 0.1 and 1.0.
// Keeping the lowest half separates perfectly, the plain mean inverts.
struct SweepWorld {
  Dataset dataset;
  SignalMatrix signals;
  CandidateProvider pools;
  std::vector<RangeQuery> ranges;
  std::vector<AttackSet> sets;
};

SweepWorld MakeSweepWorld(int n_refs) {
  SweepWorld w;
  std::vector<DataRecord> records;
  std::vector<RecordId> ids;
  std::vector<double> target, refs;
  for (int i = 0; i < 16; ++i) {
    records.push_back(Bits(i, {uint8_t(i & 1), uint8_t(i >> 1 & 1),
                               uint8_t(i >> 2 & 1), uint8_t(i >> 3 & 1)}));
    ids.push_back(i);
    const bool in_range = i < 8;
    const double s = in_range ? 0.5 : (i % 4 < 2 ? 0.1 : 1.0);
    target.push_back(0.3);
    for (int k = 0; k < n_refs; ++k) refs.push_back(s);
  }
  w.dataset = *Dataset::Create(PayloadSchema::kBinary, records, {0, 4});
  w.signals = *SignalMatrix::Create(ids, target, refs, n_refs);
  for (int r = 0; r < 4; ++r) {
    std::vector<DataRecord> pool(records.begin() + 4 * r, records.begin() + 4 * r + 4);
    w.pools.AddPool("p" + std::to_string(r), pool);
    w.ranges.push_back(PoolRange("r" + std::to_string(r), "p" + std::to_string(r)));
    w.sets.push_back({"r" + std::to_string(r), {4 * r, 4 * r + 1, 4 * r + 2, 4 * r + 3}});
  }
  return w;
}

SweepInput MakeSweepInput(const SweepWorld& w, std::vector<TrimConfig> grid) {
  SweepInput in;
  in.dataset = &w.dataset;
  in.signals = &w.signals;
  in.members_by_model.assign(w.signals.n_refs(), {0, 4});
  in.ranges = w.ranges;
  in.attack_sets = w.sets;
  in.pools = &w.pools;
  in.scorer.kind = ScorerKind::kLoss;
  in.grid = std::move(grid);
  return in;
}

TEST(SweepTrimTest, PicksWindowThatSeparates) {
  const SweepWorld w = MakeSweepWorld(2);
  const TrimConfig plain{100, 100};
  const TrimConfig lower_half{50, 100};
  ASSERT_OK_AND_ASSIGN(SweepResult r,
                       SweepTrim(MakeSweepInput(w, {plain, lower_half})));
  EXPECT_EQ(r.best, lower_half);
  ASSERT_EQ(r.aucs.size(), 2u);
  EXPECT_DOUBLE_EQ(r.aucs[0], 0.0);
  EXPECT_DOUBLE_EQ(r.aucs[1], 1.0);
}

TEST(SweepTrimTest, SingletonGridAndTies) {
  const SweepWorld w = MakeSweepWorld(2);
  ASSERT_OK_AND_ASSIGN(SweepResult one, SweepTrim(MakeSweepInput(w, {{30, 100}})));
  EXPECT_EQ(one.best, (TrimConfig{30, 100}));
  // {50,100} and {60,100} keep the same samples; the narrower window wins.
  ASSERT_OK_AND_ASSIGN(SweepResult tie,
                       SweepTrim(MakeSweepInput(w, {{50, 100}, {60, 100}})));
  EXPECT_EQ(tie.best, (TrimConfig{60, 100}));
}

TEST(SweepTrimTest, TemporaryTargetIsReproducible) {
  const SweepWorld w = MakeSweepWorld(3);
  SweepInput in = MakeSweepInput(w, DefaultTrimGrid(SampleOrigin::kSynthetic));
  in.seed = 12;
  ASSERT_OK_AND_ASSIGN(SweepResult a, SweepTrim(in));
  ASSERT_OK_AND_ASSIGN(SweepResult b, SweepTrim(in));
  EXPECT_EQ(a.temporary_target, b.temporary_target);
  EXPECT_EQ(a.temporary_target, PickTemporaryTarget(12, 3));
  EXPECT_EQ(a.aucs, b.aucs);
  std::set<int> seen;
  for (uint64_t seed = 0; seed < 50; ++seed) seen.insert(PickTemporaryTarget(seed, 3));
  EXPECT_EQ(seen, (std::set<int>{0, 1, 2}));
}

TEST(SweepTrimTest, NeedsTwoReferenceModels) {
  const SweepWorld w = MakeSweepWorld(1);
  EXPECT_EQ(SweepTrim(MakeSweepInput(w, {{0, 100}})).status().code(),
            absl::StatusCode::kFailedPrecondition);
  const SweepWorld two = MakeSweepWorld(2);
  EXPECT_FALSE(SweepTrim(MakeSweepInput(two, {})).ok());
}

class TableScorer : public PointScorer {
 public:
  absl::StatusOr<double> Score(RecordId id) const override {
    if (id < 0 || id >= 100) return absl::NotFoundError("no score");
    return id / 100.0;
  }
  std::string name() const override { return "table"; }
};

TEST(ScoreRangesTest, AggregatesAndReportsRange) {
  const TableScorer scorer;
  const std::vector<RangeQuery> ranges = {PoolRange("a", "p"), PoolRange("b", "p")};
  const std::vector<AttackSet> sets = {{"b", {10, 20}}, {"a", {5, 5, 5}}};
  ASSERT_OK_AND_ASSIGN(auto scores, RangeAttackScores(ranges, sets, scorer, {100, 100}, 2));
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_EQ(scores[0].range_id, "a");
  EXPECT_DOUBLE_EQ(scores[0].score, 0.05);
  EXPECT_DOUBLE_EQ(scores[1].score, 0.15);

  const std::vector<AttackSet> empty = {{"a", {}}, {"b", {1}}};
  absl::StatusOr<std::vector<RangeScore>> bad =
      RangeAttackScores(ranges, empty, scorer, {0, 100});
  ASSERT_FALSE(bad.ok());
  EXPECT_NE(bad.status().message().find("range a"), std::string::npos);

  EXPECT_FALSE(AlignAttackSets(ranges, std::vector<AttackSet>{{"a", {1}}}).ok());
}

TEST(ScoreRangesTest, PointBaselineUsesQueryId) {
  const TableScorer scorer;
  RangeQuery r = MakeMaskedRange("m", Bits(7, {1}), {});
  ASSERT_OK_AND_ASSIGN(auto plain, PointBaselineScores(std::vector{r}, scorer));
  EXPECT_DOUBLE_EQ(plain[0].score, 0.07);
  r.query_id = 42;
  ASSERT_OK_AND_ASSIGN(auto queried, PointBaselineScores(std::vector{r}, scorer));
  EXPECT_DOUBLE_EQ(queried[0].score, 0.42);
}

TEST(RangeFilesTest, RoundTrips) {
  std::vector<RangeQuery> ranges = {MakeMaskedRange("m", Bits(1, {1, 0, 1}), {2}),
                                    HammingRange(Words(2, "x y z"), 1),
                                    PoolRange("p", "pool-1")};
  ranges[0].query_id = 9;
  ranges[2].center.identity_tag = "id-3";
  const std::vector<RangeQuery> words = {ranges[1]};
  ASSERT_OK_AND_ASSIGN(auto words_back,
                       ParseRanges(nlohmann::json::parse(FormatRanges(words)),
                                   PayloadSchema::kTokens));
  EXPECT_EQ(words_back[0].center.tokens(), ranges[1].center.tokens());

  const std::vector<RangeQuery> binary = {ranges[0], ranges[2]};
  ASSERT_OK_AND_ASSIGN(auto back, ParseRanges(nlohmann::json::parse(FormatRanges(binary)),
                                              PayloadSchema::kBinary));
  EXPECT_EQ(FormatRanges(back), FormatRanges(binary));
  EXPECT_EQ(back[0].query_id, 9);
  EXPECT_EQ(back[1].center.identity_tag, "id-3");

  const std::vector<AttackSet> sets = {{"a", {3, 1, 2}}, {"b", {}}};
  ASSERT_OK_AND_ASSIGN(auto sets_back,
                       ParseAttackSets(nlohmann::json::parse(FormatAttackSets(sets))));
  EXPECT_EQ(FormatAttackSets(sets_back), FormatAttackSets(sets));

  const std::vector<RangeLabel> labels = {{"a", 1}, {"b", 0}};
  ASSERT_OK_AND_ASSIGN(auto labels_back, ParseLabels(FormatLabels(labels)));
  EXPECT_EQ(FormatLabels(labels_back), FormatLabels(labels));
  EXPECT_FALSE(ParseLabels("range_id,bit\na,2\n").ok());

  const std::vector<RangeScore> scores = {{"a", 0.1 + 0.2}, {"b", 1e-300}};
  ASSERT_OK_AND_ASSIGN(auto scores_back, ParseRangeScores(FormatRangeScores(scores)));
  EXPECT_EQ(scores_back[0].score, scores[0].score);
  EXPECT_EQ(scores_back[1].score, scores[1].score);
}

}  // namespace
}  // namespace rangemia
