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

#include "rangemia/samplers.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "rangemia/range_engine.h"
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
  range.range_id = "h" + std::to_string(center.id);
  range.center = center;
  range.range_fn = RangeFunction::kHamming;
  range.size = size;
  return range;
}

RangeQuery PoolRange(std::string pool_id) {
  RangeQuery range;
  range.range_id = "p-" + pool_id;
  range.center = Bits(0, {0});
  range.range_fn = RangeFunction::kCandidatePool;
  range.pool_id = std::move(pool_id);
  return range;
}

class ConstantFill : public FillProvider {
 public:
  absl::StatusOr<std::string> Fill(const DataRecord&, int, Rng&) const override {
    return std::string("X");
  }
};

class FailingFill : public FillProvider {
 public:
  absl::StatusOr<std::string> Fill(const DataRecord&, int, Rng&) const override {
    return absl::UnavailableError("fill backend down");
  }
};

TEST(SamplerSpecTest, RejectsNonPositiveCount) {
  SamplerSpec spec;
  spec.n_samples = 0;
  EXPECT_FALSE(ValidateSamplerSpec(spec).ok());
  EXPECT_FALSE(SampleBernoulliTabular(MakeMaskedRange("r", Bits(1, {1}), {}),
                                      {0.5}, spec)
                   .ok());
}

TEST(BernoulliTabularTest, EmptyMaskCopiesCenter) {
  const RangeQuery range = MakeMaskedRange("r", Bits(1, {1, 0, 1}), {});
  SamplerSpec spec;
  spec.n_samples = 7;
  ASSERT_OK_AND_ASSIGN(auto samples,
                       SampleBernoulliTabular(range, {0.5, 0.5, 0.5}, spec));
  ASSERT_EQ(samples.size(), 7u);
  for (const DataRecord& s : samples) {
    EXPECT_EQ(s.bits(), (BitVector{1, 0, 1}));
    EXPECT_EQ(s.id, kUnassignedId);
  }
}

TEST(BernoulliTabularTest, DegenerateMeanFixesBit) {
  const RangeQuery range = MakeMaskedRange("r", Bits(1, {0, 0, 0, 0, 0}), {3});
  SamplerSpec spec;
  spec.n_samples = 50;
  spec.include_mode_imputed = false;
  ASSERT_OK_AND_ASSIGN(auto samples, SampleBernoulliTabular(
                                         range, {0.2, 0.2, 0.2, 1.0, 0.2}, spec));
  for (const DataRecord& s : samples) EXPECT_EQ(s.bits()[3], 1);
}

TEST(BernoulliTabularTest, TwentySamplesIncludeModeImputation) {
  BitVector bits(600, 1);
  std::vector<int> mask;
  for (int j = 0; j < 10; ++j) mask.push_back(j * 37);
  const RangeQuery range = MakeMaskedRange("p", Bits(1, bits), mask);
  std::vector<double> means(600, 0.3);
  for (int j = 0; j < 5; ++j) means[mask[j]] = 0.8;
  means[mask[9]] = 0.5;
  SamplerSpec spec;
  ASSERT_OK_AND_ASSIGN(auto samples, SampleBernoulliTabular(range, means, spec));
  ASSERT_EQ(samples.size(), 20u);
  const BitVector& mode = samples[0].bits();
  for (int i = 0; i < 10; ++i) EXPECT_EQ(mode[mask[i]], i < 5 ? 1 : 0) << i;
  EXPECT_EQ(ModeImpute(range, means).bits(), mode);
}

TEST(BernoulliTabularTest, RejectsBadInputs) {
  const RangeQuery range = MakeMaskedRange("r", Bits(1, {0, 1}), {0});
  SamplerSpec spec;
  EXPECT_FALSE(SampleBernoulliTabular(range, {0.5}, spec).ok());
  EXPECT_FALSE(SampleBernoulliTabular(range, {0.5, 1.5}, spec).ok());
  RangeQuery broken = range;
  broken.mask = {5};
  EXPECT_FALSE(SampleBernoulliTabular(broken, {0.5, 0.5}, spec).ok());
}

TEST(BernoulliTabularTest, MarginalsMatchColumnMeans) {
  const std::vector<double> means = {0.1, 0.5, 0.73, 0.95};
  const RangeQuery range =
      MakeMaskedRange("m", Bits(1, {0, 0, 0, 0}), {0, 1, 2, 3});
  SamplerSpec spec;
  spec.n_samples = 20000;
  spec.include_mode_imputed = false;
  spec.seed = 99;
  ASSERT_OK_AND_ASSIGN(auto samples, SampleBernoulliTabular(range, means, spec));
  const double n = static_cast<double>(samples.size());
  for (size_t j = 0; j < means.size(); ++j) {
    double ones = 0;
    for (const DataRecord& s : samples) ones += s.bits()[j];
    const double sigma = std::sqrt(means[j] * (1 - means[j]) / n);
    EXPECT_NEAR(ones / n, means[j], 3 * sigma) << "column " << j;
  }
}

TEST(BernoulliTabularTest, DeterministicAndSound) {
  const RangeQuery range =
      MakeMaskedRange("d", Bits(1, {1, 0, 1, 1, 0, 1}), {1, 4, 5});
  const std::vector<double> means(6, 0.5);
  SamplerSpec spec;
  spec.seed = 5;
  ASSERT_OK_AND_ASSIGN(auto a, SampleBernoulliTabular(range, means, spec));
  ASSERT_OK_AND_ASSIGN(auto b, SampleBernoulliTabular(range, means, spec));
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].bits(), b[i].bits());
    EXPECT_TRUE(*InRange(range, a[i]));
  }
  spec.seed = 6;
  ASSERT_OK_AND_ASSIGN(auto c, SampleBernoulliTabular(range, means, spec));
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) any_diff |= a[i].bits() != c[i].bits();
  EXPECT_TRUE(any_diff);
}

TEST(HammingTest, SizeZeroReturnsCenter) {
  const DataRecord center = Words(3, "the cat sat down");
  SamplerSpec spec;
  spec.n_samples = 5;
  ASSERT_OK_AND_ASSIGN(auto samples,
                       SampleHamming(HammingRange(center, 0), ConstantFill(), spec));
  ASSERT_EQ(samples.size(), 5u);
  for (const DataRecord& s : samples) EXPECT_EQ(s.tokens(), center.tokens());
}

TEST(HammingTest, SingleSubstitutionWithConstantProvider) {
  const DataRecord center = Words(3, "the cat sat down");
  SamplerSpec spec;
  spec.n_samples = 30;
  spec.seed = 17;
  ASSERT_OK_AND_ASSIGN(auto samples,
                       SampleHamming(HammingRange(center, 1), ConstantFill(), spec));
  std::set<int> positions;
  for (const DataRecord& s : samples) {
    int diffs = 0;
    for (size_t i = 0; i < 4; ++i) {
      if (s.tokens()[i] != center.tokens()[i]) {
        ++diffs;
        EXPECT_EQ(s.tokens()[i], "X");
        positions.insert(static_cast<int>(i));
      }
    }
    EXPECT_EQ(diffs, 1);
  }
  EXPECT_GT(positions.size(), 1u);
}

TEST(HammingTest, SoundAndDeterministicWithVocabulary) {
  const DataRecord center = Words(8, "a b c d e f g h");
  const VocabularyFillProvider vocab({"a", "z", "y", "x"});
  const RangeQuery range = HammingRange(center, 3);
  SamplerSpec spec;
  spec.n_samples = 50;
  ASSERT_OK_AND_ASSIGN(auto a, SampleHamming(range, vocab, spec));
  ASSERT_OK_AND_ASSIGN(auto b, SampleHamming(range, vocab, spec));
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].tokens(), b[i].tokens());
    EXPECT_TRUE(*InRange(range, a[i]));
  }
}

TEST(HammingTest, Errors) {
  SamplerSpec spec;
  EXPECT_EQ(SampleHamming(HammingRange(Words(1, "too short"), 3), ConstantFill(),
                          spec)
                .status()
                .code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(SampleHamming(HammingRange(Words(1, "a b c"), 1), FailingFill(), spec)
                .status()
                .code(),
            absl::StatusCode::kUnavailable);
}

TEST(CandidateListFillTest, DrawsFromPositionList) {
  ASSERT_OK_AND_ASSIGN(
      auto lists, CandidateListFillProvider::FromJson(
                      nlohmann::json::parse(R"({"4": [["p"], ["q", "r"]]})")));
  Rng rng = MakeRng(1, "k");
  EXPECT_EQ(*lists.Fill(Words(4, "a b"), 0, rng), "p");
  const std::string w = *lists.Fill(Words(4, "a b"), 1, rng);
  EXPECT_TRUE(w == "q" || w == "r");
  EXPECT_FALSE(lists.Fill(Words(5, "a b"), 0, rng).ok());
  EXPECT_FALSE(lists.Fill(Words(4, "a b"), 2, rng).ok());
}

TEST(PoolTest, SingleCandidatePool) {
  CandidateProvider provider;
  provider.AddPool("one", {Bits(9, {1})});
  SamplerSpec spec;
  spec.n_samples = 20;
  ASSERT_OK_AND_ASSIGN(auto out, SamplePool(PoolRange("one"), provider, spec));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, 9);
}

TEST(PoolTest, DrawsWithoutReplacement) {
  CandidateProvider provider;
  std::vector<DataRecord> pool;
  for (int i = 0; i < 12; ++i) pool.push_back(Bits(i, {0}));
  provider.AddPool("p", pool);
  SamplerSpec spec;
  spec.n_samples = 8;
  ASSERT_OK_AND_ASSIGN(auto out, SamplePool(PoolRange("p"), provider, spec));
  std::set<RecordId> ids;
  for (const DataRecord& r : out) {
    ids.insert(r.id);
    EXPECT_TRUE(*InRange(PoolRange("p"), r, &provider));
  }
  EXPECT_EQ(ids.size(), 8u);
  ASSERT_OK_AND_ASSIGN(auto again, SamplePool(PoolRange("p"), provider, spec));
  for (size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].id, again[i].id);
}

TEST(PoolTest, DensityZeroExcludesMembers) {
  CandidateProvider provider;
  provider.AddPool("p", {Bits(1, {0}, Split::kMember), Bits(2, {0}),
                         Bits(3, {0}, Split::kMember), Bits(4, {0})});
  SamplerSpec spec;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    ASSERT_OK_AND_ASSIGN(auto out, SamplePool(PoolRange("p"), provider, spec, 0.0));
    EXPECT_EQ(out.size(), 2u);
    for (const DataRecord& r : out) EXPECT_NE(r.split, Split::kMember);
  }
}

TEST(PoolTest, HalfDensityTakesTwoOfEach) {
  CandidateProvider provider;
  provider.AddPool("p", {Bits(1, {0}, Split::kMember), Bits(2, {0}),
                         Bits(3, {0}, Split::kMember), Bits(4, {0})});
  SamplerSpec spec;
  spec.n_samples = 4;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    spec.seed = seed;
    ASSERT_OK_AND_ASSIGN(auto out, SamplePool(PoolRange("p"), provider, spec, 0.5));
    ASSERT_EQ(out.size(), 4u);
    int members = 0;
    for (const DataRecord& r : out) members += r.split == Split::kMember;
    EXPECT_EQ(members, 2);
  }
}

TEST(PoolTest, Errors) {
  CandidateProvider provider;
  provider.AddPool("empty", {});
  provider.AddPool("members", {Bits(1, {0}, Split::kMember)});
  SamplerSpec spec;
  EXPECT_EQ(SamplePool(PoolRange("empty"), provider, spec).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(SamplePool(PoolRange("nope"), provider, spec).status().code(),
            absl::StatusCode::kNotFound);
  EXPECT_EQ(SamplePool(PoolRange("members"), provider, spec, 0.0).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(SamplePool(PoolRange("members"), provider, spec, 1.5).ok());
}

TEST(ColumnMeansTest, RoundTrip) {
  const std::vector<double> means = {0.0, 0.25, 1.0 / 3.0, 1.0};
  ASSERT_OK_AND_ASSIGN(auto back, ParseColumnMeans(FormatColumnMeans(means)));
  EXPECT_EQ(back, means);
  EXPECT_FALSE(ParseColumnMeans("index,mean\n0,1.5\n").ok());
}

TEST(ColumnMeansTest, ComputedFromDataset) {
  ASSERT_OK_AND_ASSIGN(Dataset ds,
                       Dataset::Create(PayloadSchema::kBinary,
                                       {Bits(1, {1, 0}), Bits(2, {1, 1}),
                                        Bits(3, {0, 0}), Bits(4, {1, 0})},
                                       {1}));
  EXPECT_EQ(ComputeColumnMeans(ds), (std::vector<double>{0.75, 0.25}));
}

TEST(CandidateRegistryTest, ReusesKnownPayloadsAndDedupesNewOnes) {
  ASSERT_OK_AND_ASSIGN(Dataset ds, Dataset::Create(PayloadSchema::kBinary,
                                                   {Bits(3, {1, 0}), Bits(10, {0, 1})},
                                                   {3}));
  CandidateRegistry registry(ds);
  EXPECT_EQ(registry.Register(Bits(kUnassignedId, {1, 0})), 3);
  const RecordId fresh = registry.Register(Bits(kUnassignedId, {1, 1}));
  EXPECT_GT(fresh, 10);
  EXPECT_EQ(registry.Register(Bits(kUnassignedId, {1, 1})), fresh);
  EXPECT_NE(registry.Register(Bits(kUnassignedId, {0, 0})), fresh);
  EXPECT_EQ(registry.new_records().size(), 2u);
  ASSERT_OK_AND_ASSIGN(Dataset added, registry.NewRecordsDataset());
  EXPECT_EQ(added.size(), 2u);
}

TEST(PayloadKeyTest, DistinguishesPayloads) {
  EXPECT_EQ(PayloadKey(BitVector{1, 0}), PayloadKey(BitVector{1, 0}));
  EXPECT_NE(PayloadKey(BitVector{1, 0}), PayloadKey(BitVector{0, 1}));
  EXPECT_NE(PayloadKey(TokenSequence{"ab", "c"}), PayloadKey(TokenSequence{"a", "bc"}));
}

}  // namespace
}  // namespace rangemia
