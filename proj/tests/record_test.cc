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

#include "rangemia/record.h"

#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace rangemia {
namespace {

DataRecord Bits(RecordId id, BitVector bits) {
  DataRecord r;
  r.id = id;
  r.payload = std::move(bits);
  return r;
}

TEST(TokenizeTest, SplitsOnWhitespaceAndKeepsCase) {
  EXPECT_EQ(Tokenize("  The cat\tsat\non  the Mat "),
            (TokenSequence{"The", "cat", "sat", "on", "the", "Mat"}));
  EXPECT_TRUE(Tokenize(" \t\n").empty());
}

TEST(ValidateRecordTest, RejectsNonBinaryFeature) {
  absl::Status s = ValidateRecord(Bits(4, {0, 1, 2}));
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(s.message().find("record 4"), std::string::npos);
  EXPECT_OK(ValidateRecord(Bits(4, {0, 1, 1})));
}

TEST(MakeMaskedRangeTest, SortsMaskAndLeavesRecordUntouched) {
  const DataRecord record = Bits(1, {1, 1, 1, 1});
  RangeQuery range = MakeMaskedRange("r", record, {3, 0});
  EXPECT_EQ(range.mask, (std::vector<int>{0, 3}));
  EXPECT_EQ(range.size, 2);
  EXPECT_EQ(range.center.bits(), (BitVector{0, 1, 1, 0}));
  EXPECT_EQ(record.bits(), (BitVector{1, 1, 1, 1}));
  EXPECT_OK(ValidateRange(range));
}

TEST(ValidateRangeTest, ChecksEachRangeKind) {
  RangeQuery masked = MakeMaskedRange("m", Bits(0, {0, 1}), {1});
  masked.size = 2;
  EXPECT_FALSE(ValidateRange(masked).ok());
  masked = MakeMaskedRange("m", Bits(0, {0, 1}), {5});
  EXPECT_FALSE(ValidateRange(masked).ok());

  RangeQuery hamming;
  hamming.range_fn = RangeFunction::kHamming;
  hamming.center = Bits(0, {0});
  hamming.size = 1;
  EXPECT_FALSE(ValidateRange(hamming).ok());
  hamming.center.payload = Tokenize("a b");
  EXPECT_OK(ValidateRange(hamming));

  RangeQuery pool;
  pool.range_fn = RangeFunction::kCandidatePool;
  EXPECT_FALSE(ValidateRange(pool).ok());
  pool.pool_id = "p";
  EXPECT_OK(ValidateRange(pool));
}

TEST(ValidateTrimTest, EnforcesOrderedPercentiles) {
  EXPECT_OK(ValidateTrim({0, 100}));
  EXPECT_OK(ValidateTrim({45, 45}));
  EXPECT_FALSE(ValidateTrim({50, 40}).ok());
  EXPECT_FALSE(ValidateTrim({-1, 40}).ok());
  EXPECT_FALSE(ValidateTrim({0, 101}).ok());
}

TEST(NamesTest, RoundTrip) {
  for (RangeFunction fn : {RangeFunction::kMaskedColumns, RangeFunction::kHamming,
                           RangeFunction::kCandidatePool}) {
    EXPECT_EQ(ParseRangeFunction(RangeFunctionName(fn)), fn);
  }
  EXPECT_FALSE(ParseRangeFunction("euclidean").has_value());
}

}  // namespace
}  // namespace rangemia
