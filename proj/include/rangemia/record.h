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

#ifndef RANGEMIA_RECORD_H_
#define RANGEMIA_RECORD_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"

namespace rangemia {

using RecordId = int64_t;

// Sentinel id carried by sampled records before a CandidateRegistry assigns
// them a dataset-unique id.
inline constexpr RecordId kUnassignedId = -1;

using BitVector = std::vector<uint8_t>;
using TokenSequence = std::vector<std::string>;
using Payload = std::variant<BitVector, TokenSequence>;

enum class Split { kMember, kNonmember, kPopulation, kUnknown };

std::string_view SplitName(Split split);

// One data point of the membership game. Records are immutable once loaded;
// everything that derives a new point (masking, sampling) builds a new record.
struct DataRecord {
  RecordId id = kUnassignedId;
  Payload payload;
  std::optional<std::string> identity_tag;
  Split split = Split::kUnknown;

  bool is_binary() const { return std::holds_alternative<BitVector>(payload); }
  bool is_tokens() const {
    return std::holds_alternative<TokenSequence>(payload);
  }
  const BitVector& bits() const { return std::get<BitVector>(payload); }
  const TokenSequence& tokens() const {
    return std::get<TokenSequence>(payload);
  }
  size_t length() const;
};

// Whitespace tokenization, case preserved.
TokenSequence Tokenize(std::string_view text);

// Checks payload-level invariants (binary entries are 0/1).
absl::Status ValidateRecord(const DataRecord& record);

enum class RangeFunction { kMaskedColumns, kHamming, kCandidatePool };

std::string_view RangeFunctionName(RangeFunction fn);
std::optional<RangeFunction> ParseRangeFunction(std::string_view name);

// A range: a center point, the predicate that defines "near the center", and
// the size of the neighbourhood under that predicate.
//
//   kMaskedColumns  records agreeing with the center outside `mask`;
//                   size == mask.size().
//   kHamming        token sequences of the center's length within word-level
//                   Hamming distance `size` of the center.
//   kCandidatePool  the records listed under `pool_id` in a CandidateProvider;
//                   size bounds the pool cardinality (0 = unbounded).
struct RangeQuery {
  std::string range_id;
  DataRecord center;
  RangeFunction range_fn = RangeFunction::kMaskedColumns;
  int size = 0;
  std::vector<int> mask;
  std::optional<std::string> pool_id;
  // Point query an ordinary membership attack would submit for this range
  // (e.g. the mode-imputed center). Optional; used by the point baseline.
  std::optional<RecordId> query_id;
};

absl::Status ValidateRange(const RangeQuery& range);

// Returns a masked-columns range around `record`. Masked positions of the
// stored center are zeroed so the range does not carry the hidden values.
RangeQuery MakeMaskedRange(std::string range_id, const DataRecord& record,
                           std::vector<int> mask);

struct RangeLabel {
  std::string range_id;
  int bit = 0;
};

// One-sided trimming window over percentiles: samples whose nearest-rank
// percentile p satisfies q_s < p <= q_e are dropped before averaging.
struct TrimConfig {
  double q_s = 0.0;
  double q_e = 100.0;

  friend bool operator==(const TrimConfig&, const TrimConfig&) = default;
};

absl::Status ValidateTrim(const TrimConfig& trim);

}  // namespace rangemia

#endif  // RANGEMIA_RECORD_H_
