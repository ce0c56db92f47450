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
#include "rangemia/strings.h"

#include <algorithm>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"

namespace rangemia {

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kMember:
      return "member";
    case Split::kNonmember:
      return "nonmember";
    case Split::kPopulation:
      return "population";
    case Split::kUnknown:
      return "unknown";
  }
  return "unknown";
}

size_t DataRecord::length() const {
  return std::visit([](const auto& p) { return p.size(); }, payload);
}

TokenSequence Tokenize(std::string_view text) {
  TokenSequence out;
  for (absl::string_view word :
       absl::StrSplit(AbslView(text), absl::ByAnyChar(" \t\r\n"), absl::SkipEmpty())) {
    out.emplace_back(word);
  }
  return out;
}

absl::Status ValidateRecord(const DataRecord& record) {
  if (!record.is_binary()) return absl::OkStatus();
  const BitVector& bits = record.bits();
  for (size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", record.id, ": feature ", j,
                       " is not binary (value ", static_cast<int>(bits[j]),
                       ")"));
    }
  }
  return absl::OkStatus();
}

std::string_view RangeFunctionName(RangeFunction fn) {
  switch (fn) {
    case RangeFunction::kMaskedColumns:
      return "masked-columns";
    case RangeFunction::kHamming:
      return "hamming";
    case RangeFunction::kCandidatePool:
      return "candidate-pool";
  }
  return "masked-columns";
}

std::optional<RangeFunction> ParseRangeFunction(std::string_view name) {
  if (name == "masked-columns") return RangeFunction::kMaskedColumns;
  if (name == "hamming") return RangeFunction::kHamming;
  if (name == "candidate-pool") return RangeFunction::kCandidatePool;
  return std::nullopt;
}

absl::Status ValidateRange(const RangeQuery& range) {
  if (range.size < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("range ", range.range_id, ": negative size"));
  }
  switch (range.range_fn) {
    case RangeFunction::kMaskedColumns: {
      if (!range.center.is_binary()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "range ", range.range_id, ": masked-columns needs a binary center"));
      }
      if (static_cast<size_t>(range.size) != range.mask.size()) {
        return absl::InvalidArgumentError(
            absl::StrCat("range ", range.range_id, ": size ", range.size,
                         " != mask length ", range.mask.size()));
      }
      std::set<int> seen;
      for (int j : range.mask) {
        if (j < 0 || static_cast<size_t>(j) >= range.center.length()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "range ", range.range_id, ": mask index ", j, " out of bounds"));
        }
        if (!seen.insert(j).second) {
          return absl::InvalidArgumentError(absl::StrCat(
              "range ", range.range_id, ": duplicate mask index ", j));
        }
      }
      return ValidateRecord(range.center);
    }
    case RangeFunction::kHamming:
      if (!range.center.is_tokens()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "range ", range.range_id, ": hamming needs a token-sequence center"));
      }
      return absl::OkStatus();
    case RangeFunction::kCandidatePool:
      if (!range.pool_id.has_value()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "range ", range.range_id, ": candidate-pool needs a pool_id"));
      }
      return absl::OkStatus();
  }
  return absl::OkStatus();
}

RangeQuery MakeMaskedRange(std::string range_id, const DataRecord& record,
                           std::vector<int> mask) {
  RangeQuery range;
  range.range_id = std::move(range_id);
  range.center = record;
  range.range_fn = RangeFunction::kMaskedColumns;
  std::sort(mask.begin(), mask.end());
  if (range.center.is_binary()) {
    BitVector& bits = std::get<BitVector>(range.center.payload);
    for (int j : mask) {
      if (j >= 0 && static_cast<size_t>(j) < bits.size()) bits[j] = 0;
    }
  }
  range.size = static_cast<int>(mask.size());
  range.mask = std::move(mask);
  return range;
}

absl::Status ValidateTrim(const TrimConfig& trim) {
  if (!(trim.q_s >= 0.0 && trim.q_s <= trim.q_e && trim.q_e <= 100.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("trim window must satisfy 0 <= q_s <= q_e <= 100, got q_s=",
                     trim.q_s, " q_e=", trim.q_e));
  }
  return absl::OkStatus();
}

}  // namespace rangemia
