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

#ifndef RANGEMIA_DATASET_H_
#define RANGEMIA_DATASET_H_

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/record.h"

namespace rangemia {

enum class PayloadSchema { kBinary, kTokens };

// The records of one membership game, sorted by id, with the training-set
// index. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;

  // Validates ids, payload schema and the member list, then assigns
  // split=member to listed records and split=nonmember to the rest.
  static absl::StatusOr<Dataset> Create(PayloadSchema schema,
                                        std::vector<DataRecord> records,
                                        const std::vector<RecordId>& members);

  PayloadSchema schema() const { return schema_; }
  const std::vector<DataRecord>& records() const { return records_; }
  const std::set<RecordId>& member_ids() const { return member_ids_; }
  size_t size() const { return records_.size(); }

  const DataRecord* Find(RecordId id) const;
  absl::StatusOr<const DataRecord*> Get(RecordId id) const;
  bool IsMember(RecordId id) const { return member_ids_.contains(id); }

  std::vector<DataRecord> Members() const;
  std::vector<DataRecord> Nonmembers() const;

  // Largest id in the dataset, or -1 when empty.
  RecordId MaxId() const;

  // Number of features of a binary dataset (0 for token datasets).
  size_t feature_count() const;

 private:
  PayloadSchema schema_ = PayloadSchema::kBinary;
  std::vector<DataRecord> records_;
  std::set<RecordId> member_ids_;
  std::unordered_map<RecordId, size_t> index_;
};

absl::StatusOr<Dataset> ParseDatasetManifest(const nlohmann::json& manifest);
absl::StatusOr<Dataset> LoadDatasetManifest(const std::filesystem::path& path);

nlohmann::json DataRecordToJson(const DataRecord& record);
absl::StatusOr<DataRecord> DataRecordFromJson(const nlohmann::json& json,
                                              PayloadSchema schema);

nlohmann::json DatasetToJson(const Dataset& dataset);
std::string SerializeDatasetManifest(const Dataset& dataset);

// Merges datasets of the same schema (e.g. a dataset and its sampled
// candidates) into one id space. Ids must not collide.
absl::StatusOr<Dataset> MergeDatasets(const Dataset& a, const Dataset& b);

std::string_view SchemaName(PayloadSchema schema);

}  // namespace rangemia

#endif  // RANGEMIA_DATASET_H_
