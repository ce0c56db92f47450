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

#include "rangemia/dataset.h"

#include <algorithm>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rangemia/io.h"
#include "rangemia/status_macros.h"
#include "rangemia/strings.h"

namespace rangemia {

using nlohmann::json;

std::string_view SchemaName(PayloadSchema schema) {
  return schema == PayloadSchema::kBinary ? "binary" : "tokens";
}

absl::StatusOr<Dataset> Dataset::Create(PayloadSchema schema,
                                        std::vector<DataRecord> records,
                                        const std::vector<RecordId>& members) {
  Dataset ds;
  ds.schema_ = schema;
  std::sort(records.begin(), records.end(),
            [](const DataRecord& a, const DataRecord& b) { return a.id < b.id; });
  for (size_t i = 0; i < records.size(); ++i) {
    const DataRecord& r = records[i];
    if (r.id < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("record id must be non-negative, got ", r.id));
    }
    if (i > 0 && records[i - 1].id == r.id) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate record id ", r.id));
    }
    const bool binary = schema == PayloadSchema::kBinary;
    if (binary != r.is_binary()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "record ", r.id, ": payload does not match schema ", AbslView(SchemaName(schema))));
    }
    RETURN_IF_ERROR(ValidateRecord(r));
    ds.index_.emplace(r.id, i);
  }
  for (RecordId m : members) {
    if (!ds.index_.contains(m)) {
      return absl::InvalidArgumentError(
          absl::StrCat("member id ", m, " is not a record of the manifest"));
    }
    ds.member_ids_.insert(m);
  }
  for (DataRecord& r : records) {
    r.split = ds.member_ids_.contains(r.id) ? Split::kMember : Split::kNonmember;
  }
  ds.records_ = std::move(records);
  return ds;
}

const DataRecord* Dataset::Find(RecordId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

absl::StatusOr<const DataRecord*> Dataset::Get(RecordId id) const {
  const DataRecord* r = Find(id);
  if (r == nullptr) {
    return absl::NotFoundError(absl::StrCat("record ", id, " not in dataset"));
  }
  return r;
}

std::vector<DataRecord> Dataset::Members() const {
  std::vector<DataRecord> out;
  for (const DataRecord& r : records_) {
    if (r.split == Split::kMember) out.push_back(r);
  }
  return out;
}

std::vector<DataRecord> Dataset::Nonmembers() const {
  std::vector<DataRecord> out;
  for (const DataRecord& r : records_) {
    if (r.split != Split::kMember) out.push_back(r);
  }
  return out;
}

RecordId Dataset::MaxId() const {
  return records_.empty() ? -1 : records_.back().id;
}

size_t Dataset::feature_count() const {
  if (schema_ != PayloadSchema::kBinary || records_.empty()) return 0;
  return records_.front().length();
}

json DataRecordToJson(const DataRecord& record) {
  json j;
  j["id"] = record.id;
  if (record.is_binary()) {
    json bits = json::array();
    for (uint8_t b : record.bits()) bits.push_back(static_cast<int>(b));
    j["payload"] = std::move(bits);
  } else {
    j["payload"] = record.tokens();
  }
  if (record.identity_tag.has_value()) j["identity"] = *record.identity_tag;
  return j;
}

absl::StatusOr<DataRecord> DataRecordFromJson(const json& j,
                                              PayloadSchema schema) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("record entry must be a JSON object");
  }
  auto id_it = j.find("id");
  if (id_it == j.end() || !id_it->is_number_integer()) {
    return absl::InvalidArgumentError("record entry needs an integer \"id\"");
  }
  DataRecord r;
  r.id = id_it->get<RecordId>();
  auto payload_it = j.find("payload");
  if (payload_it == j.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("record ", r.id, ": missing \"payload\""));
  }
  if (schema == PayloadSchema::kBinary) {
    if (!payload_it->is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", r.id, ": binary payload must be an array"));
    }
    BitVector bits;
    bits.reserve(payload_it->size());
    for (size_t k = 0; k < payload_it->size(); ++k) {
      const json& v = (*payload_it)[k];
      if (!v.is_number_integer() || (v.get<int64_t>() != 0 && v.get<int64_t>() != 1)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "record ", r.id, ": feature ", k, " is not binary (", v.dump(), ")"));
      }
      bits.push_back(static_cast<uint8_t>(v.get<int64_t>()));
    }
    r.payload = std::move(bits);
  } else if (payload_it->is_string()) {
    r.payload = Tokenize(payload_it->get<std::string>());
  } else if (payload_it->is_array()) {
    TokenSequence tokens;
    for (const json& v : *payload_it) {
      if (!v.is_string()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "record ", r.id, ": token payload entries must be strings"));
      }
      tokens.push_back(v.get<std::string>());
    }
    r.payload = std::move(tokens);
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "record ", r.id, ": token payload must be a string or string array"));
  }
  if (auto it = j.find("identity"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", r.id, ": \"identity\" must be a string"));
    }
    r.identity_tag = it->get<std::string>();
  }
  return r;
}

absl::StatusOr<Dataset> ParseDatasetManifest(const json& manifest) {
  if (!manifest.is_object()) {
    return absl::InvalidArgumentError("manifest must be a JSON object");
  }
  auto schema_it = manifest.find("schema");
  if (schema_it == manifest.end() || !schema_it->is_string()) {
    return absl::InvalidArgumentError("manifest needs a \"schema\" string");
  }
  PayloadSchema schema;
  if (*schema_it == "binary") {
    schema = PayloadSchema::kBinary;
  } else if (*schema_it == "tokens") {
    schema = PayloadSchema::kTokens;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown manifest schema ", schema_it->dump()));
  }
  auto records_it = manifest.find("records");
  if (records_it == manifest.end() || !records_it->is_array()) {
    return absl::InvalidArgumentError("manifest needs a \"records\" array");
  }
  std::vector<DataRecord> records;
  records.reserve(records_it->size());
  for (const json& entry : *records_it) {
    ASSIGN_OR_RETURN(DataRecord r, DataRecordFromJson(entry, schema));
    records.push_back(std::move(r));
  }
  std::vector<RecordId> members;
  if (auto it = manifest.find("members"); it != manifest.end()) {
    if (!it->is_array()) {
      return absl::InvalidArgumentError("\"members\" must be an array of ids");
    }
    for (const json& v : *it) {
      if (!v.is_number_integer()) {
        return absl::InvalidArgumentError("\"members\" must be an array of ids");
      }
      members.push_back(v.get<RecordId>());
    }
  }
  if (!records.empty() && schema == PayloadSchema::kBinary) {
    const size_t width = records.front().length();
    for (const DataRecord& r : records) {
      if (r.length() != width) {
        return absl::InvalidArgumentError(absl::StrCat(
            "record ", r.id, ": has ", r.length(), " features, expected ", width));
      }
    }
  }
  return Dataset::Create(schema, std::move(records), members);
}

absl::StatusOr<Dataset> LoadDatasetManifest(const std::filesystem::path& path) {
  ASSIGN_OR_RETURN(json manifest, ReadJsonFile(path));
  auto ds = ParseDatasetManifest(manifest);
  if (!ds.ok()) {
    return absl::Status(ds.status().code(),
                        absl::StrCat(path.string(), ": ", ds.status().message()));
  }
  return ds;
}

json DatasetToJson(const Dataset& dataset) {
  json j;
  j["schema"] = std::string(SchemaName(dataset.schema()));
  json records = json::array();
  for (const DataRecord& r : dataset.records()) {
    records.push_back(DataRecordToJson(r));
  }
  j["records"] = std::move(records);
  j["members"] = std::vector<RecordId>(dataset.member_ids().begin(),
                                       dataset.member_ids().end());
  return j;
}

std::string SerializeDatasetManifest(const Dataset& dataset) {
  return DatasetToJson(dataset).dump() + "\n";
}

absl::StatusOr<Dataset> MergeDatasets(const Dataset& a, const Dataset& b) {
  if (a.schema() != b.schema()) {
    return absl::InvalidArgumentError("cannot merge datasets of different schema");
  }
  std::vector<DataRecord> records = a.records();
  records.insert(records.end(), b.records().begin(), b.records().end());
  std::vector<RecordId> members(a.member_ids().begin(), a.member_ids().end());
  members.insert(members.end(), b.member_ids().begin(), b.member_ids().end());
  return Dataset::Create(a.schema(), std::move(records), members);
}

}  // namespace rangemia
