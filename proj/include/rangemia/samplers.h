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

#ifndef RANGEMIA_SAMPLERS_H_
#define RANGEMIA_SAMPLERS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/dataset.h"
#include "rangemia/record.h"
#include "rangemia/rng.h"

namespace rangemia {

enum class SamplerKind { kBernoulliTabular, kHammingSubstitution, kCandidatePool };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kBernoulliTabular;
  int n_samples = 20;
  // Tabular only: the first sample is the mode-imputed center.
  bool include_mode_imputed = true;
  uint64_t seed = 0;
};

absl::Status ValidateSamplerSpec(const SamplerSpec& spec);

// Pre-enumerated candidates per pool id (augmentations of one image, the
// photos of one identity, outputs of an external mask filler, ...).
class CandidateProvider {
 public:
  CandidateProvider() = default;

  void AddPool(std::string pool_id, std::vector<DataRecord> candidates);

  // Resolves a pool file {pool_id: [record ids]} against `dataset`.
  static absl::StatusOr<CandidateProvider> FromJson(const nlohmann::json& pools,
                                                    const Dataset& dataset);
  static absl::StatusOr<CandidateProvider> Load(const std::filesystem::path& path,
                                                const Dataset& dataset);

  const std::vector<DataRecord>* Find(const std::string& pool_id) const;
  bool PoolContains(const std::string& pool_id, RecordId id) const;
  const std::map<std::string, std::vector<DataRecord>>& pools() const {
    return pools_;
  }

  nlohmann::json ToJson() const;

 private:
  std::map<std::string, std::vector<DataRecord>> pools_;
};

// Supplies substitute words for masked positions of a token sequence.
class FillProvider {
 public:
  virtual ~FillProvider() = default;
  virtual absl::StatusOr<std::string> Fill(const DataRecord& center,
                                           int position, Rng& rng) const = 0;
};

// Uniform draw from a vocabulary.
class VocabularyFillProvider : public FillProvider {
 public:
  explicit VocabularyFillProvider(std::vector<std::string> vocabulary)
      : vocabulary_(std::move(vocabulary)) {}
  // One token per line.
  static absl::StatusOr<VocabularyFillProvider> Load(
      const std::filesystem::path& path);

  absl::StatusOr<std::string> Fill(const DataRecord& center, int position,
                                   Rng& rng) const override;

 private:
  std::vector<std::string> vocabulary_;
};

// Fixed per-position candidate lists, e.g. precomputed masked-LM top choices.
// File format: {"<record id>": [[words for position 0], [position 1], ...]}.
class CandidateListFillProvider : public FillProvider {
 public:
  using Lists = std::unordered_map<RecordId, std::vector<std::vector<std::string>>>;

  explicit CandidateListFillProvider(Lists lists) : lists_(std::move(lists)) {}
  static absl::StatusOr<CandidateListFillProvider> FromJson(
      const nlohmann::json& json);
  static absl::StatusOr<CandidateListFillProvider> Load(
      const std::filesystem::path& path);

  absl::StatusOr<std::string> Fill(const DataRecord& center, int position,
                                   Rng& rng) const override;

 private:
  Lists lists_;
};

// Fills masked columns with the column mode: 1 iff mean > 0.5.
DataRecord ModeImpute(const RangeQuery& range,
                      const std::vector<double>& column_means);

// Samples from a masked-columns range: unmasked positions are copied from the
// center and each masked position j is an independent Bernoulli(mean[j]).
// Returned records carry kUnassignedId.
absl::StatusOr<std::vector<DataRecord>> SampleBernoulliTabular(
    const RangeQuery& range, const std::vector<double>& column_means,
    const SamplerSpec& spec);

// Samples from a Hamming range: each sample resamples `range.size` distinct
// positions and substitutes a provider word at each.
absl::StatusOr<std::vector<DataRecord>> SampleHamming(
    const RangeQuery& range, const FillProvider& provider,
    const SamplerSpec& spec);

// Draws min(n_samples, |pool|) pool records without replacement. With
// `member_density`, the draw shrinks to the largest size c for which the pool
// holds round(density * c) members and the remaining non-members.
absl::StatusOr<std::vector<DataRecord>> SamplePool(
    const RangeQuery& range, const CandidateProvider& provider,
    const SamplerSpec& spec, std::optional<double> member_density = std::nullopt);

// Column-means file: CSV `index,mean`.
std::vector<double> ComputeColumnMeans(const Dataset& dataset);
absl::StatusOr<std::vector<double>> ParseColumnMeans(std::string_view csv);
std::string FormatColumnMeans(const std::vector<double>& means);

// Gives sampled records ids. Payloads already present in the base dataset
// reuse that record's id; new payloads get fresh ids above every base id, and
// identical new payloads share one id.
class CandidateRegistry {
 public:
  explicit CandidateRegistry(const Dataset& base);

  RecordId Register(const DataRecord& sampled);
  // Records created by Register, in id order.
  const std::vector<DataRecord>& new_records() const { return new_records_; }
  absl::StatusOr<Dataset> NewRecordsDataset() const;

 private:
  PayloadSchema schema_;
  std::unordered_map<std::string, RecordId> by_payload_;
  std::vector<DataRecord> new_records_;
  RecordId next_id_;
};

// Canonical byte key of a payload; equal payloads give equal keys.
std::string PayloadKey(const Payload& payload);

}  // namespace rangemia

#endif  // RANGEMIA_SAMPLERS_H_
