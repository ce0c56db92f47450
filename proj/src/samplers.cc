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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/ascii.h"
#include "rangemia/io.h"
#include "rangemia/status_macros.h"

namespace rangemia {

using nlohmann::json;

absl::Status ValidateSamplerSpec(const SamplerSpec& spec) {
  if (spec.n_samples < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("n_samples must be >= 1, got ", spec.n_samples));
  }
  return absl::OkStatus();
}

void CandidateProvider::AddPool(std::string pool_id,
                                std::vector<DataRecord> candidates) {
  pools_[std::move(pool_id)] = std::move(candidates);
}

absl::StatusOr<CandidateProvider> CandidateProvider::FromJson(
    const json& pools, const Dataset& dataset) {
  if (!pools.is_object()) {
    return absl::InvalidArgumentError(
        "candidate-pool file must map pool ids to id arrays");
  }
  CandidateProvider provider;
  for (auto it = pools.begin(); it != pools.end(); ++it) {
    if (!it.value().is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat("pool ", it.key(), ": expected an array of record ids"));
    }
    std::vector<DataRecord> candidates;
    for (const json& v : it.value()) {
      if (!v.is_number_integer()) {
        return absl::InvalidArgumentError(
            absl::StrCat("pool ", it.key(), ": ids must be integers"));
      }
      auto record = dataset.Get(v.get<RecordId>());
      if (!record.ok()) {
        return absl::NotFoundError(
            absl::StrCat("pool ", it.key(), ": ", record.status().message()));
      }
      candidates.push_back(**record);
    }
    provider.AddPool(it.key(), std::move(candidates));
  }
  return provider;
}

absl::StatusOr<CandidateProvider> CandidateProvider::Load(
    const std::filesystem::path& path, const Dataset& dataset) {
  ASSIGN_OR_RETURN(json pools, ReadJsonFile(path));
  return FromJson(pools, dataset);
}

const std::vector<DataRecord>* CandidateProvider::Find(
    const std::string& pool_id) const {
  auto it = pools_.find(pool_id);
  return it == pools_.end() ? nullptr : &it->second;
}

bool CandidateProvider::PoolContains(const std::string& pool_id,
                                     RecordId id) const {
  const auto* pool = Find(pool_id);
  if (pool == nullptr) return false;
  return std::any_of(pool->begin(), pool->end(),
                     [id](const DataRecord& r) { return r.id == id; });
}

json CandidateProvider::ToJson() const {
  json out = json::object();
  for (const auto& [pool_id, records] : pools_) {
    json ids = json::array();
    for (const DataRecord& r : records) ids.push_back(r.id);
    out[pool_id] = std::move(ids);
  }
  return out;
}

absl::StatusOr<VocabularyFillProvider> VocabularyFillProvider::Load(
    const std::filesystem::path& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  std::vector<std::string> vocab;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    line = absl::StripAsciiWhitespace(line);
    if (!line.empty()) vocab.emplace_back(line);
  }
  if (vocab.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("vocabulary file ", path.string(), " is empty"));
  }
  return VocabularyFillProvider(std::move(vocab));
}

absl::StatusOr<std::string> VocabularyFillProvider::Fill(const DataRecord&, int,
                                                         Rng& rng) const {
  if (vocabulary_.empty()) {
    return absl::FailedPreconditionError("fill vocabulary is empty");
  }
  std::uniform_int_distribution<size_t> pick(0, vocabulary_.size() - 1);
  return vocabulary_[pick(rng)];
}

absl::StatusOr<CandidateListFillProvider> CandidateListFillProvider::FromJson(
    const json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        "fill-candidate file must map record ids to per-position word lists");
  }
  Lists lists;
  for (auto it = j.begin(); it != j.end(); ++it) {
    ASSIGN_OR_RETURN(RecordId id, ParseInt(it.key()));
    if (!it.value().is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat("fill candidates for record ", id, " must be an array"));
    }
    std::vector<std::vector<std::string>> per_position;
    for (const json& words : it.value()) {
      if (!words.is_array()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "fill candidates for record ", id, " must be arrays of words"));
      }
      std::vector<std::string> list;
      for (const json& w : words) {
        if (!w.is_string()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "fill candidates for record ", id, " must be strings"));
        }
        list.push_back(w.get<std::string>());
      }
      per_position.push_back(std::move(list));
    }
    lists.emplace(id, std::move(per_position));
  }
  return CandidateListFillProvider(std::move(lists));
}

absl::StatusOr<CandidateListFillProvider> CandidateListFillProvider::Load(
    const std::filesystem::path& path) {
  ASSIGN_OR_RETURN(json j, ReadJsonFile(path));
  return FromJson(j);
}

absl::StatusOr<std::string> CandidateListFillProvider::Fill(
    const DataRecord& center, int position, Rng& rng) const {
  auto it = lists_.find(center.id);
  if (it == lists_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no fill candidates for record ", center.id));
  }
  if (position < 0 || static_cast<size_t>(position) >= it->second.size() ||
      it->second[position].empty()) {
    return absl::NotFoundError(absl::StrCat("no fill candidates for record ",
                                            center.id, " position ", position));
  }
  const auto& words = it->second[position];
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  return words[pick(rng)];
}

DataRecord ModeImpute(const RangeQuery& range,
                      const std::vector<double>& column_means) {
  DataRecord out = range.center;
  out.id = kUnassignedId;
  out.split = Split::kUnknown;
  BitVector& bits = std::get<BitVector>(out.payload);
  for (int j : range.mask) bits[j] = column_means[j] > 0.5 ? 1 : 0;
  return out;
}

absl::StatusOr<std::vector<DataRecord>> SampleBernoulliTabular(
    const RangeQuery& range, const std::vector<double>& column_means,
    const SamplerSpec& spec) {
  RETURN_IF_ERROR(ValidateSamplerSpec(spec));
  if (range.range_fn != RangeFunction::kMaskedColumns) {
    return absl::InvalidArgumentError(absl::StrCat(
        "range ", range.range_id, ": Bernoulli sampling needs masked-columns"));
  }
  RETURN_IF_ERROR(ValidateRange(range));
  if (column_means.size() != range.center.length()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "column means cover ", column_means.size(), " features, center has ",
        range.center.length()));
  }
  for (double p : column_means) {
    if (!(p >= 0.0 && p <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("column mean ", p, " is outside [0, 1]"));
    }
  }
  Rng rng = MakeRng(spec.seed, range.range_id);
  std::vector<DataRecord> samples;
  samples.reserve(spec.n_samples);
  if (spec.include_mode_imputed) {
    samples.push_back(ModeImpute(range, column_means));
  }
  while (samples.size() < static_cast<size_t>(spec.n_samples)) {
    DataRecord s = range.center;
    s.id = kUnassignedId;
    s.split = Split::kUnknown;
    BitVector& bits = std::get<BitVector>(s.payload);
    for (int j : range.mask) {
      std::bernoulli_distribution coin(column_means[j]);
      bits[j] = coin(rng) ? 1 : 0;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

absl::StatusOr<std::vector<DataRecord>> SampleHamming(
    const RangeQuery& range, const FillProvider& provider,
    const SamplerSpec& spec) {
  RETURN_IF_ERROR(ValidateSamplerSpec(spec));
  if (range.range_fn != RangeFunction::kHamming) {
    return absl::InvalidArgumentError(absl::StrCat(
        "range ", range.range_id, ": Hamming sampling needs a hamming range"));
  }
  RETURN_IF_ERROR(ValidateRange(range));
  const TokenSequence& words = range.center.tokens();
  if (words.size() < static_cast<size_t>(range.size)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "range ", range.range_id, ": sentence has ", words.size(),
        " words, fewer than Hamming size ", range.size));
  }
  Rng rng = MakeRng(spec.seed, range.range_id);
  std::vector<int> positions(words.size());
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<DataRecord> samples;
  samples.reserve(spec.n_samples);
  for (int s = 0; s < spec.n_samples; ++s) {
    std::vector<int> chosen;
    std::sample(positions.begin(), positions.end(), std::back_inserter(chosen),
                range.size, rng);
    DataRecord sample = range.center;
    sample.id = kUnassignedId;
    sample.split = Split::kUnknown;
    TokenSequence& out = std::get<TokenSequence>(sample.payload);
    for (int pos : chosen) {
      ASSIGN_OR_RETURN(out[pos], provider.Fill(range.center, pos, rng));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

absl::StatusOr<std::vector<DataRecord>> SamplePool(
    const RangeQuery& range, const CandidateProvider& provider,
    const SamplerSpec& spec, std::optional<double> member_density) {
  RETURN_IF_ERROR(ValidateSamplerSpec(spec));
  if (range.range_fn != RangeFunction::kCandidatePool) {
    return absl::InvalidArgumentError(absl::StrCat(
        "range ", range.range_id, ": pool sampling needs a candidate-pool range"));
  }
  RETURN_IF_ERROR(ValidateRange(range));
  const auto* pool = provider.Find(*range.pool_id);
  if (pool == nullptr) {
    return absl::NotFoundError(absl::StrCat("range ", range.range_id,
                                            ": unknown pool ", *range.pool_id));
  }
  std::vector<DataRecord> candidates = *pool;
  if (range.size > 0 && candidates.size() > static_cast<size_t>(range.size)) {
    candidates.resize(range.size);
  }
  if (candidates.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("range ", range.range_id, ": pool ", *range.pool_id,
                     " is empty"));
  }
  Rng rng = MakeRng(spec.seed, range.range_id);
  const size_t count =
      std::min(static_cast<size_t>(spec.n_samples), candidates.size());
  if (!member_density.has_value()) {
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(count);
    return candidates;
  }
  const double density = *member_density;
  if (!(density >= 0.0 && density <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("member density ", density, " is outside [0, 1]"));
  }
  std::vector<DataRecord> members;
  std::vector<DataRecord> others;
  for (DataRecord& r : candidates) {
    (r.split == Split::kMember ? members : others).push_back(std::move(r));
  }
  // Rebalance: the largest sample size up to `count` whose member share can
  // be met by the pool.
  size_t want_members = 0;
  size_t want_others = 0;
  bool feasible = false;
  for (size_t c = count; c >= 1 && !feasible; --c) {
    want_members =
        static_cast<size_t>(std::llround(density * static_cast<double>(c)));
    want_others = c - want_members;
    feasible = want_members <= members.size() && want_others <= others.size();
  }
  if (!feasible) {
    return absl::FailedPreconditionError(absl::StrCat(
        "range ", range.range_id, ": member density ", density,
        " is unattainable from a pool of ", members.size(), " members and ",
        others.size(), " non-members"));
  }
  std::shuffle(members.begin(), members.end(), rng);
  std::shuffle(others.begin(), others.end(), rng);
  std::vector<DataRecord> out(members.begin(), members.begin() + want_members);
  out.insert(out.end(), others.begin(), others.begin() + want_others);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<double> ComputeColumnMeans(const Dataset& dataset) {
  const size_t width = dataset.feature_count();
  std::vector<double> means(width, 0.0);
  if (dataset.size() == 0) return means;
  std::vector<int64_t> ones(width, 0);
  for (const DataRecord& r : dataset.records()) {
    const BitVector& bits = r.bits();
    for (size_t j = 0; j < width; ++j) ones[j] += bits[j];
  }
  for (size_t j = 0; j < width; ++j) {
    means[j] = static_cast<double>(ones[j]) / static_cast<double>(dataset.size());
  }
  return means;
}

absl::StatusOr<std::vector<double>> ParseColumnMeans(std::string_view csv) {
  auto rows = SplitCsv(csv);
  if (rows.empty() || rows.front() != std::vector<std::string>{"index", "mean"}) {
    return absl::InvalidArgumentError("column-means CSV needs header index,mean");
  }
  std::vector<double> means(rows.size() - 1, -1.0);
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) {
      return absl::InvalidArgumentError(
          absl::StrCat("column-means CSV line ", r + 1, ": expected 2 fields"));
    }
    ASSIGN_OR_RETURN(int64_t index, ParseInt(rows[r][0]));
    ASSIGN_OR_RETURN(double mean, ParseDouble(rows[r][1]));
    if (index < 0 || static_cast<size_t>(index) >= means.size() ||
        means[index] >= 0.0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "column-means CSV line ", r + 1, ": bad or repeated index ", index));
    }
    if (!(mean >= 0.0 && mean <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "column-means CSV line ", r + 1, ": mean ", mean, " outside [0, 1]"));
    }
    means[index] = mean;
  }
  return means;
}

std::string FormatColumnMeans(const std::vector<double>& means) {
  std::string out = "index,mean\n";
  for (size_t j = 0; j < means.size(); ++j) {
    absl::StrAppend(&out, j, ",", FormatDouble(means[j]), "\n");
  }
  return out;
}

std::string PayloadKey(const Payload& payload) {
  if (const auto* bits = std::get_if<BitVector>(&payload)) {
    std::string key(bits->size(), '0');
    for (size_t j = 0; j < bits->size(); ++j) key[j] = (*bits)[j] ? '1' : '0';
    return key;
  }
  std::string key;
  for (const std::string& w : std::get<TokenSequence>(payload)) {
    key += w;
    key += '\x1f';
  }
  return key;
}

CandidateRegistry::CandidateRegistry(const Dataset& base)
    : schema_(base.schema()), next_id_(base.MaxId() + 1) {
  for (const DataRecord& r : base.records()) {
    by_payload_.emplace(PayloadKey(r.payload), r.id);
  }
}

RecordId CandidateRegistry::Register(const DataRecord& sampled) {
  if (sampled.id != kUnassignedId) return sampled.id;
  auto [it, inserted] = by_payload_.emplace(PayloadKey(sampled.payload), next_id_);
  if (inserted) {
    DataRecord r = sampled;
    r.id = next_id_++;
    r.split = Split::kUnknown;
    new_records_.push_back(std::move(r));
  }
  return it->second;
}

absl::StatusOr<Dataset> CandidateRegistry::NewRecordsDataset() const {
  return Dataset::Create(schema_, new_records_, {});
}

}  // namespace rangemia
