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

#include "rangemia/game_sim.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rangemia/rng.h"
#include "rangemia/status_macros.h"
#include "rangemia/strings.h"

namespace rangemia {

using nlohmann::json;

namespace {

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<uint64_t> Pack(const BitVector& bits, size_t words) {
  std::vector<uint64_t> out(words, 0);
  for (size_t j = 0; j < bits.size(); ++j) {
    if (bits[j]) out[j / 64] |= uint64_t{1} << (j % 64);
  }
  return out;
}

std::vector<int> SampleColumns(int n_features, int k, Rng& rng) {
  std::vector<int> all(n_features);
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> chosen;
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), k, rng);
  return chosen;
}

BitVector DrawBits(const std::vector<double>& probs, Rng& rng) {
  BitVector bits(probs.size());
  for (size_t j = 0; j < probs.size(); ++j) {
    std::bernoulli_distribution coin(probs[j]);
    bits[j] = coin(rng) ? 1 : 0;
  }
  return bits;
}

std::vector<double> DrawColumnProbs(int n_features, Rng& rng) {
  std::uniform_real_distribution<double> p(0.1, 0.9);
  std::vector<double> probs(n_features);
  for (double& v : probs) v = p(rng);
  return probs;
}

std::vector<BitVector> Payloads(const Dataset& dataset,
                                std::span<const RecordId> ids) {
  std::vector<BitVector> out;
  out.reserve(ids.size());
  for (RecordId id : ids) out.push_back(dataset.Find(id)->bits());
  return out;
}

bool IsPoolGame(GameKind kind) {
  return kind == GameKind::kIdentityPool || kind == GameKind::kTransformPool;
}

uint64_t DeriveSeed(uint64_t seed, std::string_view key) {
  Rng rng = MakeRng(seed, key);
  return rng();
}

}  // namespace

absl::Status ValidateMemorizationModel(const MemorizationModel& model) {
  if (!(model.sigma > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("memorization sigma must be > 0, got ", model.sigma));
  }
  if (!(model.mu_in > model.mu_out)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "memorization needs mu_in > mu_out, got ", model.mu_in, " <= ",
        model.mu_out));
  }
  if (!(model.decay >= 0.0 && model.decay <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("memorization decay must lie in [0, 1], got ", model.decay));
  }
  return absl::OkStatus();
}

SimulatedModel::SimulatedModel(MemorizationModel params, uint64_t model_key,
                               std::span<const BitVector> training)
    : params_(params), model_key_(model_key) {
  if (!training.empty()) words_ = (training.front().size() + 63) / 64;
  packed_.reserve(training.size() * words_);
  for (const BitVector& t : training) {
    std::vector<uint64_t> p = Pack(t, words_);
    packed_.insert(packed_.end(), p.begin(), p.end());
  }
}

int SimulatedModel::NearestTrainingDistance(const BitVector& x) const {
  return NearestPacked(Pack(x, std::max<size_t>(words_, 1)));
}

int SimulatedModel::NearestPacked(const std::vector<uint64_t>& q) const {
  int best = kBoostRadius + 1;
  if (words_ == 0) return best;
  for (size_t off = 0; off < packed_.size(); off += words_) {
    int d = 0;
    for (size_t w = 0; w < words_ && d < best; ++w) {
      d += std::popcount(packed_[off + w] ^ q[w]);
    }
    if (d < best) {
      best = d;
      if (best == 0) break;
    }
  }
  return best;
}

double SimulatedModel::BoostAt(int d) const {
  if (d > kBoostRadius) return 0.0;
  return (params_.mu_in - params_.mu_out) * std::pow(params_.decay, d);
}

double SimulatedModel::Boost(const BitVector& x) const {
  return BoostAt(NearestTrainingDistance(x));
}

double SimulatedModel::Signal(const BitVector& x) const {
  const std::vector<uint64_t> q = Pack(x, (x.size() + 63) / 64);
  uint64_t h = Mix64(params_.seed ^ Mix64(model_key_ + x.size()));
  for (uint64_t w : q) h = Mix64(h ^ w);
  SplitMix64 rng(h);
  std::normal_distribution<double> noise(0.0, params_.sigma);
  const int d = words_ == 0 ? kBoostRadius + 1 : NearestPacked(q);
  return Sigmoid(params_.mu_out + BoostAt(d) + noise(rng));
}

absl::StatusOr<GeneratedDataset> GenerateDataset(int n_records, int n_features,
                                                 uint64_t seed) {
  if (n_records < 2 || n_records % 2 != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "n_records must be a positive even number, got ", n_records));
  }
  if (n_features < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("n_features must be >= 1, got ", n_features));
  }
  Rng rng = MakeRng(seed, "dataset");
  GeneratedDataset out;
  out.column_probs = DrawColumnProbs(n_features, rng);
  std::vector<DataRecord> records(n_records);
  for (int i = 0; i < n_records; ++i) {
    records[i].id = i;
    records[i].payload = DrawBits(out.column_probs, rng);
  }
  std::vector<RecordId> ids(n_records);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(n_records / 2);
  ASSIGN_OR_RETURN(out.dataset, Dataset::Create(PayloadSchema::kBinary,
                                                std::move(records), ids));
  return out;
}

absl::StatusOr<SignalMatrix> SynthesizeSignals(
    std::span<const DataRecord> records, const MemorizationModel& model,
    std::span<const BitVector> target_training,
    std::span<const std::vector<BitVector>> ref_training) {
  RETURN_IF_ERROR(ValidateMemorizationModel(model));
  const int n_refs = static_cast<int>(ref_training.size());
  SimulatedModel target(model, 0, target_training);
  std::vector<SimulatedModel> refs;
  refs.reserve(n_refs);
  for (int k = 0; k < n_refs; ++k) refs.emplace_back(model, k + 1, ref_training[k]);
  std::vector<RecordId> ids;
  std::vector<double> target_signals;
  std::vector<double> ref_signals;
  ids.reserve(records.size());
  for (const DataRecord& r : records) {
    if (!r.is_binary()) {
      return absl::InvalidArgumentError("the simulator handles binary records only");
    }
    ids.push_back(r.id);
    target_signals.push_back(target.Signal(r.bits()));
    for (const SimulatedModel& m : refs) ref_signals.push_back(m.Signal(r.bits()));
  }
  return SignalMatrix::Create(std::move(ids), std::move(target_signals),
                              std::move(ref_signals), n_refs);
}

absl::StatusOr<SignalMatrix> SynthesizeSignals(const Dataset& dataset,
                                               const MemorizationModel& model,
                                               int n_refs) {
  if (n_refs < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("n_refs must be >= 1, got ", n_refs));
  }
  const std::vector<RecordId> members(dataset.member_ids().begin(),
                                      dataset.member_ids().end());
  const std::vector<BitVector> training = Payloads(dataset, members);
  const std::vector<std::vector<BitVector>> refs(n_refs);
  return SynthesizeSignals(dataset.records(), model, training, refs);
}

std::string_view GameKindName(GameKind kind) {
  switch (kind) {
    case GameKind::kMaskedColumns:
      return "masked-columns";
    case GameKind::kPerturbedPoints:
      return "perturbed-points";
    case GameKind::kIdentityPool:
      return "identity-pool";
    case GameKind::kTransformPool:
      return "transform-pool";
  }
  return "masked-columns";
}

std::optional<GameKind> ParseGameKind(std::string_view name) {
  for (GameKind k : {GameKind::kMaskedColumns, GameKind::kPerturbedPoints,
                     GameKind::kIdentityPool, GameKind::kTransformPool}) {
    if (GameKindName(k) == name) return k;
  }
  return std::nullopt;
}

double DefaultRmiaA(GameKind kind) {
  return kind == GameKind::kIdentityPool ? 0.33 : 0.5;
}

absl::Status ValidateSimulatorConfig(const SimulatorConfig& c) {
  RETURN_IF_ERROR(ValidateMemorizationModel(c.model));
  RETURN_IF_ERROR(ValidateSamplerSpec(c.sampler));
  if (c.n_refs < 1) return absl::InvalidArgumentError("n_refs must be >= 1");
  if (c.n_games < 0) return absl::InvalidArgumentError("n_games must be >= 0");
  if (c.n_features < 1) return absl::InvalidArgumentError("n_features must be >= 1");
  if (c.max_out_range_tries < 1) {
    return absl::InvalidArgumentError("max_out_range_tries must be >= 1");
  }
  if (c.force_bit.has_value() && *c.force_bit != 0 && *c.force_bit != 1) {
    return absl::InvalidArgumentError("force_bit must be 0 or 1");
  }
  switch (c.game) {
    case GameKind::kMaskedColumns:
      if (c.mask_size < 0 || c.mask_size > c.n_features) {
        return absl::InvalidArgumentError(absl::StrCat(
            "mask_size must lie in [0, n_features], got ", c.mask_size));
      }
      break;
    case GameKind::kPerturbedPoints:
      if (c.perturb_distance < 0 || c.perturb_distance > c.n_features) {
        return absl::InvalidArgumentError(absl::StrCat(
            "perturb_distance must lie in [0, n_features], got ",
            c.perturb_distance));
      }
      break;
    case GameKind::kIdentityPool:
      if (c.n_identities < 2 || c.photos_per_identity < 2) {
        return absl::InvalidArgumentError(
            "identity-pool needs >= 2 identities and >= 2 photos per identity");
      }
      if (!(c.photo_flip_prob >= 0.0 && c.photo_flip_prob <= 1.0)) {
        return absl::InvalidArgumentError("photo_flip_prob must lie in [0, 1]");
      }
      if (c.member_density.has_value() &&
          !(*c.member_density >= 0.0 && *c.member_density <= 1.0)) {
        return absl::InvalidArgumentError("member_density must lie in [0, 1]");
      }
      break;
    case GameKind::kTransformPool:
      if (c.n_transforms < 1 || c.range_size < 1 ||
          c.range_size > c.n_transforms) {
        return absl::InvalidArgumentError(
            "transform-pool needs 1 <= range_size <= n_transforms");
      }
      if (c.transform_flips < 1 || c.transform_flips > c.n_features) {
        return absl::InvalidArgumentError(
            "transform_flips must lie in [1, n_features]");
      }
      if (!(c.augment_member_prob >= 0.0 && c.augment_member_prob <= 1.0)) {
        return absl::InvalidArgumentError(
            "augment_member_prob must lie in [0, 1]");
      }
      break;
  }
  if (!IsPoolGame(c.game) && (c.n_records < 2 || c.n_records % 2 != 0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "n_records must be a positive even number, got ", c.n_records));
  }
  if (c.game == GameKind::kTransformPool && c.n_records < 2) {
    return absl::InvalidArgumentError("n_records must be >= 2");
  }
  return absl::OkStatus();
}

json SimulatorConfigToJson(const SimulatorConfig& c) {
  json j;
  j["game"] = std::string(GameKindName(c.game));
  j["n_records"] = c.n_records;
  j["n_features"] = c.n_features;
  j["n_refs"] = c.n_refs;
  j["n_games"] = c.n_games;
  j["model"] = {{"mu_in", c.model.mu_in},
                {"mu_out", c.model.mu_out},
                {"sigma", c.model.sigma},
                {"decay", c.model.decay}};
  j["mask_size"] = c.mask_size;
  j["perturb_distance"] = c.perturb_distance;
  j["n_identities"] = c.n_identities;
  j["photos_per_identity"] = c.photos_per_identity;
  j["photo_flip_prob"] = c.photo_flip_prob;
  j["member_density"] = c.member_density.has_value() ? json(*c.member_density)
                                                     : json(nullptr);
  j["n_transforms"] = c.n_transforms;
  j["range_size"] = c.range_size;
  j["transform_flips"] = c.transform_flips;
  j["augment_member_prob"] = c.augment_member_prob;
  j["calibration"] = c.calibration;
  j["max_out_range_tries"] = c.max_out_range_tries;
  j["force_bit"] = c.force_bit.has_value() ? json(*c.force_bit) : json(nullptr);
  return j;
}

namespace {

template <typename T>
absl::Status ReadField(const json& j, const char* key, T* out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return absl::OkStatus();
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) {
      return absl::InvalidArgumentError(absl::StrCat("\"", key, "\" must be a boolean"));
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) {
      return absl::InvalidArgumentError(absl::StrCat("\"", key, "\" must be an integer"));
    }
  } else {
    if (!it->is_number()) {
      return absl::InvalidArgumentError(absl::StrCat("\"", key, "\" must be a number"));
    }
  }
  *out = it->get<T>();
  return absl::OkStatus();
}

absl::Status CheckKeys(const json& j, std::initializer_list<const char*> known,
                       std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key \"", it.key(), "\" in ", AbslView(where)));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<SimulatorConfig> SimulatorConfigFromJson(const json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("\"simulator\" must be an object");
  }
  RETURN_IF_ERROR(CheckKeys(
      j,
      {"game", "n_records", "n_features", "n_refs", "n_games", "model",
       "mask_size", "perturb_distance", "n_identities", "photos_per_identity",
       "photo_flip_prob", "member_density", "n_transforms", "range_size",
       "transform_flips", "augment_member_prob", "calibration",
       "max_out_range_tries", "force_bit"},
      "simulator"));
  SimulatorConfig c;
  if (auto it = j.find("game"); it != j.end()) {
    if (!it->is_string()) return absl::InvalidArgumentError("\"game\" must be a string");
    auto kind = ParseGameKind(it->get<std::string>());
    if (!kind.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown simulator game ", it->dump()));
    }
    c.game = *kind;
  }
  RETURN_IF_ERROR(ReadField(j, "n_records", &c.n_records));
  RETURN_IF_ERROR(ReadField(j, "n_features", &c.n_features));
  RETURN_IF_ERROR(ReadField(j, "n_refs", &c.n_refs));
  RETURN_IF_ERROR(ReadField(j, "n_games", &c.n_games));
  if (auto it = j.find("model"); it != j.end()) {
    if (!it->is_object()) return absl::InvalidArgumentError("\"model\" must be an object");
    RETURN_IF_ERROR(CheckKeys(*it, {"mu_in", "mu_out", "sigma", "decay"},
                              "simulator.model"));
    RETURN_IF_ERROR(ReadField(*it, "mu_in", &c.model.mu_in));
    RETURN_IF_ERROR(ReadField(*it, "mu_out", &c.model.mu_out));
    RETURN_IF_ERROR(ReadField(*it, "sigma", &c.model.sigma));
    RETURN_IF_ERROR(ReadField(*it, "decay", &c.model.decay));
  }
  RETURN_IF_ERROR(ReadField(j, "mask_size", &c.mask_size));
  RETURN_IF_ERROR(ReadField(j, "perturb_distance", &c.perturb_distance));
  RETURN_IF_ERROR(ReadField(j, "n_identities", &c.n_identities));
  RETURN_IF_ERROR(ReadField(j, "photos_per_identity", &c.photos_per_identity));
  RETURN_IF_ERROR(ReadField(j, "photo_flip_prob", &c.photo_flip_prob));
  if (auto it = j.find("member_density"); it != j.end() && !it->is_null()) {
    double d = 0.0;
    RETURN_IF_ERROR(ReadField(j, "member_density", &d));
    c.member_density = d;
  }
  RETURN_IF_ERROR(ReadField(j, "n_transforms", &c.n_transforms));
  RETURN_IF_ERROR(ReadField(j, "range_size", &c.range_size));
  RETURN_IF_ERROR(ReadField(j, "transform_flips", &c.transform_flips));
  RETURN_IF_ERROR(ReadField(j, "augment_member_prob", &c.augment_member_prob));
  RETURN_IF_ERROR(ReadField(j, "calibration", &c.calibration));
  RETURN_IF_ERROR(ReadField(j, "max_out_range_tries", &c.max_out_range_tries));
  if (auto it = j.find("force_bit"); it != j.end() && !it->is_null()) {
    int b = 0;
    RETURN_IF_ERROR(ReadField(j, "force_bit", &b));
    c.force_bit = b;
  }
  RETURN_IF_ERROR(ValidateSimulatorConfig(c));
  return c;
}

namespace {

// Records and units of a world, before any model is trained on it.
struct UntrainedWorld {
  std::vector<DataRecord> records;
  std::vector<std::vector<RecordId>> units;
  std::vector<std::pair<std::string, std::vector<RecordId>>> pools;
};

UntrainedWorld GenerateIdentityRecords(const SimulatorConfig& c, Rng& rng) {
  UntrainedWorld w;
  const std::vector<double> probs = DrawColumnProbs(c.n_features, rng);
  std::bernoulli_distribution flip(c.photo_flip_prob);
  RecordId next = 0;
  for (int k = 0; k < c.n_identities; ++k) {
    const BitVector prototype = DrawBits(probs, rng);
    const std::string tag = absl::StrCat("id", k);
    std::vector<RecordId> photos;
    for (int p = 0; p < c.photos_per_identity; ++p) {
      DataRecord r;
      r.id = next++;
      BitVector bits = prototype;
      for (uint8_t& b : bits) {
        if (flip(rng)) b ^= 1;
      }
      r.payload = std::move(bits);
      r.identity_tag = tag;
      photos.push_back(r.id);
      w.records.push_back(std::move(r));
    }
    w.pools.emplace_back(absl::StrCat("pool_", k), photos);
    w.units.push_back(std::move(photos));
  }
  return w;
}

UntrainedWorld GenerateTransformRecords(const SimulatorConfig& c, Rng& rng) {
  UntrainedWorld w;
  const std::vector<double> probs = DrawColumnProbs(c.n_features, rng);
  std::vector<std::vector<int>> transforms;
  for (int t = 0; t < c.n_transforms; ++t) {
    transforms.push_back(SampleColumns(c.n_features, c.transform_flips, rng));
  }
  RecordId next = 0;
  for (int i = 0; i < c.n_records; ++i) {
    const std::string tag = absl::StrCat("img", i);
    DataRecord base;
    base.id = next++;
    base.payload = DrawBits(probs, rng);
    base.identity_tag = tag;
    std::vector<RecordId> unit = {base.id};
    std::vector<RecordId> variants;
    for (const std::vector<int>& flips : transforms) {
      DataRecord v;
      v.id = next++;
      BitVector bits = base.bits();
      for (int j : flips) bits[j] ^= 1;
      v.payload = std::move(bits);
      v.identity_tag = tag;
      unit.push_back(v.id);
      variants.push_back(v.id);
      w.records.push_back(std::move(v));
    }
    w.records.push_back(std::move(base));
    w.pools.emplace_back(absl::StrCat("pool_", i), std::move(variants));
    w.units.push_back(std::move(unit));
  }
  return w;
}

std::vector<RecordId> DrawUnitMembers(const SimulatorConfig& c,
                                      const std::vector<std::vector<RecordId>>& units,
                                      Rng& rng) {
  std::vector<size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(units.size() / 2);
  std::sort(order.begin(), order.end());
  std::vector<RecordId> members;
  for (size_t u : order) {
    const std::vector<RecordId>& unit = units[u];
    switch (c.game) {
      case GameKind::kMaskedColumns:
      case GameKind::kPerturbedPoints:
        members.insert(members.end(), unit.begin(), unit.end());
        break;
      case GameKind::kIdentityPool: {
        std::vector<RecordId> photos = unit;
        std::shuffle(photos.begin(), photos.end(), rng);
        members.insert(members.end(), photos.begin(),
                       photos.begin() + photos.size() / 2);
        break;
      }
      case GameKind::kTransformPool: {
        members.push_back(unit.front());
        std::bernoulli_distribution augmented(c.augment_member_prob);
        for (size_t v = 1; v < unit.size(); ++v) {
          if (augmented(rng)) members.push_back(unit[v]);
        }
        break;
      }
    }
  }
  std::sort(members.begin(), members.end());
  return members;
}

absl::StatusOr<SimWorld> BuildWorld(const SimulatorConfig& c,
                                    UntrainedWorld untrained,
                                    const std::vector<RecordId>& members) {
  SimWorld world;
  ASSIGN_OR_RETURN(world.dataset, Dataset::Create(PayloadSchema::kBinary,
                                                  std::move(untrained.records),
                                                  members));
  world.column_means = ComputeColumnMeans(world.dataset);
  for (auto& [pool_id, ids] : untrained.pools) {
    std::vector<DataRecord> candidates;
    for (RecordId id : ids) candidates.push_back(*world.dataset.Find(id));
    world.pools.AddPool(pool_id, std::move(candidates));
  }
  world.units = std::move(untrained.units);
  (void)c;
  return world;
}

absl::StatusOr<UntrainedWorld> GenerateUntrained(const SimulatorConfig& c,
                                                 uint64_t seed) {
  Rng rng = MakeRng(seed, "world");
  switch (c.game) {
    case GameKind::kMaskedColumns:
    case GameKind::kPerturbedPoints: {
      ASSIGN_OR_RETURN(GeneratedDataset g,
                       GenerateDataset(c.n_records, c.n_features, seed));
      UntrainedWorld w;
      w.records = g.dataset.records();
      for (const DataRecord& r : w.records) w.units.push_back({r.id});
      return w;
    }
    case GameKind::kIdentityPool:
      return GenerateIdentityRecords(c, rng);
    case GameKind::kTransformPool:
      return GenerateTransformRecords(c, rng);
  }
  return absl::InternalError("unhandled game kind");
}

}  // namespace

std::vector<RecordId> DrawTrainingSet(const SimulatorConfig& config,
                                      const SimWorld& world, uint64_t seed,
                                      std::string_view membership_key) {
  Rng rng = MakeRng(seed, absl::StrCat("members/", AbslView(membership_key)));
  return DrawUnitMembers(config, world.units, rng);
}

absl::StatusOr<SimWorld> GenerateWorld(const SimulatorConfig& config,
                                       uint64_t seed) {
  RETURN_IF_ERROR(ValidateSimulatorConfig(config));
  ASSIGN_OR_RETURN(UntrainedWorld untrained, GenerateUntrained(config, seed));
  std::vector<RecordId> members;
  if (config.game == GameKind::kMaskedColumns ||
      config.game == GameKind::kPerturbedPoints) {
    // Keep the generator's own 50/50 split for tabular worlds.
    ASSIGN_OR_RETURN(GeneratedDataset g,
                     GenerateDataset(config.n_records, config.n_features, seed));
    members.assign(g.dataset.member_ids().begin(), g.dataset.member_ids().end());
  } else {
    Rng rng = MakeRng(seed, "members/target");
    members = DrawUnitMembers(config, untrained.units, rng);
  }
  return BuildWorld(config, std::move(untrained), members);
}

namespace {

struct GameContext {
  const SimulatorConfig& config;
  const SimWorld& world;
  std::vector<DataRecord> members;
  std::vector<DataRecord> nonmembers;
  std::vector<size_t> member_units;
  std::vector<size_t> nonmember_units;
};

absl::StatusOr<std::pair<RangeQuery, DataRecord>> TabularRange(
    const GameContext& ctx, const std::string& range_id,
    const DataRecord& source, Rng& rng) {
  const SimulatorConfig& c = ctx.config;
  if (c.game == GameKind::kMaskedColumns) {
    RangeQuery range =
        MakeMaskedRange(range_id, source, SampleColumns(c.n_features, c.mask_size, rng));
    DataRecord query = ModeImpute(range, ctx.world.column_means);
    return std::make_pair(std::move(range), std::move(query));
  }
  std::vector<int> flips = SampleColumns(c.n_features, c.perturb_distance, rng);
  DataRecord query = source;
  if (!flips.empty()) {
    query.id = kUnassignedId;
    query.split = Split::kUnknown;
    BitVector& bits = std::get<BitVector>(query.payload);
    for (int j : flips) bits[j] ^= 1;
  }
  RangeQuery range = MakeMaskedRange(range_id, query, std::move(flips));
  range.center.id = source.id;
  return std::make_pair(std::move(range), std::move(query));
}

std::pair<RangeQuery, DataRecord> PoolRange(const GameContext& ctx,
                                            const std::string& range_id,
                                            size_t unit, Rng& rng) {
  const SimulatorConfig& c = ctx.config;
  const std::vector<RecordId>& ids = ctx.world.units[unit];
  RangeQuery range;
  range.range_id = range_id;
  range.range_fn = RangeFunction::kCandidatePool;
  range.pool_id = absl::StrCat("pool_", unit);
  DataRecord query;
  if (c.game == GameKind::kIdentityPool) {
    // Center: a photo the target was not trained on.
    std::vector<RecordId> holdout;
    for (RecordId id : ids) {
      if (!ctx.world.dataset.IsMember(id)) holdout.push_back(id);
    }
    if (holdout.empty()) holdout = ids;
    std::uniform_int_distribution<size_t> pick(0, holdout.size() - 1);
    range.center = *ctx.world.dataset.Find(holdout[pick(rng)]);
    range.size = 0;
    query = range.center;
  } else {
    range.center = *ctx.world.dataset.Find(ids.front());
    range.size = c.range_size;
    query = *ctx.world.dataset.Find(ids[1]);
  }
  return {std::move(range), std::move(query)};
}

}  // namespace

absl::StatusOr<ConstructedGame> ConstructGame(const SimulatorConfig& config,
                                              const SimWorld& world,
                                              uint64_t seed) {
  RETURN_IF_ERROR(ValidateSimulatorConfig(config));
  GameContext ctx{config, world, world.dataset.Members(),
                  world.dataset.Nonmembers(), {}, {}};
  for (size_t u = 0; u < world.units.size(); ++u) {
    const bool any = std::any_of(world.units[u].begin(), world.units[u].end(),
                                 [&](RecordId id) { return world.dataset.IsMember(id); });
    (any ? ctx.member_units : ctx.nonmember_units).push_back(u);
  }
  const bool pool_game = IsPoolGame(config.game);
  ConstructedGame game;
  for (int g = 0; g < config.n_games; ++g) {
    Rng rng = MakeRng(seed, "game", {static_cast<uint64_t>(g)});
    std::bernoulli_distribution fair(0.5);
    const int bit = config.force_bit.has_value() ? *config.force_bit : (fair(rng) ? 1 : 0);
    const std::string range_id = absl::StrCat("r", g);
    bool built = false;
    for (int attempt = 0; attempt < config.max_out_range_tries && !built; ++attempt) {
      std::pair<RangeQuery, DataRecord> made;
      if (pool_game) {
        const auto& units = bit ? ctx.member_units : ctx.nonmember_units;
        if (units.empty()) {
          return absl::FailedPreconditionError(absl::StrCat(
              "game ", g, ": no ", bit ? "member" : "non-member", " units"));
        }
        std::uniform_int_distribution<size_t> pick(0, units.size() - 1);
        made = PoolRange(ctx, range_id, units[pick(rng)], rng);
      } else {
        const auto& source = bit ? ctx.members : ctx.nonmembers;
        if (source.empty()) {
          return absl::FailedPreconditionError(absl::StrCat(
              "game ", g, ": no ", bit ? "member" : "non-member", " records"));
        }
        std::uniform_int_distribution<size_t> pick(0, source.size() - 1);
        ASSIGN_OR_RETURN(made, TabularRange(ctx, range_id, source[pick(rng)], rng));
      }
      ASSIGN_OR_RETURN(RangeLabel label,
                       LabelRange(made.first, ctx.members, &world.pools));
      if (bit == 1 || label.bit == 0) {
        game.ranges.push_back(std::move(made.first));
        game.queries.push_back(std::move(made.second));
        game.coins.push_back(bit);
        game.labels.push_back(label);
        built = true;
      }
    }
    if (!built) {
      return absl::ResourceExhaustedError(absl::StrCat(
          "game ", g, ": could not construct an out-range in ",
          config.max_out_range_tries, " tries"));
    }
  }
  return game;
}

namespace {

SamplerSpec SamplerFor(const SimulatorConfig& config, uint64_t sampling_seed) {
  SamplerSpec spec = config.sampler;
  spec.seed = sampling_seed;
  spec.kind = IsPoolGame(config.game) ? SamplerKind::kCandidatePool
                                      : SamplerKind::kBernoulliTabular;
  return spec;
}

absl::StatusOr<std::vector<DataRecord>> SampleRange(
    const SimulatorConfig& config, const SimWorld& world,
    const RangeQuery& range, const SamplerSpec& spec,
    std::optional<double> density) {
  if (IsPoolGame(config.game)) {
    return SamplePool(range, world.pools, spec, density);
  }
  return SampleBernoulliTabular(range, world.column_means, spec);
}

std::vector<DataRecord> AllRecords(const Dataset& a, const Dataset& b) {
  std::vector<DataRecord> out = a.records();
  out.insert(out.end(), b.records().begin(), b.records().end());
  return out;
}

absl::StatusOr<CalibrationWorld> BuildCalibration(const SimulatorConfig& config,
                                                  uint64_t world_seed,
                                                  uint64_t sampling_seed) {
  const uint64_t seed = DeriveSeed(world_seed, "calibration");
  ASSIGN_OR_RETURN(UntrainedWorld untrained, GenerateUntrained(config, seed));
  ASSIGN_OR_RETURN(SimWorld world, BuildWorld(config, std::move(untrained), {}));
  CalibrationWorld cal;
  for (int k = 0; k < config.n_refs; ++k) {
    cal.members_by_model.push_back(
        DrawTrainingSet(config, world, seed, absl::StrCat("ref-", k)));
  }
  // Ranges around arbitrary records: whether they are in-ranges depends on
  // which reference model later plays the target.
  GameContext ctx{config, world, {}, {}, {}, {}};
  CandidateRegistry registry(world.dataset);
  const SamplerSpec spec = SamplerFor(config, DeriveSeed(sampling_seed, "calibration"));
  for (int g = 0; g < config.n_games; ++g) {
    Rng rng = MakeRng(seed, "calibration-game", {static_cast<uint64_t>(g)});
    const std::string range_id = absl::StrCat("c", g);
    std::pair<RangeQuery, DataRecord> made;
    if (IsPoolGame(config.game)) {
      std::uniform_int_distribution<size_t> pick(0, world.units.size() - 1);
      made = PoolRange(ctx, range_id, pick(rng), rng);
    } else {
      std::uniform_int_distribution<size_t> pick(0, world.dataset.size() - 1);
      ASSIGN_OR_RETURN(made, TabularRange(ctx, range_id,
                                          world.dataset.records()[pick(rng)], rng));
    }
    made.first.query_id = registry.Register(made.second);
    ASSIGN_OR_RETURN(std::vector<DataRecord> samples,
                     SampleRange(config, world, made.first, spec, std::nullopt));
    AttackSet set{range_id, {}};
    for (const DataRecord& s : samples) set.candidates.push_back(registry.Register(s));
    cal.attack_sets.push_back(std::move(set));
    cal.ranges.push_back(std::move(made.first));
  }
  ASSIGN_OR_RETURN(cal.candidates, registry.NewRecordsDataset());
  std::vector<std::vector<BitVector>> ref_training;
  for (const auto& members : cal.members_by_model) {
    ref_training.push_back(Payloads(world.dataset, members));
  }
  const std::vector<DataRecord> records = AllRecords(world.dataset, cal.candidates);
  ASSIGN_OR_RETURN(cal.signals,
                   SynthesizeSignals(records, config.model, {}, ref_training));
  cal.pools = std::move(world.pools);
  cal.dataset = std::move(world.dataset);
  return cal;
}

}  // namespace

absl::StatusOr<Simulation> Simulate(const SimulatorConfig& config,
                                    uint64_t world_seed, uint64_t sampling_seed) {
  RETURN_IF_ERROR(ValidateSimulatorConfig(config));
  SimulatorConfig seeded = config;
  seeded.model.seed = world_seed;
  Simulation sim;
  ASSIGN_OR_RETURN(sim.world, GenerateWorld(seeded, world_seed));
  ASSIGN_OR_RETURN(ConstructedGame game, ConstructGame(seeded, sim.world, world_seed));
  CandidateRegistry registry(sim.world.dataset);
  const SamplerSpec spec = SamplerFor(seeded, sampling_seed);
  for (size_t i = 0; i < game.ranges.size(); ++i) {
    game.ranges[i].query_id = registry.Register(game.queries[i]);
  }
  for (size_t i = 0; i < game.ranges.size(); ++i) {
    const RangeQuery& range = game.ranges[i];
    std::optional<double> density;
    if (seeded.game == GameKind::kIdentityPool && game.labels[i].bit == 1) {
      density = seeded.member_density;
    }
    ASSIGN_OR_RETURN(std::vector<DataRecord> samples,
                     SampleRange(seeded, sim.world, range, spec, density));
    AttackSet set{range.range_id, {}};
    for (const DataRecord& s : samples) set.candidates.push_back(registry.Register(s));
    sim.attack_sets.push_back(std::move(set));
  }
  sim.ranges = std::move(game.ranges);
  sim.coins = std::move(game.coins);
  sim.labels = std::move(game.labels);
  ASSIGN_OR_RETURN(sim.candidates, registry.NewRecordsDataset());

  const std::vector<RecordId> member_ids(sim.world.dataset.member_ids().begin(),
                                         sim.world.dataset.member_ids().end());
  const std::vector<BitVector> training = Payloads(sim.world.dataset, member_ids);
  const std::vector<std::vector<BitVector>> refs(seeded.n_refs);
  const std::vector<DataRecord> records = AllRecords(sim.world.dataset, sim.candidates);
  ASSIGN_OR_RETURN(sim.signals,
                   SynthesizeSignals(records, seeded.model, training, refs));
  for (const DataRecord& r : sim.world.dataset.records()) {
    if (r.split != Split::kMember) sim.population.push_back(r.id);
  }
  if (seeded.calibration && seeded.n_refs >= 2) {
    ASSIGN_OR_RETURN(sim.calibration,
                     BuildCalibration(seeded, world_seed, sampling_seed));
  }
  return sim;
}

absl::StatusOr<SweepInput> MakeSweepInput(const Simulation& sim,
                                          const AttackSettings& settings,
                                          uint64_t seed) {
  if (!sim.calibration.has_value()) {
    return absl::FailedPreconditionError(
        "trim sweep needs a calibration world (>= 2 reference models)");
  }
  const CalibrationWorld& cal = *sim.calibration;
  SweepInput in;
  in.dataset = &cal.dataset;
  in.signals = &cal.signals;
  in.members_by_model = cal.members_by_model;
  in.ranges = cal.ranges;
  in.attack_sets = cal.attack_sets;
  in.pools = &cal.pools;
  in.scorer = settings.scorer;
  in.grid = settings.sweep_grid.value_or(std::vector<TrimConfig>{settings.trim});
  in.seed = seed;
  in.jobs = settings.jobs;
  return in;
}

absl::StatusOr<GameResult> AttackSimulation(const Simulation& sim,
                                            const AttackSettings& settings,
                                            uint64_t seed) {
  GameResult result;
  result.labels = sim.labels;
  result.trim = settings.trim;
  if (settings.sweep_grid.has_value()) {
    ASSIGN_OR_RETURN(SweepInput in, MakeSweepInput(sim, settings, seed));
    ASSIGN_OR_RETURN(SweepResult swept, SweepTrim(in));
    result.trim = swept.best;
  }
  ScorerSpec spec = settings.scorer;
  spec.rmia.population_ids = sim.population;
  ASSIGN_OR_RETURN(std::unique_ptr<PointScorer> scorer, MakeScorer(sim.signals, spec));
  ASSIGN_OR_RETURN(result.mia_scores, PointBaselineScores(sim.ranges, *scorer));
  ASSIGN_OR_RETURN(result.ramia_scores,
                   RangeAttackScores(sim.ranges, sim.attack_sets, *scorer,
                                     result.trim, settings.jobs));
  ASSIGN_OR_RETURN(std::vector<RocPoint> mia_roc, Roc(result.mia_scores, result.labels));
  ASSIGN_OR_RETURN(result.mia_auc, Auc(mia_roc));
  ASSIGN_OR_RETURN(std::vector<RocPoint> ramia_roc,
                   Roc(result.ramia_scores, result.labels));
  ASSIGN_OR_RETURN(result.ramia_auc, Auc(ramia_roc));
  return result;
}

absl::StatusOr<GameResult> PlayRangeGame(const SimulatorConfig& config,
                                         const AttackSettings& settings,
                                         uint64_t seed) {
  ASSIGN_OR_RETURN(Simulation sim, Simulate(config, seed, seed));
  return AttackSimulation(sim, settings, seed);
}

}  // namespace rangemia
