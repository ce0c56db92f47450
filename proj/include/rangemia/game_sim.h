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

#ifndef RANGEMIA_GAME_SIM_H_
#define RANGEMIA_GAME_SIM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/dataset.h"
#include "rangemia/eval.h"
#include "rangemia/range_engine.h"
#include "rangemia/record.h"
#include "rangemia/samplers.h"
#include "rangemia/scorers.h"
#include "rangemia/signal_matrix.h"

namespace rangemia {

// How a simulated model responds to records near its training set. The
// logit of P(x | model) is
//   mu_out + (mu_in - mu_out) * decay^d(x) + N(0, sigma^2)
// where d(x) is the Hamming distance from x to the nearest training record.
// Records farther than kBoostRadius get no boost. The noise is a fixed
// function of (seed, model, payload), so equal inputs give equal outputs.
struct MemorizationModel {
  double mu_in = 3.0;
  double mu_out = 0.0;
  double sigma = 0.5;
  double decay = 0.5;
  uint64_t seed = 0;
};

inline constexpr int kBoostRadius = 8;

absl::Status ValidateMemorizationModel(const MemorizationModel& model);

// One simulated model: its training payloads and its noise stream.
class SimulatedModel {
 public:
  SimulatedModel(MemorizationModel params, uint64_t model_key,
                 std::span<const BitVector> training);

  // Distance to the nearest training record, or kBoostRadius + 1 when none
  // lies within kBoostRadius.
  int NearestTrainingDistance(const BitVector& x) const;
  double Boost(const BitVector& x) const;
  double Signal(const BitVector& x) const;

 private:
  int NearestPacked(const std::vector<uint64_t>& q) const;
  double BoostAt(int d) const;

  MemorizationModel params_;
  uint64_t model_key_;
  size_t words_ = 0;
  std::vector<uint64_t> packed_;  // training records, words_ words each
};

struct GeneratedDataset {
  Dataset dataset;
  std::vector<double> column_probs;  // p_j the features were drawn with
};

// i.i.d. Bernoulli(p_j) features with p_j ~ U(0.1, 0.9); a random half of
// the records are members.
absl::StatusOr<GeneratedDataset> GenerateDataset(int n_records, int n_features,
                                                 uint64_t seed);

// Target signals boosted by the dataset's members; reference signals
// unboosted (references never trained on these records).
absl::StatusOr<SignalMatrix> SynthesizeSignals(const Dataset& dataset,
                                               const MemorizationModel& model,
                                               int n_refs);

// General form: signals of `records` for a target model trained on
// `target_training` and reference model k trained on `ref_training[k]`.
absl::StatusOr<SignalMatrix> SynthesizeSignals(
    std::span<const DataRecord> records, const MemorizationModel& model,
    std::span<const BitVector> target_training,
    std::span<const std::vector<BitVector>> ref_training);

enum class GameKind {
  // Ranges of masked columns around members / verified-empty ranges around
  // non-members; point query = mode-imputed center.
  kMaskedColumns,
  // Point queries at Hamming distance `perturb_distance` from members and
  // non-members; the range masks the perturbed columns.
  kPerturbedPoints,
  // Photos of one identity: half of a member identity's photos are trained
  // on; ranges are identity pools.
  kIdentityPool,
  // Fixed transforms of one image; variants of member images are trained on
  // with probability `augment_member_prob`.
  kTransformPool,
};

std::string_view GameKindName(GameKind kind);
std::optional<GameKind> ParseGameKind(std::string_view name);

struct SimulatorConfig {
  GameKind game = GameKind::kMaskedColumns;
  int n_records = 2000;
  int n_features = 64;
  int n_refs = 3;
  int n_games = 2000;
  MemorizationModel model;
  // masked-columns / perturbed-points
  int mask_size = 10;
  int perturb_distance = 2;
  // identity-pool
  int n_identities = 400;
  int photos_per_identity = 12;
  double photo_flip_prob = 0.05;
  std::optional<double> member_density;
  // transform-pool
  int n_transforms = 15;
  int range_size = 15;
  int transform_flips = 2;
  double augment_member_prob = 0.5;
  // Attack-side sampling; the sampler seed is set per simulation.
  SamplerSpec sampler;
  // Build the reference-model calibration world used to sweep the trim.
  bool calibration = true;
  // Retry cap for constructing an out-range.
  int max_out_range_tries = 1000;
  // Coin override: force every game to b = 1 (or b = 0).
  std::optional<int> force_bit;
};

absl::Status ValidateSimulatorConfig(const SimulatorConfig& config);
nlohmann::json SimulatorConfigToJson(const SimulatorConfig& config);
absl::StatusOr<SimulatorConfig> SimulatorConfigFromJson(const nlohmann::json& j);

// Records and membership structure of a simulated population.
struct SimWorld {
  Dataset dataset;  // splits follow the target model's training set
  std::vector<double> column_means;
  CandidateProvider pools;
  // Membership units: a record, an identity's photos, an image and its
  // transforms. Training sets are drawn unit by unit.
  std::vector<std::vector<RecordId>> units;
};

// Generates a world whose dataset splits follow the target model's training
// set.
absl::StatusOr<SimWorld> GenerateWorld(const SimulatorConfig& config,
                                       uint64_t seed);

// Training set of one model over a world's units. `membership_key` (e.g.
// "target" or "ref-2") separates the draws of models sharing the records.
std::vector<RecordId> DrawTrainingSet(const SimulatorConfig& config,
                                      const SimWorld& world, uint64_t seed,
                                      std::string_view membership_key);

// Ranges of the game with their coins and labels, before sampling.
struct ConstructedGame {
  std::vector<RangeQuery> ranges;
  std::vector<int> coins;
  std::vector<RangeLabel> labels;
  std::vector<DataRecord> queries;  // point query per range (id may be unassigned)
};

// Challenger side: flips a fair coin per game and builds an in-range around a
// member or an out-range verified (by LabelRange) to contain no member.
absl::StatusOr<ConstructedGame> ConstructGame(const SimulatorConfig& config,
                                              const SimWorld& world,
                                              uint64_t seed);

struct CalibrationWorld {
  Dataset dataset;
  Dataset candidates;
  CandidateProvider pools;
  std::vector<std::vector<RecordId>> members_by_model;
  std::vector<RangeQuery> ranges;
  std::vector<AttackSet> attack_sets;
  SignalMatrix signals;
};

// Everything a simulated run writes before attacking.
struct Simulation {
  SimWorld world;
  Dataset candidates;  // sampled records not already in the dataset
  std::vector<RangeQuery> ranges;
  std::vector<int> coins;
  std::vector<RangeLabel> labels;
  std::vector<AttackSet> attack_sets;
  SignalMatrix signals;  // covers dataset and candidates
  std::vector<RecordId> population;
  std::optional<CalibrationWorld> calibration;
};

// Builds the world from `world_seed` and samples attack sets with
// `sampling_seed`; re-running with another sampling seed keeps the world,
// the ranges and the point queries fixed.
absl::StatusOr<Simulation> Simulate(const SimulatorConfig& config,
                                    uint64_t world_seed, uint64_t sampling_seed);

// Attack side of a simulated or ingested run.
struct AttackSettings {
  ScorerSpec scorer;
  TrimConfig trim;
  // When set, the trim window is swept on the calibration world.
  std::optional<std::vector<TrimConfig>> sweep_grid;
  int jobs = 1;
};

struct GameResult {
  std::vector<RangeLabel> labels;
  std::vector<RangeScore> mia_scores;
  std::vector<RangeScore> ramia_scores;
  TrimConfig trim;
  double mia_auc = 0.0;
  double ramia_auc = 0.0;
};

absl::StatusOr<GameResult> AttackSimulation(const Simulation& sim,
                                            const AttackSettings& settings,
                                            uint64_t seed);

// Simulate + AttackSimulation.
absl::StatusOr<GameResult> PlayRangeGame(const SimulatorConfig& config,
                                         const AttackSettings& settings,
                                         uint64_t seed);

// Default interpolation coefficient `a` for a game kind.
double DefaultRmiaA(GameKind kind);

// Sweep input over a simulation's calibration world.
absl::StatusOr<SweepInput> MakeSweepInput(const Simulation& sim,
                                          const AttackSettings& settings,
                                          uint64_t seed);

}  // namespace rangemia

#endif  // RANGEMIA_GAME_SIM_H_
