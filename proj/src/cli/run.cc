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

#include "cli/run.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <utility>

#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "cli/config.h"
#include "glog/logging.h"
#include "nlohmann/json.hpp"
#include "rangemia/dataset.h"
#include "rangemia/eval.h"
#include "rangemia/game_sim.h"
#include "rangemia/io.h"
#include "rangemia/range_engine.h"
#include "rangemia/samplers.h"
#include "rangemia/scorers.h"
#include "rangemia/signal_matrix.h"
#include "rangemia/status_macros.h"
#include "rangemia/strings.h"

namespace rangemia::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kManifest[] = "manifest.json";
constexpr char kCandidates[] = "candidates.json";
constexpr char kSignals[] = "signals.csv";
constexpr char kRanges[] = "ranges.json";
constexpr char kAttackSets[] = "attack_sets.json";
constexpr char kLabels[] = "labels.csv";
constexpr char kPopulation[] = "population.txt";
constexpr char kColumnMeans[] = "column_means.csv";
constexpr char kPools[] = "pools.json";
constexpr char kCalibration[] = "calibration";
constexpr char kMembersByModel[] = "members.json";
constexpr char kSweep[] = "sweep.json";
constexpr char kScoresMia[] = "scores_mia.csv";
constexpr char kScoresRamia[] = "scores_ramia.csv";
constexpr char kRoc[] = "roc.csv";
constexpr char kSummary[] = "summary.json";
constexpr char kRepeat[] = "repeat.json";
constexpr char kConfig[] = "config.json";

class Run {
 public:
  Run(RunConfig config, fs::path dir, int jobs, bool force)
      : config_(std::move(config)), dir_(std::move(dir)), jobs_(jobs), force_(force) {}

  const RunConfig& config() const { return config_; }
  const fs::path& dir() const { return dir_; }
  int jobs() const { return jobs_; }
  fs::path Out(std::string_view name) const { return dir_ / name; }

  // True when every output already exists and --force was not given.
  bool Done(std::initializer_list<std::string_view> outputs) const {
    if (force_) return false;
    for (std::string_view o : outputs) {
      if (!fs::exists(dir_ / o)) return false;
    }
    return true;
  }

  // A file of this run, else the configured external input.
  absl::StatusOr<fs::path> Input(std::string_view name,
                                 const std::optional<fs::path>& configured,
                                 std::string_view hint) const {
    if (fs::exists(dir_ / name)) return dir_ / name;
    if (configured.has_value()) {
      if (!fs::exists(*configured)) {
        return absl::NotFoundError(
            absl::StrCat("input ", configured->string(), " does not exist"));
      }
      return *configured;
    }
    return absl::NotFoundError(absl::StrCat("missing input ", AbslView(name),
                                            ": ", AbslView(hint)));
  }

  std::optional<fs::path> OptionalInput(
      std::string_view name, const std::optional<fs::path>& configured) const {
    if (fs::exists(dir_ / name)) return dir_ / name;
    if (configured.has_value() && fs::exists(*configured)) return *configured;
    return std::nullopt;
  }

 private:
  RunConfig config_;
  fs::path dir_;
  int jobs_;
  bool force_;
};

std::string FormatMembersByModel(const std::vector<std::vector<RecordId>>& m) {
  json j = json::object();
  for (size_t k = 0; k < m.size(); ++k) j[absl::StrCat("ref_", k)] = m[k];
  return j.dump() + "\n";
}

absl::StatusOr<std::vector<std::vector<RecordId>>> LoadMembersByModel(
    const fs::path& path) {
  ASSIGN_OR_RETURN(json j, ReadJsonFile(path));
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), ": expected {\"ref_k\": [ids]}"));
  }
  std::vector<std::vector<RecordId>> out(j.size());
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    auto k = key.rfind("ref_", 0) == 0 ? ParseInt(std::string_view(key).substr(4))
                                        : absl::StatusOr<int64_t>(-1);
    if (!k.ok() || *k < 0 || *k >= static_cast<int64_t>(out.size()) ||
        !it->is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path.string(), ": bad training-set entry \"", key, "\""));
    }
    for (const json& id : *it) {
      if (!id.is_number_integer()) {
        return absl::InvalidArgumentError(
            absl::StrCat(path.string(), ": ids must be integers"));
      }
      out[*k].push_back(id.get<RecordId>());
    }
  }
  return out;
}

// Dataset + sampled records, so every id a run refers to resolves.
absl::StatusOr<Dataset> LoadRecords(const fs::path& manifest,
                                    const std::optional<fs::path>& candidates) {
  ASSIGN_OR_RETURN(Dataset base, LoadDatasetManifest(manifest));
  if (!candidates.has_value()) return base;
  ASSIGN_OR_RETURN(Dataset extra, LoadDatasetManifest(*candidates));
  return MergeDatasets(base, extra);
}

absl::Status WriteSimulationFiles(const fs::path& dir, const SimWorld& world,
                                  const Dataset& candidates,
                                  const SignalMatrix& signals,
                                  std::span<const RangeQuery> ranges,
                                  std::span<const AttackSet> attack_sets,
                                  const json& sidecar_extra) {
  RETURN_IF_ERROR(WriteFile(dir / kManifest, SerializeDatasetManifest(world.dataset)));
  RETURN_IF_ERROR(WriteFile(dir / kCandidates, SerializeDatasetManifest(candidates)));
  RETURN_IF_ERROR(WriteSignals(dir / kSignals, signals, sidecar_extra));
  RETURN_IF_ERROR(WriteFile(dir / kRanges, FormatRanges(ranges)));
  RETURN_IF_ERROR(WriteFile(dir / kAttackSets, FormatAttackSets(attack_sets)));
  if (!world.pools.pools().empty()) {
    RETURN_IF_ERROR(WriteFile(dir / kPools, world.pools.ToJson().dump() + "\n"));
  }
  return absl::OkStatus();
}

bool HasRangeKind(std::span<const RangeQuery> ranges, RangeFunction fn) {
  return std::any_of(ranges.begin(), ranges.end(),
                     [fn](const RangeQuery& r) { return r.range_fn == fn; });
}

double DefaultA(const RunConfig& config, std::span<const RangeQuery> ranges) {
  if (config.simulator.has_value()) return DefaultRmiaA(config.simulator->game);
  if (HasRangeKind(ranges, RangeFunction::kHamming)) return 1.0;
  const bool identity_pools = std::any_of(
      ranges.begin(), ranges.end(), [](const RangeQuery& r) {
        return r.range_fn == RangeFunction::kCandidatePool &&
               r.center.identity_tag.has_value();
      });
  return identity_pools ? 0.33 : 0.5;
}

ScorerSpec MakeScorerSpec(const RunConfig& config,
                          std::span<const RangeQuery> ranges) {
  ScorerSpec spec;
  spec.kind = config.scorer;
  spec.rmia.a = config.rmia_a.value_or(DefaultA(config, ranges));
  spec.rmia.gamma = config.rmia_gamma;
  return spec;
}

SampleOrigin SweepBranch(const RunConfig& config,
                         std::span<const RangeQuery> ranges) {
  if (config.sweep.has_value() && config.sweep->branch.has_value()) {
    return *config.sweep->branch;
  }
  return HasRangeKind(ranges, RangeFunction::kCandidatePool) ? SampleOrigin::kReal
                                                             : SampleOrigin::kSynthetic;
}

std::vector<TrimConfig> SweepGrid(const RunConfig& config,
                                  std::span<const RangeQuery> ranges) {
  const double step = config.sweep.has_value() ? config.sweep->step : 5.0;
  return DefaultTrimGrid(SweepBranch(config, ranges), step);
}

json TrimJson(const TrimConfig& t) { return {{"q_s", t.q_s}, {"q_e", t.q_e}}; }

// Trim window for the range attack: the swept one when the config asks for a
// sweep, else the configured one.
absl::StatusOr<TrimConfig> EffectiveTrim(const Run& run) {
  if (!run.config().sweep.has_value()) return run.config().trim;
  if (!fs::exists(run.Out(kSweep))) {
    return absl::FailedPreconditionError(
        "the config enables the trim sweep: run `sweep` first");
  }
  ASSIGN_OR_RETURN(json j, ReadJsonFile(run.Out(kSweep)));
  if (!j.contains("best") || !j["best"].is_object()) {
    return absl::InvalidArgumentError("sweep.json has no \"best\" entry");
  }
  TrimConfig t;
  t.q_s = j["best"].value("q_s", 0.0);
  t.q_e = j["best"].value("q_e", 100.0);
  RETURN_IF_ERROR(ValidateTrim(t));
  return t;
}

absl::StatusOr<PayloadSchema> SchemaOf(const Run& run) {
  auto manifest = run.OptionalInput(kManifest, run.config().inputs.manifest);
  if (!manifest.has_value()) return PayloadSchema::kBinary;
  ASSIGN_OR_RETURN(json j, ReadJsonFile(*manifest));
  if (j.value("schema", "binary") == "tokens") return PayloadSchema::kTokens;
  return PayloadSchema::kBinary;
}

absl::StatusOr<std::vector<RangeQuery>> LoadRunRanges(const Run& run) {
  ASSIGN_OR_RETURN(PayloadSchema schema, SchemaOf(run));
  ASSIGN_OR_RETURN(fs::path path,
                   run.Input(kRanges, run.config().inputs.ranges,
                             "run `simulate` or set inputs.ranges"));
  return LoadRanges(path, schema);
}

absl::StatusOr<SignalMatrix> LoadRunSignals(const Run& run) {
  ASSIGN_OR_RETURN(fs::path path,
                   run.Input(kSignals, run.config().inputs.signals,
                             "run `simulate` or set inputs.signals"));
  return LoadSignals(path);
}

absl::StatusOr<std::vector<RecordId>> LoadPopulation(const Run& run) {
  std::optional<Dataset> dataset;
  if (auto manifest = run.OptionalInput(kManifest, run.config().inputs.manifest)) {
    ASSIGN_OR_RETURN(dataset, LoadDatasetManifest(*manifest));
  }
  std::vector<RecordId> population;
  if (auto path = run.OptionalInput(kPopulation, run.config().inputs.population)) {
    ASSIGN_OR_RETURN(population, ReadIdList(*path));
  } else if (dataset.has_value()) {
    for (const DataRecord& r : dataset->records()) {
      if (!dataset->IsMember(r.id)) population.push_back(r.id);
    }
  } else {
    return absl::NotFoundError(
        "RMIA needs a population: set inputs.population or inputs.manifest");
  }
  if (dataset.has_value()) {
    const std::vector<RecordId> members(dataset->member_ids().begin(),
                                        dataset->member_ids().end());
    RETURN_IF_ERROR(CheckPopulationDisjoint(population, members));
  }
  return population;
}

absl::StatusOr<std::unique_ptr<PointScorer>> BuildScorer(
    const Run& run, const SignalMatrix& signals,
    std::span<const RangeQuery> ranges) {
  ScorerSpec spec = MakeScorerSpec(run.config(), ranges);
  if (spec.kind == ScorerKind::kRmia) {
    ASSIGN_OR_RETURN(spec.rmia.population_ids, LoadPopulation(run));
  }
  return MakeScorer(signals, spec);
}

// --- subcommands -----------------------------------------------------------

absl::StatusOr<bool> Simulate(const Run& run) {
  const RunConfig& c = run.config();
  if (!c.simulator.has_value()) {
    return absl::InvalidArgumentError("`simulate` needs a \"simulator\" section");
  }
  const bool calibration = c.simulator->calibration && c.simulator->n_refs >= 2;
  if (run.Done({kManifest, kSignals, kRanges, kAttackSets, kLabels}) &&
      (!calibration || fs::exists(run.Out(kCalibration) / kSignals))) {
    return false;
  }
  ASSIGN_OR_RETURN(Simulation sim, rangemia::Simulate(*c.simulator, c.seed, c.seed));
  const json extra = {{"source", "simulator"},
                      {"game", std::string(GameKindName(c.simulator->game))}};
  RETURN_IF_ERROR(WriteSimulationFiles(run.dir(), sim.world, sim.candidates,
                                       sim.signals, sim.ranges, sim.attack_sets,
                                       extra));
  RETURN_IF_ERROR(WriteFile(run.Out(kLabels), FormatLabels(sim.labels)));
  RETURN_IF_ERROR(WriteFile(run.Out(kPopulation), FormatIdList(sim.population)));
  RETURN_IF_ERROR(
      WriteFile(run.Out(kColumnMeans), FormatColumnMeans(sim.world.column_means)));
  if (sim.calibration.has_value()) {
    const CalibrationWorld& cal = *sim.calibration;
    SimWorld cal_world;
    cal_world.dataset = cal.dataset;
    cal_world.pools = cal.pools;
    const fs::path dir = run.Out(kCalibration);
    RETURN_IF_ERROR(WriteSimulationFiles(dir, cal_world, cal.candidates,
                                         cal.signals, cal.ranges,
                                         cal.attack_sets, extra));
    RETURN_IF_ERROR(
        WriteFile(dir / kMembersByModel, FormatMembersByModel(cal.members_by_model)));
  }
  LOG(INFO) << "simulated " << sim.ranges.size() << " ranges, "
            << sim.candidates.size() << " sampled records";
  return true;
}

absl::StatusOr<bool> Sample(const Run& run) {
  const RunConfig& c = run.config();
  if (run.Done({kAttackSets, kLabels})) return false;
  if (c.simulator.has_value()) {
    return absl::FailedPreconditionError(
        "simulated runs are sampled by `simulate`");
  }
  ASSIGN_OR_RETURN(fs::path manifest_path,
                   run.Input(kManifest, c.inputs.manifest, "set inputs.manifest"));
  ASSIGN_OR_RETURN(Dataset dataset, LoadDatasetManifest(manifest_path));
  ASSIGN_OR_RETURN(fs::path ranges_path,
                   run.Input(kRanges, c.inputs.ranges, "set inputs.ranges"));
  ASSIGN_OR_RETURN(std::vector<RangeQuery> ranges,
                   LoadRanges(ranges_path, dataset.schema()));

  CandidateProvider pools;
  if (HasRangeKind(ranges, RangeFunction::kCandidatePool)) {
    ASSIGN_OR_RETURN(fs::path p, run.Input(kPools, c.inputs.pools, "set inputs.pools"));
    ASSIGN_OR_RETURN(pools, CandidateProvider::Load(p, dataset));
  }
  std::vector<double> means;
  if (HasRangeKind(ranges, RangeFunction::kMaskedColumns)) {
    if (auto p = run.OptionalInput(kColumnMeans, c.inputs.column_means)) {
      ASSIGN_OR_RETURN(std::string text, ReadFile(*p));
      ASSIGN_OR_RETURN(means, ParseColumnMeans(text));
    } else {
      means = ComputeColumnMeans(dataset);
    }
  }
  std::unique_ptr<FillProvider> fill;
  if (HasRangeKind(ranges, RangeFunction::kHamming)) {
    if (c.inputs.fill_lists.has_value()) {
      ASSIGN_OR_RETURN(CandidateListFillProvider p,
                       CandidateListFillProvider::Load(*c.inputs.fill_lists));
      fill = std::make_unique<CandidateListFillProvider>(std::move(p));
    } else if (c.inputs.vocabulary.has_value()) {
      ASSIGN_OR_RETURN(VocabularyFillProvider p,
                       VocabularyFillProvider::Load(*c.inputs.vocabulary));
      fill = std::make_unique<VocabularyFillProvider>(std::move(p));
    } else {
      return absl::InvalidArgumentError(
          "hamming ranges need inputs.vocabulary or inputs.fill_lists");
    }
  }

  const std::vector<DataRecord> members = dataset.Members();
  CandidateRegistry registry(dataset);
  std::vector<AttackSet> sets;
  std::vector<RangeLabel> labels;
  SamplerSpec spec;
  spec.n_samples = c.n_samples;
  spec.include_mode_imputed = c.include_mode_imputed;
  spec.seed = c.seed;
  for (RangeQuery& range : ranges) {
    ASSIGN_OR_RETURN(RangeLabel label, LabelRange(range, members, &pools));
    std::vector<DataRecord> samples;
    switch (range.range_fn) {
      case RangeFunction::kMaskedColumns: {
        spec.kind = SamplerKind::kBernoulliTabular;
        ASSIGN_OR_RETURN(samples, SampleBernoulliTabular(range, means, spec));
        break;
      }
      case RangeFunction::kHamming: {
        spec.kind = SamplerKind::kHammingSubstitution;
        ASSIGN_OR_RETURN(samples, SampleHamming(range, *fill, spec));
        break;
      }
      case RangeFunction::kCandidatePool: {
        spec.kind = SamplerKind::kCandidatePool;
        std::optional<double> density;
        if (label.bit == 1) density = c.member_density;
        ASSIGN_OR_RETURN(samples, SamplePool(range, pools, spec, density));
        break;
      }
    }
    AttackSet set{range.range_id, {}};
    for (const DataRecord& s : samples) set.candidates.push_back(registry.Register(s));
    sets.push_back(std::move(set));
    labels.push_back(std::move(label));
  }
  ASSIGN_OR_RETURN(Dataset candidates, registry.NewRecordsDataset());
  RETURN_IF_ERROR(WriteFile(run.Out(kCandidates), SerializeDatasetManifest(candidates)));
  RETURN_IF_ERROR(WriteFile(run.Out(kLabels), FormatLabels(labels)));
  RETURN_IF_ERROR(WriteFile(run.Out(kAttackSets), FormatAttackSets(sets)));
  LOG(INFO) << "sampled " << sets.size() << " ranges; " << candidates.size()
            << " new records need signals before `ramia`";
  return true;
}

absl::StatusOr<bool> Mia(const Run& run) {
  if (run.Done({kScoresMia})) return false;
  ASSIGN_OR_RETURN(std::vector<RangeQuery> ranges, LoadRunRanges(run));
  ASSIGN_OR_RETURN(SignalMatrix signals, LoadRunSignals(run));
  ASSIGN_OR_RETURN(std::unique_ptr<PointScorer> scorer,
                   BuildScorer(run, signals, ranges));
  ASSIGN_OR_RETURN(std::vector<RangeScore> scores, PointBaselineScores(ranges, *scorer));
  RETURN_IF_ERROR(WriteFile(run.Out(kScoresMia), FormatRangeScores(scores)));
  return true;
}

absl::StatusOr<bool> Ramia(const Run& run) {
  if (run.Done({kScoresRamia})) return false;
  ASSIGN_OR_RETURN(std::vector<RangeQuery> ranges, LoadRunRanges(run));
  ASSIGN_OR_RETURN(SignalMatrix signals, LoadRunSignals(run));
  ASSIGN_OR_RETURN(fs::path sets_path,
                   run.Input(kAttackSets, run.config().inputs.attack_sets,
                             "run `simulate` or `sample` first"));
  ASSIGN_OR_RETURN(std::vector<AttackSet> sets, LoadAttackSets(sets_path));
  ASSIGN_OR_RETURN(sets, AlignAttackSets(ranges, sets));
  std::vector<RecordId> ids;
  for (const AttackSet& s : sets) ids.insert(ids.end(), s.candidates.begin(), s.candidates.end());
  RETURN_IF_ERROR(CheckSignalsCover(signals, ids));
  ASSIGN_OR_RETURN(TrimConfig trim, EffectiveTrim(run));
  ASSIGN_OR_RETURN(std::unique_ptr<PointScorer> scorer,
                   BuildScorer(run, signals, ranges));
  ASSIGN_OR_RETURN(std::vector<RangeScore> scores,
                   RangeAttackScores(ranges, sets, *scorer, trim, run.jobs()));
  RETURN_IF_ERROR(WriteFile(run.Out(kScoresRamia), FormatRangeScores(scores)));
  return true;
}

absl::StatusOr<bool> Sweep(const Run& run) {
  if (run.Done({kSweep})) return false;
  const RunConfig& c = run.config();
  fs::path dir = run.Out(kCalibration);
  if (!fs::exists(dir)) {
    if (!c.inputs.calibration_dir.has_value()) {
      return absl::NotFoundError(
          "missing calibration data: run `simulate` or set inputs.calibration_dir");
    }
    dir = *c.inputs.calibration_dir;
  }
  const std::optional<fs::path> candidates =
      fs::exists(dir / kCandidates) ? std::optional<fs::path>(dir / kCandidates)
                                    : std::nullopt;
  ASSIGN_OR_RETURN(Dataset dataset, LoadDatasetManifest(dir / kManifest));
  ASSIGN_OR_RETURN(Dataset all_records, LoadRecords(dir / kManifest, candidates));
  ASSIGN_OR_RETURN(SignalMatrix signals, LoadSignals(dir / kSignals));
  ASSIGN_OR_RETURN(std::vector<RangeQuery> ranges,
                   LoadRanges(dir / kRanges, dataset.schema()));
  ASSIGN_OR_RETURN(std::vector<AttackSet> sets, LoadAttackSets(dir / kAttackSets));
  ASSIGN_OR_RETURN(auto members_by_model, LoadMembersByModel(dir / kMembersByModel));
  CandidateProvider pools;
  if (fs::exists(dir / kPools)) {
    ASSIGN_OR_RETURN(pools, CandidateProvider::Load(dir / kPools, all_records));
  }

  SweepInput in;
  in.dataset = &dataset;
  in.signals = &signals;
  in.members_by_model = std::move(members_by_model);
  in.ranges = ranges;
  in.attack_sets = std::move(sets);
  in.pools = &pools;
  in.scorer = MakeScorerSpec(c, ranges);
  in.grid = SweepGrid(c, ranges);
  in.seed = c.seed;
  in.jobs = run.jobs();
  ASSIGN_OR_RETURN(SweepResult result, SweepTrim(in));

  json grid = json::array();
  for (size_t g = 0; g < in.grid.size(); ++g) {
    grid.push_back({{"q_s", in.grid[g].q_s},
                    {"q_e", in.grid[g].q_e},
                    {"auc", result.aucs[g]}});
  }
  const json out = {
      {"branch", std::string(SampleOriginName(SweepBranch(c, ranges)))},
      {"best", TrimJson(result.best)},
      {"temporary_target", result.temporary_target},
      {"grid", std::move(grid)}};
  RETURN_IF_ERROR(WriteFile(run.Out(kSweep), out.dump(2) + "\n"));
  LOG(INFO) << "swept " << in.grid.size() << " trim windows; best q_s="
            << result.best.q_s << " q_e=" << result.best.q_e;
  return true;
}

absl::StatusOr<std::optional<std::vector<RangeScore>>> OptionalScores(
    const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return ParseRangeScores(text);
}

// Percentile correlation over in-ranges, measured against out-ranges.
absl::StatusOr<std::optional<double>> RangeCorrelation(
    std::span<const RangeScore> mia, std::span<const RangeScore> ramia,
    std::span<const RangeLabel> labels) {
  std::map<std::string, int> bit;
  for (const RangeLabel& l : labels) bit[l.range_id] = l.bit;
  std::map<std::string, double> ramia_by_id;
  for (const RangeScore& s : ramia) ramia_by_id[s.range_id] = s.score;
  std::vector<double> in_point, in_range, out_point, out_range;
  for (const RangeScore& s : mia) {
    auto b = bit.find(s.range_id);
    auto r = ramia_by_id.find(s.range_id);
    if (b == bit.end() || r == ramia_by_id.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("range ", s.range_id, " lacks a label or a range score"));
    }
    (b->second ? in_point : out_point).push_back(s.score);
    (b->second ? in_range : out_range).push_back(r->second);
  }
  if (in_point.size() < 2 || out_point.empty()) return std::nullopt;
  auto r = PercentileCorrelation(in_point, in_range, out_point, out_range);
  if (!r.ok()) {
    LOG(WARNING) << "percentile correlation undefined: " << r.status().message();
    return std::nullopt;
  }
  return *r;
}

absl::StatusOr<bool> Eval(const Run& run) {
  if (run.Done({kRoc, kSummary})) return false;
  const RunConfig& c = run.config();
  ASSIGN_OR_RETURN(fs::path labels_path,
                   run.Input(kLabels, std::nullopt, "run `simulate` or `sample` first"));
  ASSIGN_OR_RETURN(std::string labels_text, ReadFile(labels_path));
  ASSIGN_OR_RETURN(std::vector<RangeLabel> labels, ParseLabels(labels_text));
  ASSIGN_OR_RETURN(auto mia, OptionalScores(run.Out(kScoresMia)));
  ASSIGN_OR_RETURN(auto ramia, OptionalScores(run.Out(kScoresRamia)));
  if (!mia.has_value() && !ramia.has_value()) {
    return absl::FailedPreconditionError(
        "no scores to evaluate: run `mia` and/or `ramia` first");
  }
  EvalReport report;
  report.seed = c.seed;
  if (mia.has_value()) {
    ASSIGN_OR_RETURN(report.mia, EvaluateAttack("mia", *mia, labels, c.fpr_targets));
  }
  if (ramia.has_value()) {
    ASSIGN_OR_RETURN(report.ramia,
                     EvaluateAttack("ramia", *ramia, labels, c.fpr_targets));
    ASSIGN_OR_RETURN(report.trim, EffectiveTrim(run));
  }
  if (mia.has_value() && ramia.has_value()) {
    ASSIGN_OR_RETURN(report.percentile_correlation,
                     RangeCorrelation(*mia, *ramia, labels));
  }
  RETURN_IF_ERROR(EmitReport(run.dir(), report));
  return true;
}

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleSd(std::span<const double> v) {
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

absl::StatusOr<bool> Repeat(const Run& run) {
  if (run.Done({kRepeat})) return false;
  const RunConfig& c = run.config();
  if (!c.simulator.has_value()) {
    return absl::InvalidArgumentError(
        "`repeat` re-samples a simulated run and needs a \"simulator\" section");
  }
  json runs = json::array();
  std::vector<double> deltas;
  for (int r = 0; r < c.repeat_seeds; ++r) {
    const uint64_t sampling_seed = c.seed + static_cast<uint64_t>(r);
    ASSIGN_OR_RETURN(Simulation sim,
                     rangemia::Simulate(*c.simulator, c.seed, sampling_seed));
    AttackSettings settings;
    settings.scorer = MakeScorerSpec(c, sim.ranges);
    settings.trim = c.trim;
    if (c.sweep.has_value()) settings.sweep_grid = SweepGrid(c, sim.ranges);
    settings.jobs = run.jobs();
    ASSIGN_OR_RETURN(GameResult result, AttackSimulation(sim, settings, sampling_seed));
    const double delta = result.ramia_auc - result.mia_auc;
    deltas.push_back(delta);
    runs.push_back({{"sampling_seed", sampling_seed},
                    {"mia_auc", result.mia_auc},
                    {"ramia_auc", result.ramia_auc},
                    {"delta_auc", delta},
                    {"trim", TrimJson(result.trim)}});
  }
  const json out = {{"seed", c.seed},
                    {"n_seeds", c.repeat_seeds},
                    {"runs", std::move(runs)},
                    {"delta_auc", {{"mean", Mean(deltas)}, {"sd", SampleSd(deltas)}}}};
  RETURN_IF_ERROR(WriteFile(run.Out(kRepeat), out.dump(2) + "\n"));
  return true;
}

absl::StatusOr<bool> All(const Run& run) {
  bool wrote = false;
  if (run.config().simulator.has_value()) {
    ASSIGN_OR_RETURN(bool w, Simulate(run));
    wrote |= w;
  } else {
    ASSIGN_OR_RETURN(bool w, Sample(run));
    wrote |= w;
  }
  if (run.config().sweep.has_value()) {
    ASSIGN_OR_RETURN(bool w, Sweep(run));
    wrote |= w;
  }
  for (auto* step : {&Mia, &Ramia, &Eval}) {
    ASSIGN_OR_RETURN(bool w, step(run));
    wrote |= w;
  }
  return wrote;
}

using Command = absl::StatusOr<bool> (*)(const Run&);

const std::map<std::string, Command>& Commands() {
  static const auto* commands = new std::map<std::string, Command>{
      {"simulate", &Simulate}, {"sample", &Sample}, {"mia", &Mia},
      {"ramia", &Ramia},       {"sweep", &Sweep},   {"eval", &Eval},
      {"repeat", &Repeat},     {"all", &All},
  };
  return *commands;
}

void ReportError(std::ostream& err, std::string_view command,
                 const absl::Status& status) {
  const json j = {{"command", std::string(command)},
                  {"error",
                   {{"code", absl::StatusCodeToString(status.code())},
                    {"message", std::string(status.message())}}}};
  err << j.dump() << "\n";
}

}  // namespace

const std::vector<std::string>& CommandNames() {
  static const auto* names = [] {
    auto* v = new std::vector<std::string>();
    for (const auto& [name, fn] : Commands()) v->push_back(name);
    return v;
  }();
  return *names;
}

int RunCommand(const CommandOptions& options, std::ostream& out,
               std::ostream& err) {
  auto command = Commands().find(options.command);
  if (command == Commands().end()) {
    ReportError(err, options.command,
                absl::InvalidArgumentError(
                    absl::StrCat("unknown subcommand \"", options.command, "\"")));
    return kExitUsage;
  }
  if (options.jobs < 1) {
    ReportError(err, options.command, absl::InvalidArgumentError("--jobs must be >= 1"));
    return kExitUsage;
  }
  absl::StatusOr<RunConfig> config = LoadRunConfig(options.config_path);
  if (!config.ok()) {
    ReportError(err, options.command, config.status());
    return kExitUsage;
  }
  if (options.seed.has_value()) config->seed = *options.seed;

  const std::string hash = ConfigHash(*config);
  const fs::path dir = options.out_dir / absl::StrCat("run-", hash);
  const Run run(*config, dir, options.jobs, options.force);
  absl::Status status =
      WriteFile(run.Out(kConfig), RunConfigToJson(*config).dump(2) + "\n");
  absl::StatusOr<bool> wrote = status.ok() ? command->second(run) : status;
  if (!wrote.ok()) {
    ReportError(err, options.command, wrote.status());
    return kExitPipelineError;
  }
  const json j = {{"command", options.command},
                  {"run_dir", dir.string()},
                  {"config_hash", hash},
                  {"status", *wrote ? "ok" : "skipped"}};
  out << j.dump() << "\n";
  return kExitOk;
}

}  // namespace rangemia::cli
