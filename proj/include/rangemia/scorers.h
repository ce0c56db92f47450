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

#ifndef RANGEMIA_SCORERS_H_
#define RANGEMIA_SCORERS_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "rangemia/record.h"
#include "rangemia/signal_matrix.h"

namespace rangemia {

// LOSS attack: exp(-loss) with loss = -ln(target signal), i.e. the target
// signal itself.
absl::StatusOr<double> LossScore(RecordId id, const SignalMatrix& signals);

// Offline RMIA configuration.
struct RmiaConfig {
  // Interpolation between the mean reference ("out") signal and 1 used to
  // stand in for the missing "in" models: P_in ~= a * P_out + (1 - a).
  double a = 0.5;
  // A record dominates a population point z when its likelihood ratio is at
  // least gamma times z's.
  double gamma = 1.0;
  std::vector<RecordId> population_ids;
};

// Normalising constant P(x) = 0.5 * P_in + 0.5 * P_out from the reference
// models, with P_in approximated from P_out.
absl::StatusOr<double> RmiaMarginal(RecordId id, const SignalMatrix& signals,
                                    const RmiaConfig& config);

// Fraction of population records z with ratio(x) / ratio(z) >= gamma, where
// ratio(u) = P(u | target) / P(u). Always a multiple of 1 / |Z|.
absl::StatusOr<double> RmiaScore(RecordId id, const SignalMatrix& signals,
                                 const RmiaConfig& config);

// Point membership scorer MIA(x). Implementations are immutable and safe to
// call concurrently.
class PointScorer {
 public:
  virtual ~PointScorer() = default;
  virtual absl::StatusOr<double> Score(RecordId id) const = 0;
  virtual std::string name() const = 0;
};

class LossScorer : public PointScorer {
 public:
  explicit LossScorer(const SignalMatrix& signals) : signals_(signals) {}
  absl::StatusOr<double> Score(RecordId id) const override {
    return LossScore(id, signals_);
  }
  std::string name() const override { return "loss"; }

 private:
  const SignalMatrix& signals_;
};

// RMIA with the population ratios precomputed and sorted, so a score is a
// binary search instead of a pass over Z. Produces exactly the counts of
// RmiaScore: x / z is monotone in z for positive doubles, so the dominance
// predicate partitions the sorted ratios.
class RmiaScorer : public PointScorer {
 public:
  static absl::StatusOr<std::unique_ptr<RmiaScorer>> Create(
      const SignalMatrix& signals, RmiaConfig config);

  absl::StatusOr<double> Score(RecordId id) const override;
  std::string name() const override { return "rmia"; }

  absl::StatusOr<double> Ratio(RecordId id) const;

 private:
  RmiaScorer(const SignalMatrix& signals, RmiaConfig config,
             std::vector<double> sorted_ratios)
      : signals_(signals),
        config_(std::move(config)),
        sorted_population_ratios_(std::move(sorted_ratios)) {}

  const SignalMatrix& signals_;
  RmiaConfig config_;
  std::vector<double> sorted_population_ratios_;
};

enum class ScorerKind { kLoss, kRmia };

struct ScorerSpec {
  ScorerKind kind = ScorerKind::kRmia;
  RmiaConfig rmia;
};

absl::StatusOr<std::unique_ptr<PointScorer>> MakeScorer(
    const SignalMatrix& signals, const ScorerSpec& spec);

// Checks a population list against the training set: Z must not contain
// members.
absl::Status CheckPopulationDisjoint(std::span<const RecordId> population,
                                     std::span<const RecordId> member_ids);

}  // namespace rangemia

#endif  // RANGEMIA_SCORERS_H_
