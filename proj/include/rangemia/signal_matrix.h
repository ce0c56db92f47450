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

#ifndef RANGEMIA_SIGNAL_MATRIX_H_
#define RANGEMIA_SIGNAL_MATRIX_H_

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/record.h"

namespace rangemia {

// Signals below this floor are raised to it at ingestion; every scorer
// divides by a signal somewhere.
inline constexpr double kSignalFloor = 1e-12;

// Per-record model signals P(x | model): one column for the audited model and
// one per reference model. Immutable once created.
class SignalMatrix {
 public:
  SignalMatrix() = default;

  // `reference` is row-major: reference[row * n_refs + k]. Values in
  // [0, kSignalFloor) are clamped up to the floor; anything outside [0, 1]
  // or non-finite is rejected.
  static absl::StatusOr<SignalMatrix> Create(std::vector<RecordId> record_ids,
                                             std::vector<double> target,
                                             std::vector<double> reference,
                                             int n_refs);

  size_t size() const { return record_ids_.size(); }
  int n_refs() const { return n_refs_; }
  const std::vector<RecordId>& record_ids() const { return record_ids_; }
  size_t clamped_count() const { return clamped_; }

  bool Contains(RecordId id) const { return index_.contains(id); }
  absl::StatusOr<size_t> Row(RecordId id) const;

  double target(size_t row) const { return target_[row]; }
  std::span<const double> references(size_t row) const {
    return {reference_.data() + row * n_refs_, static_cast<size_t>(n_refs_)};
  }

  absl::StatusOr<double> Target(RecordId id) const;
  absl::StatusOr<std::span<const double>> References(RecordId id) const;

  // Returns the matrix in which reference model `k` plays the audited model
  // and the remaining reference models stay references.
  absl::StatusOr<SignalMatrix> WithReferenceAsTarget(int k) const;

 private:
  std::vector<RecordId> record_ids_;
  std::vector<double> target_;
  std::vector<double> reference_;
  int n_refs_ = 0;
  size_t clamped_ = 0;
  std::unordered_map<RecordId, size_t> index_;
};

// Sidecar metadata that travels with signals.csv.
struct SignalSidecar {
  int n_refs = 0;
  std::string signal_kind = "prob";
  // Free-form extras (e.g. the loss convention of the extractor) are kept
  // verbatim so they survive a rewrite.
  nlohmann::json extra = nlohmann::json::object();
};

absl::StatusOr<SignalSidecar> ParseSignalSidecar(const nlohmann::json& json);
nlohmann::json SignalSidecarToJson(const SignalSidecar& sidecar);

// Parses `id,target,ref_0,...,ref_{n-1}` CSV text against a sidecar.
absl::StatusOr<SignalMatrix> ParseSignalCsv(std::string_view csv,
                                            const SignalSidecar& sidecar);
std::string FormatSignalCsv(const SignalMatrix& signals);

// Sidecar path convention: signals.csv <-> signals.json.
std::filesystem::path SidecarPath(const std::filesystem::path& csv_path);

absl::StatusOr<SignalMatrix> LoadSignals(const std::filesystem::path& csv_path);
absl::Status WriteSignals(const std::filesystem::path& csv_path,
                          const SignalMatrix& signals,
                          const nlohmann::json& extra = nlohmann::json::object());

// Referential integrity: every id must have a signal row.
absl::Status CheckSignalsCover(const SignalMatrix& signals,
                               std::span<const RecordId> ids);

}  // namespace rangemia

#endif  // RANGEMIA_SIGNAL_MATRIX_H_
