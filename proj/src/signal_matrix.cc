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

#include "rangemia/signal_matrix.h"

#include <cmath>
#include <utility>

#include <glog/logging.h>

#include "absl/strings/str_cat.h"
#include "rangemia/io.h"
#include "rangemia/status_macros.h"
#include "rangemia/strings.h"

namespace rangemia {

using nlohmann::json;

namespace {

// Returns the ingested value or an error for out-of-domain signals.
absl::StatusOr<double> IngestSignal(double v, RecordId id, std::string_view col,
                                    size_t* clamped) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "record ", id, ": signal ", AbslView(col), "=", v, " is outside [0, 1]"));
  }
  if (v < kSignalFloor) {
    ++*clamped;
    return kSignalFloor;
  }
  return v;
}

}  // namespace

absl::StatusOr<SignalMatrix> SignalMatrix::Create(
    std::vector<RecordId> record_ids, std::vector<double> target,
    std::vector<double> reference, int n_refs) {
  if (n_refs < 0) return absl::InvalidArgumentError("n_refs must be >= 0");
  if (target.size() != record_ids.size() ||
      reference.size() != record_ids.size() * static_cast<size_t>(n_refs)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "signal matrix shape mismatch: ", record_ids.size(), " ids, ",
        target.size(), " target values, ", reference.size(),
        " reference values for n_refs=", n_refs));
  }
  SignalMatrix m;
  m.n_refs_ = n_refs;
  for (size_t i = 0; i < record_ids.size(); ++i) {
    const RecordId id = record_ids[i];
    if (!m.index_.emplace(id, i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate signal row for record ", id));
    }
    ASSIGN_OR_RETURN(target[i], IngestSignal(target[i], id, "target", &m.clamped_));
    for (int k = 0; k < n_refs; ++k) {
      double& v = reference[i * n_refs + k];
      ASSIGN_OR_RETURN(v, IngestSignal(v, id, absl::StrCat("ref_", k), &m.clamped_));
    }
  }
  if (m.clamped_ > 0) {
    LOG(WARNING) << "clamped " << m.clamped_ << " signal value(s) up to "
                 << kSignalFloor;
  }
  m.record_ids_ = std::move(record_ids);
  m.target_ = std::move(target);
  m.reference_ = std::move(reference);
  return m;
}

absl::StatusOr<size_t> SignalMatrix::Row(RecordId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    return absl::NotFoundError(absl::StrCat("no signal row for record ", id));
  }
  return it->second;
}

absl::StatusOr<double> SignalMatrix::Target(RecordId id) const {
  ASSIGN_OR_RETURN(size_t row, Row(id));
  return target_[row];
}

absl::StatusOr<std::span<const double>> SignalMatrix::References(
    RecordId id) const {
  ASSIGN_OR_RETURN(size_t row, Row(id));
  return references(row);
}

absl::StatusOr<SignalMatrix> SignalMatrix::WithReferenceAsTarget(int k) const {
  if (k < 0 || k >= n_refs_) {
    return absl::InvalidArgumentError(
        absl::StrCat("reference model ", k, " out of range [0, ", n_refs_, ")"));
  }
  std::vector<double> target(size());
  std::vector<double> reference;
  reference.reserve(size() * (n_refs_ - 1));
  for (size_t row = 0; row < size(); ++row) {
    target[row] = reference_[row * n_refs_ + k];
    for (int j = 0; j < n_refs_; ++j) {
      if (j != k) reference.push_back(reference_[row * n_refs_ + j]);
    }
  }
  return Create(record_ids_, std::move(target), std::move(reference),
                n_refs_ - 1);
}

absl::StatusOr<SignalSidecar> ParseSignalSidecar(const json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("signal sidecar must be a JSON object");
  }
  SignalSidecar sidecar;
  auto n_it = j.find("n_refs");
  if (n_it == j.end() || !n_it->is_number_integer() || n_it->get<int>() < 0) {
    return absl::InvalidArgumentError(
        "signal sidecar needs a non-negative integer \"n_refs\"");
  }
  sidecar.n_refs = n_it->get<int>();
  auto kind_it = j.find("signal_kind");
  if (kind_it == j.end() || !kind_it->is_string()) {
    return absl::InvalidArgumentError("signal sidecar needs \"signal_kind\"");
  }
  sidecar.signal_kind = kind_it->get<std::string>();
  if (sidecar.signal_kind != "prob") {
    return absl::InvalidArgumentError(absl::StrCat(
        "unsupported signal_kind \"", sidecar.signal_kind,
        "\"; only correct-label probabilities (\"prob\") are supported"));
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "n_refs" && it.key() != "signal_kind") {
      sidecar.extra[it.key()] = it.value();
    }
  }
  return sidecar;
}

json SignalSidecarToJson(const SignalSidecar& sidecar) {
  json j = sidecar.extra;
  j["n_refs"] = sidecar.n_refs;
  j["signal_kind"] = sidecar.signal_kind;
  return j;
}

absl::StatusOr<SignalMatrix> ParseSignalCsv(std::string_view csv,
                                            const SignalSidecar& sidecar) {
  auto rows = SplitCsv(csv);
  if (rows.empty()) return absl::InvalidArgumentError("signal CSV is empty");
  const int n_refs = sidecar.n_refs;
  std::vector<std::string> expected = {"id", "target"};
  for (int k = 0; k < n_refs; ++k) expected.push_back(absl::StrCat("ref_", k));
  if (rows.front() != expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        "signal CSV header does not match n_refs=", n_refs,
        " (expected id,target,ref_0..ref_", n_refs - 1, ")"));
  }
  std::vector<RecordId> ids;
  std::vector<double> target;
  std::vector<double> reference;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != expected.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "signal CSV line ", r + 1, ": expected ", expected.size(),
          " fields, got ", row.size()));
    }
    auto id = ParseInt(row[0]);
    if (!id.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("signal CSV line ", r + 1, ": ", id.status().message()));
    }
    ids.push_back(*id);
    for (size_t c = 1; c < row.size(); ++c) {
      auto v = ParseDouble(row[c]);
      if (!v.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("signal CSV line ", r + 1, ": ", v.status().message()));
      }
      (c == 1 ? target : reference).push_back(*v);
    }
  }
  return SignalMatrix::Create(std::move(ids), std::move(target),
                              std::move(reference), n_refs);
}

std::string FormatSignalCsv(const SignalMatrix& signals) {
  std::string out = "id,target";
  for (int k = 0; k < signals.n_refs(); ++k) absl::StrAppend(&out, ",ref_", k);
  out += "\n";
  for (size_t row = 0; row < signals.size(); ++row) {
    absl::StrAppend(&out, signals.record_ids()[row], ",",
                    FormatDouble(signals.target(row)));
    for (double v : signals.references(row)) {
      absl::StrAppend(&out, ",", FormatDouble(v));
    }
    out += "\n";
  }
  return out;
}

std::filesystem::path SidecarPath(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

absl::StatusOr<SignalMatrix> LoadSignals(const std::filesystem::path& csv_path) {
  ASSIGN_OR_RETURN(json sidecar_json, ReadJsonFile(SidecarPath(csv_path)));
  ASSIGN_OR_RETURN(SignalSidecar sidecar, ParseSignalSidecar(sidecar_json));
  ASSIGN_OR_RETURN(std::string csv, ReadFile(csv_path));
  auto signals = ParseSignalCsv(csv, sidecar);
  if (!signals.ok()) {
    return absl::Status(signals.status().code(),
                        absl::StrCat(csv_path.string(), ": ",
                                     signals.status().message()));
  }
  return signals;
}

absl::Status WriteSignals(const std::filesystem::path& csv_path,
                          const SignalMatrix& signals, const json& extra) {
  SignalSidecar sidecar;
  sidecar.n_refs = signals.n_refs();
  sidecar.extra = extra;
  RETURN_IF_ERROR(WriteFile(csv_path, FormatSignalCsv(signals)));
  return WriteFile(SidecarPath(csv_path),
                   SignalSidecarToJson(sidecar).dump(2) + "\n");
}

absl::Status CheckSignalsCover(const SignalMatrix& signals,
                               std::span<const RecordId> ids) {
  for (RecordId id : ids) {
    if (!signals.Contains(id)) {
      return absl::FailedPreconditionError(
          absl::StrCat("record ", id, " is referenced but has no signal row"));
    }
  }
  return absl::OkStatus();
}

}  // namespace rangemia
