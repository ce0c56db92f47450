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

#ifndef RANGEMIA_IO_H_
#define RANGEMIA_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "rangemia/record.h"

namespace rangemia {

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);

// Writes `contents` to `path`, creating parent directories. The file is
// written to a sibling temporary and renamed into place.
absl::Status WriteFile(const std::filesystem::path& path,
                       std::string_view contents);

// Shortest decimal representation that round-trips to the same double.
std::string FormatDouble(double value);

absl::StatusOr<double> ParseDouble(std::string_view text);
absl::StatusOr<int64_t> ParseInt(std::string_view text);

// Parses JSON text; errors carry the 1-based line and column of the failure.
absl::StatusOr<nlohmann::json> ParseJson(std::string_view text,
                                         std::string_view source_name);
absl::StatusOr<nlohmann::json> ReadJsonFile(const std::filesystem::path& path);

// Splits CSV text into rows of trimmed fields. Blank lines are skipped.
// Quoting is not supported; none of the formats here need it.
std::vector<std::vector<std::string>> SplitCsv(std::string_view text);

// One id per line; blank lines and lines starting with '#' are ignored.
absl::StatusOr<std::vector<RecordId>> ReadIdList(
    const std::filesystem::path& path);
std::string FormatIdList(const std::vector<RecordId>& ids);

}  // namespace rangemia

#endif  // RANGEMIA_IO_H_
