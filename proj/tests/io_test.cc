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

#include "rangemia/io.h"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gtest/gtest.h"
#include "test_util.h"

namespace rangemia {
namespace {

TEST(FormatDoubleTest, RoundTripsExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    ASSERT_OK_AND_ASSIGN(double back, ParseDouble(FormatDouble(v)));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(1.0), "1");
}

TEST(ParseNumberTest, RejectsGarbage) {
  EXPECT_FALSE(ParseDouble("").ok());
  EXPECT_FALSE(ParseDouble("0.5x").ok());
  EXPECT_FALSE(ParseInt("7.5").ok());
  ASSERT_OK_AND_ASSIGN(int64_t v, ParseInt(" 42 "));
  EXPECT_EQ(v, 42);
}

TEST(ParseJsonTest, ErrorCarriesLineAndColumn) {
  auto parsed = ParseJson("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json");
  ASSERT_FALSE(parsed.ok());
  EXPECT_NE(parsed.status().message().find("cfg.json:3:"), std::string::npos)
      << parsed.status();
}

TEST(FileTest, WriteCreatesDirectoriesAndReadsBack) {
  const auto dir = testing::TempDir("io");
  const auto path = dir / "a" / "b" / "file.txt";
  ASSERT_OK(WriteFile(path, "hello\n"));
  ASSERT_OK_AND_ASSIGN(std::string text, ReadFile(path));
  EXPECT_EQ(text, "hello\n");
  EXPECT_EQ(ReadFile(dir / "missing").status().code(), absl::StatusCode::kNotFound);
}

TEST(IdListTest, SkipsCommentsAndBlankLines) {
  const auto dir = testing::TempDir("idlist");
  ASSERT_OK(WriteFile(dir / "ids.txt", "# population\n3\n\n1\n 2 \n"));
  ASSERT_OK_AND_ASSIGN(auto ids, ReadIdList(dir / "ids.txt"));
  EXPECT_EQ(ids, (std::vector<RecordId>{3, 1, 2}));
  EXPECT_EQ(FormatIdList(ids), "3\n1\n2\n");
  ASSERT_OK(WriteFile(dir / "bad.txt", "1\nx\n"));
  auto bad = ReadIdList(dir / "bad.txt");
  ASSERT_FALSE(bad.ok());
  EXPECT_NE(bad.status().message().find(":2:"), std::string::npos);
}

TEST(SplitCsvTest, TrimsFieldsAndSkipsEmptyLines) {
  auto rows = SplitCsv("a, b\r\n\n1,2\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "2"}));
}

}  // namespace
}  // namespace rangemia
