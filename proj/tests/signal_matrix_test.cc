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

#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "rangemia/io.h"
#include "test_util.h"

namespace rangemia {
namespace {

TEST(SignalMatrixTest, ClampsTinySignalsToFloor) {
  ASSERT_OK_AND_ASSIGN(SignalMatrix m,
                       SignalMatrix::Create({5, 6}, {1e-15, 0.5}, {0.0, 0.2}, 1));
  EXPECT_EQ(m.clamped_count(), 2u);
  EXPECT_EQ(*m.Target(5), kSignalFloor);
  EXPECT_EQ((*m.References(5))[0], kSignalFloor);
  EXPECT_EQ(*m.Target(6), 0.5);
}

TEST(SignalMatrixTest, RejectsOutOfDomainAndBadShape) {
  EXPECT_FALSE(SignalMatrix::Create({1}, {1.5}, {}, 0).ok());
  EXPECT_FALSE(SignalMatrix::Create({1}, {-0.1}, {}, 0).ok());
  EXPECT_FALSE(SignalMatrix::Create({1}, {0.5}, {0.1}, 2).ok());
  EXPECT_FALSE(SignalMatrix::Create({1, 1}, {0.5, 0.5}, {}, 0).ok());
}

TEST(SignalMatrixTest, LookupErrorsForMissingRecord) {
  ASSERT_OK_AND_ASSIGN(SignalMatrix m, SignalMatrix::Create({1}, {0.5}, {}, 0));
  EXPECT_EQ(m.Target(2).status().code(), absl::StatusCode::kNotFound);
}

TEST(SignalMatrixTest, ReferenceAsTargetDropsThatColumn) {
  ASSERT_OK_AND_ASSIGN(SignalMatrix m, SignalMatrix::Create(
                                           {1, 2}, {0.9, 0.8},
                                           {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 3));
  ASSERT_OK_AND_ASSIGN(SignalMatrix v, m.WithReferenceAsTarget(1));
  EXPECT_EQ(v.n_refs(), 2);
  EXPECT_EQ(*v.Target(1), 0.2);
  EXPECT_EQ(*v.Target(2), 0.5);
  ASSERT_OK_AND_ASSIGN(auto refs, v.References(2));
  EXPECT_EQ(std::vector<double>(refs.begin(), refs.end()),
            (std::vector<double>{0.4, 0.6}));
  EXPECT_FALSE(m.WithReferenceAsTarget(3).ok());
}

TEST(SignalCsvTest, HeaderMustMatchSidecar) {
  SignalSidecar sidecar;
  sidecar.n_refs = 2;
  EXPECT_FALSE(ParseSignalCsv("id,target,ref_0\n1,0.5,0.5\n", sidecar).ok());
  EXPECT_FALSE(ParseSignalCsv("id,target,ref_0,ref_1\n1,0.5,0.5\n", sidecar).ok());
  ASSERT_OK_AND_ASSIGN(SignalMatrix m,
                       ParseSignalCsv("id,target,ref_0,ref_1\n1,0.5,0.25,1\n", sidecar));
  EXPECT_EQ(*m.Target(1), 0.5);
}

TEST(SignalCsvTest, SidecarOnlyAcceptsProbabilities) {
  EXPECT_FALSE(ParseSignalSidecar({{"n_refs", 1}, {"signal_kind", "logit"}}).ok());
  EXPECT_FALSE(ParseSignalSidecar({{"signal_kind", "prob"}}).ok());
  ASSERT_OK_AND_ASSIGN(SignalSidecar s,
                       ParseSignalSidecar({{"n_refs", 1},
                                           {"signal_kind", "prob"},
                                           {"lm_loss", "mean_token_nll"}}));
  EXPECT_EQ(s.extra["lm_loss"], "mean_token_nll");
  EXPECT_EQ(SignalSidecarToJson(s)["lm_loss"], "mean_token_nll");
}

TEST(SignalCsvTest, WriteThenLoadIsBitExact) {
  const auto dir = testing::TempDir("signals");
  ASSERT_OK_AND_ASSIGN(SignalMatrix m,
                       SignalMatrix::Create({3, 1, 2}, {0.1, 1.0 / 3.0, 2e-12},
                                            {0.7, 0.123456789012345, 1e-5}, 1));
  ASSERT_OK(WriteSignals(dir / "s.csv", m, {{"source", "test"}}));
  EXPECT_TRUE(std::filesystem::exists(dir / "s.json"));
  ASSERT_OK_AND_ASSIGN(SignalMatrix back, LoadSignals(dir / "s.csv"));
  EXPECT_EQ(back.record_ids(), m.record_ids());
  for (RecordId id : m.record_ids()) {
    EXPECT_EQ(*back.Target(id), *m.Target(id));
    EXPECT_EQ((*back.References(id))[0], (*m.References(id))[0]);
  }
  EXPECT_EQ(FormatSignalCsv(back), FormatSignalCsv(m));
}

TEST(SignalCsvTest, SidecarPathSwapsExtension) {
  EXPECT_EQ(SidecarPath("run/signals.csv"), std::filesystem::path("run/signals.json"));
}

TEST(SignalCoverageTest, ListsMissingIds) {
  ASSERT_OK_AND_ASSIGN(SignalMatrix m, SignalMatrix::Create({1, 2}, {0.5, 0.5}, {}, 0));
  EXPECT_OK(CheckSignalsCover(m, std::vector<RecordId>{1, 2, 2}));
  absl::Status s = CheckSignalsCover(m, std::vector<RecordId>{1, 9});
  EXPECT_EQ(s.code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_NE(s.message().find("9"), std::string::npos);
}

}  // namespace
}  // namespace rangemia
