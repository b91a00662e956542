//
// Copyright 2026 The evdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "evdp/monitor.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "status_testing.h"

namespace evdp {
namespace {

using ::evdp::testing::StatusIs;

MonitorConfig Config(MechanismKind kind, double eps = 0.05) {
  MonitorConfig config{0.5, 0.05, 128, 0.2, 101,
                       RenyiBudget::Create(2, eps).value(), kind};
  return config;
}

std::vector<double> Losses(int n, double p, RandomStream& rng) {
  std::vector<double> out(n);
  for (double& y : out) y = rng.Bernoulli(p) ? 1.0 : 0.0;
  return out;
}

TEST(AlarmThresholdTest, Examples) {
  EXPECT_DOUBLE_EQ(AlarmThreshold(0.05).value(), 20.0);
  EXPECT_DOUBLE_EQ(AlarmThreshold(0.5).value(), 2.0);
  EXPECT_DOUBLE_EQ(AlarmThreshold(0.01).value(), 100.0);
  EXPECT_THAT(AlarmThreshold(0.0), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(AlarmThreshold(1.0), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(MonitorTest, CalibratesOneSidedSensitivity) {
  ASSERT_OK_AND_ASSIGN(MonitorState s,
                       MonitorState::Create(Config(MechanismKind::kGaussian)));
  EXPECT_NEAR(s.sensitivity().value(), -std::log(0.8), 1e-15);
  ASSERT_NE(s.noise().gaussian(), nullptr);
}

TEST(MonitorTest, ShortInputOnlyBuffers) {
  const MonitorConfig config = Config(MechanismKind::kGaussian);
  ASSERT_OK_AND_ASSIGN(MonitorState s, MonitorState::Create(config));
  RandomStream rng(1);
  std::vector<double> losses = Losses(100, 0.5, rng);
  ASSERT_OK_AND_ASSIGN(MonitorState next, Ingest(s, losses, config, rng));
  EXPECT_EQ(next.batches_seen(), 0);
  EXPECT_EQ(next.cumulative_log_e(), 0.0);
  EXPECT_EQ(next.pending().size(), 100u);
  EXPECT_TRUE(next.ledger().entries().empty());
}

TEST(MonitorTest, InjectedBatchesAlarmOnThird) {
  const MonitorConfig config = Config(MechanismKind::kGaussian);
  ASSERT_OK_AND_ASSIGN(MonitorState s, MonitorState::Create(config));
  const NoiseSpec identity =
      CalibrateGaussianRdp(LogSensitivity::Zero(), config.batch_budget).value();
  for (double v : {1.5, 2.0, 8.0}) {
    ASSERT_OK_AND_ASSIGN(
        PrivateEValue e,
        PrivatizeWithNoise(EValue::Create(v).value(), identity, 0.0));
    ASSERT_OK_AND_ASSIGN(s, RecordBatch(s, e, std::log(v), config));
    if (s.batches_seen() < 3) EXPECT_FALSE(s.alarmed());
  }
  EXPECT_TRUE(s.alarmed());
  EXPECT_EQ(s.alarm_batch(), 2);
  EXPECT_NEAR(std::exp(s.cumulative_log_e()), 24.0, 1e-12);
  EXPECT_EQ(s.ledger().entries().size(), 3u);
}

TEST(MonitorTest, RejectsForeignBudget) {
  const MonitorConfig config = Config(MechanismKind::kGaussian);
  ASSERT_OK_AND_ASSIGN(MonitorState s, MonitorState::Create(config));
  const NoiseSpec other = CalibrateGaussianRdp(
      LogSensitivity::Zero(), RenyiBudget::Create(2, 1).value()).value();
  ASSERT_OK_AND_ASSIGN(PrivateEValue e,
                       PrivatizeWithNoise(EValue::One(), other, 0.0));
  EXPECT_THAT(RecordBatch(s, e, 0.0, config),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(MonitorTest, RejectsBadLossWithIndex) {
  const MonitorConfig config = Config(MechanismKind::kGaussian);
  ASSERT_OK_AND_ASSIGN(MonitorState s, MonitorState::Create(config));
  RandomStream rng(1);
  std::vector<double> losses = {0.1, 0.2, 1.5, 0.3};
  auto out = Ingest(s, losses, config, rng);
  EXPECT_THAT(out, StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(std::string(out.status().message()),
              ::testing::HasSubstr("index 2"));
}

TEST(MonitorTest, IdentityEqualsNonPrivateProduct) {
  const MonitorConfig config = Config(MechanismKind::kIdentity);
  ASSERT_OK_AND_ASSIGN(MonitorState s, MonitorState::Create(config));
  RandomStream rng(5);
  std::vector<double> losses = Losses(128 * 10 + 7, 0.6, rng);
  ASSERT_OK_AND_ASSIGN(s, Ingest(s, losses, config, rng));
  EXPECT_EQ(s.batches_seen(), 10);
  EXPECT_EQ(s.pending().size(), 7u);
  EXPECT_EQ(s.cumulative_log_e(), s.non_private_cumulative_log_e());
}

TEST(MonitorTest, ChunkingDoesNotMatter) {
  const MonitorConfig config = Config(MechanismKind::kGaussian, 0.5);
  RandomStream data_rng(8);
  std::vector<double> losses = Losses(128 * 6, 0.55, data_rng);
  ASSERT_OK_AND_ASSIGN(MonitorState whole, MonitorState::Create(config));
  RandomStream rng_a(9);
  ASSERT_OK_AND_ASSIGN(whole, Ingest(whole, losses, config, rng_a));

  ASSERT_OK_AND_ASSIGN(MonitorState pieces, MonitorState::Create(config));
  RandomStream rng_b(9);
  absl::Span<const double> rest(losses);
  for (size_t chunk : {1u, 200u, 55u, 300u}) {
    ASSERT_OK_AND_ASSIGN(pieces,
                         Ingest(pieces, rest.subspan(0, chunk), config, rng_b));
    rest.remove_prefix(chunk);
  }
  ASSERT_OK_AND_ASSIGN(pieces, Ingest(pieces, rest, config, rng_b));
  EXPECT_EQ(whole.cumulative_log_e(), pieces.cumulative_log_e());
  EXPECT_EQ(whole.batches_seen(), pieces.batches_seen());
}

TEST(MonitorTest, AlarmStaysLatched) {
  const MonitorConfig config = Config(MechanismKind::kIdentity);
  ASSERT_OK_AND_ASSIGN(MonitorState s, MonitorState::Create(config));
  RandomStream rng(2);
  ASSERT_OK_AND_ASSIGN(s, Ingest(s, Losses(128 * 10, 0.9, rng), config, rng));
  ASSERT_TRUE(s.alarmed());
  const auto first = s.alarm_batch();
  ASSERT_OK_AND_ASSIGN(s, Ingest(s, Losses(128 * 150, 0.0, rng), config, rng));
  EXPECT_TRUE(s.alarmed());
  EXPECT_EQ(s.alarm_batch(), first);
  EXPECT_LT(s.cumulative_log_e(), -std::log(0.05));
  for (size_t i = *first; i < s.history().size(); ++i) {
    EXPECT_TRUE(s.history()[i].alarmed);
  }
}

TEST(MonitorTest, NullFalseAlarmRate) {
  const MonitorConfig config = Config(MechanismKind::kGaussian);
  int alarms = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    RandomStream rng(DeriveSeed(3, {static_cast<uint64_t>(r)}));
    ASSERT_OK_AND_ASSIGN(MonitorState s, MonitorState::Create(config));
    ASSERT_OK_AND_ASSIGN(s, Ingest(s, Losses(128 * 50, 0.5, rng), config, rng));
    alarms += s.alarmed();
  }
  const double rate = static_cast<double>(alarms) / runs;
  EXPECT_LE(rate, 0.05 + 3 * std::sqrt(0.05 * 0.95 / runs));
}

TEST(MonitorTest, UndefinedLaplaceIsReported) {
  MonitorConfig config = Config(MechanismKind::kLaplace, 0.01);
  EXPECT_THAT(MonitorState::Create(config),
              StatusIs(absl::StatusCode::kFailedPrecondition));
}

}  // namespace
}  // namespace evdp
