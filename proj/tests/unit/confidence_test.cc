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

#include "evdp/confidence.h"

#include <cmath>
#include <memory>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "status_testing.h"

namespace evdp {
namespace {

using ::evdp::testing::StatusIs;
using ::testing::ElementsAre;

EValue E(double v) { return EValue::Create(v).value(); }

CellEValue Cell(int index, double deflated) {
  return CellEValue{index, E(deflated), E(deflated), 0.0};
}

std::vector<double> BernoulliData(int n, double p, uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> data(n);
  for (double& y : data) y = rng.Bernoulli(p) ? 1.0 : 0.0;
  return data;
}

TEST(PartitionTest, CreateAndUniform) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Create({0.0, 0.5, 1.0}));
  EXPECT_EQ(p.cells(), 2);
  EXPECT_EQ(p.midpoint(1), 0.75);
  EXPECT_THAT(Partition::Create({0.0, 0.5, 0.5}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(Partition::Create({0.0}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  ASSERT_OK_AND_ASSIGN(Partition u, Partition::Uniform(50));
  EXPECT_EQ(u.cells(), 50);
  EXPECT_EQ(u.lower(0), 1e-3);
  EXPECT_EQ(u.upper(49), 1 - 1e-3);
}

TEST(DeflateTest, Examples) {
  ASSERT_OK_AND_ASSIGN(EValue same, Deflate(E(10), 0.0, 0.1));
  EXPECT_DOUBLE_EQ(same.value(), 10.0);
  ASSERT_OK_AND_ASSIGN(EValue d, Deflate(E(10), 0.625, 0.02));
  EXPECT_NEAR(d.value(), 10 * std::exp(-0.0125), 1e-12);
  EXPECT_NEAR(d.value(), 9.87578, 1e-5);
  EXPECT_THAT(Deflate(E(10), -1.0, 0.1),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(Deflate(E(10), 1.0, 0.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(DeflateTest, NeverIncreases) {
  for (double l : {0.0, 0.1, 3.0, 1000.0}) {
    for (double w : {1e-6, 0.02, 0.5}) {
      ASSERT_OK_AND_ASSIGN(EValue d, Deflate(E(3.7), l, w));
      EXPECT_LE(d.log_value(), std::log(3.7));
      EXPECT_GE(d.value(), 0.0);
    }
  }
}

TEST(BuildCiTest, Examples) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Create({0.0, 0.5, 1.0}));
  std::vector<CellEValue> cells = {Cell(0, 30), Cell(1, 10)};
  ASSERT_OK_AND_ASSIGN(ConfidenceSet set, BuildCi(p, cells, 0.05));
  EXPECT_THAT(set.cells, ElementsAre(1));
  ASSERT_EQ(set.intervals.size(), 1u);
  EXPECT_EQ(set.intervals[0].lo, 0.5);
  EXPECT_EQ(set.intervals[0].hi, 1.0);

  std::vector<CellEValue> low = {Cell(1, 0.5), Cell(0, 0.5)};
  ASSERT_OK_AND_ASSIGN(ConfidenceSet full, BuildCi(p, low, 0.05));
  EXPECT_THAT(full.cells, ElementsAre(0, 1));
  ASSERT_EQ(full.intervals.size(), 1u);
  EXPECT_EQ(full.width, 1.0);

  std::vector<CellEValue> high = {Cell(0, 1e6), Cell(1, 1e6)};
  ASSERT_OK_AND_ASSIGN(ConfidenceSet none, BuildCi(p, high, 0.05));
  EXPECT_TRUE(none.empty);
  EXPECT_TRUE(none.intervals.empty());
}

TEST(BuildCiTest, RejectsBadCellLists) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Create({0.0, 0.5, 1.0}));
  std::vector<CellEValue> dup = {Cell(0, 1), Cell(0, 1)};
  EXPECT_THAT(BuildCi(p, dup, 0.05),
              StatusIs(absl::StatusCode::kInvalidArgument));
  std::vector<CellEValue> missing = {Cell(0, 1)};
  EXPECT_THAT(BuildCi(p, missing, 0.05),
              StatusIs(absl::StatusCode::kInvalidArgument));
  std::vector<CellEValue> both = {Cell(0, 1), Cell(1, 1)};
  EXPECT_THAT(BuildCi(p, both, 1.5),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(BuildCiTest, SplitsIntoIntervals) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Create({0, 1, 2, 3, 4, 5}));
  std::vector<double> logs = {0, 10, 0, 0, 10};
  ASSERT_OK_AND_ASSIGN(ConfidenceSet set, BuildCiFromLogValues(p, logs, 0.05));
  ASSERT_EQ(set.intervals.size(), 2u);
  EXPECT_EQ(set.intervals[0].hi, 1);
  EXPECT_EQ(set.intervals[1].lo, 2);
  EXPECT_EQ(set.intervals[1].hi, 4);
  EXPECT_TRUE(set.Contains(3.5));
  EXPECT_FALSE(set.Contains(1.5));
}

TEST(BuildCiTest, Nesting) {
  RandomStream rng(12);
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(40));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> logs(40);
    for (double& v : logs) v = 8 * rng.Uniform() - 2;
    ASSERT_OK_AND_ASSIGN(ConfidenceSet narrow, BuildCiFromLogValues(p, logs, 0.1));
    ASSERT_OK_AND_ASSIGN(ConfidenceSet wide, BuildCiFromLogValues(p, logs, 0.01));
    for (int c : narrow.cells) {
      EXPECT_TRUE(std::find(wide.cells.begin(), wide.cells.end(), c) !=
                  wide.cells.end());
    }
  }
}

TEST(PrivateCiTest, LedgerTotalsEpsilon) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(50));
  RandomStream rng(1);
  PrivateCiOptions options{CiPriorConfig{}, RenyiBudget::Create(2, 1).value(),
                           MechanismKind::kGaussian, 0.05};
  ASSERT_OK_AND_ASSIGN(PrivateCiResult r,
                       PrivateCi(BernoulliData(500, 0.3, 2), p, options, rng));
  EXPECT_EQ(r.ledger.entries().size(), 50u);
  EXPECT_NEAR(r.ledger.spent(), 1.0, 50 * 1e-16);
  EXPECT_EQ(r.cells.size(), 50u);
}

TEST(PrivateCiTest, DegeneratePriorMatchesNonPrivate) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(10));
  RandomStream rng(1);
  PrivateCiOptions options{CiPriorConfig{0.0, 0.0, 5, 1e-6},
                           RenyiBudget::Create(2, 1).value(),
                           MechanismKind::kGaussian, 0.05};
  ASSERT_OK_AND_ASSIGN(PrivateCiResult r,
                       PrivateCi(BernoulliData(100, 0.3, 2), p, options, rng));
  EXPECT_EQ(r.private_set.cells, r.non_private_set.cells);
  for (const PrivateCell& cell : r.cells) {
    EXPECT_TRUE(cell.noise.is_identity());
  }
}

TEST(PrivateCiTest, IdentityMechanismMatchesNonPrivate) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(20));
  RandomStream rng(3);
  PrivateCiOptions options{CiPriorConfig{}, RenyiBudget::Create(2, 1).value(),
                           MechanismKind::kIdentity, 0.05};
  ASSERT_OK_AND_ASSIGN(PrivateCiResult r,
                       PrivateCi(BernoulliData(2000, 0.3, 4), p, options, rng));
  EXPECT_EQ(r.private_set.cells, r.non_private_set.cells);
  EXPECT_TRUE(r.non_private_set.Contains(0.3));
  EXPECT_LT(r.non_private_set.width, 0.999);
}

TEST(PrivateCiTest, UndefinedLaplaceAsksForGaussian) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(50));
  RandomStream rng(3);
  PrivateCiOptions options{CiPriorConfig{}, RenyiBudget::Create(2, 0.1).value(),
                           MechanismKind::kLaplace, 0.05};
  auto r = PrivateCi(BernoulliData(100, 0.3, 4), p, options, rng);
  EXPECT_THAT(r, StatusIs(absl::StatusCode::kFailedPrecondition));
  EXPECT_THAT(std::string(r.status().message()),
              ::testing::HasSubstr("Gaussian"));
}

TEST(PrivateCiTest, RejectsBadData) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(5));
  RandomStream rng(3);
  PrivateCiOptions options{CiPriorConfig{}, RenyiBudget::Create(2, 1).value(),
                           MechanismKind::kGaussian, 0.05};
  std::vector<double> empty;
  EXPECT_THAT(PrivateCi(empty, p, options, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
  std::vector<double> bad = {0.1, 1.2};
  EXPECT_THAT(PrivateCi(bad, p, options, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(PrivateCiTest, NoisedCellsAreDeflatedInExpectation) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(10));
  PrivateCiOptions options{CiPriorConfig{}, RenyiBudget::Create(2, 5).value(),
                           MechanismKind::kGaussian, 0.05};
  const std::vector<double> data = BernoulliData(300, 0.3, 9);
  std::vector<double> sums(10, 0.0), sums_sq(10, 0.0), deflated(10);
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng(DeriveSeed(77, {static_cast<uint64_t>(r)}));
    ASSERT_OK_AND_ASSIGN(PrivateCiResult out, PrivateCi(data, p, options, rng));
    for (int j = 0; j < 10; ++j) {
      // Ratio to the deflated value, so cells on very different scales can be
      // compared with one tolerance.
      const double ratio = std::exp(out.cells[j].released.log_value() -
                                    out.cells[j].cell.deflated.log_value());
      sums[j] += ratio;
      sums_sq[j] += ratio * ratio;
    }
  }
  for (int j = 0; j < 10; ++j) {
    const double mean = sums[j] / reps;
    const double se = std::sqrt((sums_sq[j] / reps - mean * mean) / reps);
    EXPECT_LE(mean, 1.0 + 4 * se) << "cell " << j;
  }
}

PrivateCiOptions IdentityOptions(LipschitzScaling lipschitz) {
  return PrivateCiOptions{CiPriorConfig{}, RenyiBudget::Create(2, 1).value(),
                          MechanismKind::kIdentity, 0.05, lipschitz};
}

TEST(PrivateCiTest, EndpointBoundHoldsAcrossCell) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(10));
  const std::vector<double> data = BernoulliData(400, 0.3, 5);
  RandomStream rng(1);
  ASSERT_OK_AND_ASSIGN(
      PrivateCiResult r,
      PrivateCi(data, p, IdentityOptions(LipschitzScaling::kEndpoint), rng));
  for (int j = 0; j < p.cells(); ++j) {
    ASSERT_OK_AND_ASSIGN(
        BettingPrior prior,
        MakeUniformPriorForRange(-1.0, 1.0, kDefaultPriorAtoms, p.lower(j),
                                 p.upper(j)));
    auto shared = std::make_shared<const BettingPrior>(std::move(prior));
    for (int g = 0; g <= 40; ++g) {
      const double theta = p.lower(j) + p.width(j) * g / 40.0;
      ASSERT_OK_AND_ASSIGN(MeanEValueState state,
                           StateFromData(shared, theta, data));
      EXPECT_LE(r.cells[j].cell.deflated.log_value(),
                EValueOf(state).log_value() + 1e-9)
          << "cell " << j << " theta " << theta;
    }
  }
}

TEST(PrivateCiTest, EndpointSensitivityCoversAddedRecord) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(10));
  const std::vector<double> data = BernoulliData(200, 0.6, 6);
  RandomStream rng(1);
  ASSERT_OK_AND_ASSIGN(
      PrivateCiResult before,
      PrivateCi(data, p, IdentityOptions(LipschitzScaling::kEndpoint), rng));
  for (double y : {0.0, 0.37, 1.0}) {
    std::vector<double> neighbor = data;
    neighbor.push_back(y);
    ASSERT_OK_AND_ASSIGN(
        PrivateCiResult after,
        PrivateCi(neighbor, p, IdentityOptions(LipschitzScaling::kEndpoint),
                  rng));
    for (int j = 0; j < p.cells(); ++j) {
      const double change =
          std::abs(after.cells[j].cell.deflated.log_value() -
                   before.cells[j].cell.deflated.log_value());
      EXPECT_LE(change, before.cells[j].sensitivity.value() + 1e-9)
          << "cell " << j << " y " << y;
    }
  }
}

TEST(PrivateCiTest, SampleSizeScalingMultipliesLipschitzByN) {
  ASSERT_OK_AND_ASSIGN(Partition p, Partition::Uniform(5));
  const std::vector<double> data = BernoulliData(50, 0.3, 7);
  RandomStream rng(1);
  ASSERT_OK_AND_ASSIGN(
      PrivateCiResult per_obs,
      PrivateCi(data, p, IdentityOptions(LipschitzScaling::kPerObservation),
                rng));
  ASSERT_OK_AND_ASSIGN(
      PrivateCiResult scaled,
      PrivateCi(data, p, IdentityOptions(LipschitzScaling::kSampleSize), rng));
  for (int j = 0; j < p.cells(); ++j) {
    EXPECT_DOUBLE_EQ(scaled.cells[j].cell.lipschitz,
                     50 * per_obs.cells[j].cell.lipschitz);
    EXPECT_LE(scaled.cells[j].cell.deflated.log_value(),
              per_obs.cells[j].cell.deflated.log_value());
  }
}

}  // namespace
}  // namespace evdp
