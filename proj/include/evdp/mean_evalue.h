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

#ifndef EVDP_MEAN_EVALUE_H_
#define EVDP_MEAN_EVALUE_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "evdp/evalue.h"
#include "evdp/privacy.h"

namespace evdp {

inline constexpr int kDefaultPriorAtoms = 101;
inline constexpr double kDefaultSupportMargin = 1e-6;

// A discrete mixing distribution over constant bets lambda.
struct BettingPrior {
  std::vector<double> atoms;
  std::vector<double> weights;
  // Support the atoms were placed in; the bounds below use these rather than
  // the extreme atoms.
  double lambda_inf = 0.0;
  double lambda_sup = 0.0;
};

// Checks weights, atom placement, and that 1 + lambda (y - theta) > 0 for
// every atom, y in [0, 1] and theta in [theta_inf, theta_sup].
absl::Status ValidatePrior(const BettingPrior& prior, double theta_inf,
                           double theta_sup);

// K equal-weight atoms at the midpoints of K equal pieces of
// [lambda_inf, lambda_sup]. The requested support is first clipped to
// [-(1 - margin) / (1 - theta), (1 - margin) / theta], so wide requests such as
// (-1, 1) work for every theta. lambda_inf == lambda_sup gives K copies of
// one bet.
absl::StatusOr<BettingPrior> MakeUniformPrior(
    double lambda_inf, double lambda_sup, int k, double theta,
    double margin = kDefaultSupportMargin);
// As above, clipped so the prior is usable for every theta in
// [theta_inf, theta_sup].
absl::StatusOr<BettingPrior> MakeUniformPriorForRange(
    double lambda_inf, double lambda_sup, int k, double theta_inf,
    double theta_sup, double margin = kDefaultSupportMargin);

// K equal-weight atoms at the midpoints of [0, c / theta); only bets that the
// mean exceeds theta.
absl::StatusOr<BettingPrior> MakeOneSidedPrior(double c, double theta, int k);

// Universal-portfolio wealth for the null "mean = theta", kept per atom in
// log space.
class MeanEValueState {
 public:
  static absl::StatusOr<MeanEValueState> Create(
      std::shared_ptr<const BettingPrior> prior, double theta);
  static absl::StatusOr<MeanEValueState> Create(BettingPrior prior,
                                                double theta);

  double theta() const { return theta_; }
  int64_t n() const { return n_; }
  const BettingPrior& prior() const { return *prior_; }
  const std::vector<double>& log_wealth() const { return log_wealth_; }

  // Adds log(1 + lambda_k (y - theta)) to every atom.
  absl::Status Observe(double y);
  // Same as `count` calls to Observe(y).
  absl::Status ObserveRepeated(double y, int64_t count);

 private:
  MeanEValueState(std::shared_ptr<const BettingPrior> prior, double theta)
      : prior_(std::move(prior)),
        theta_(theta),
        log_wealth_(prior_->atoms.size(), 0.0) {}

  std::shared_ptr<const BettingPrior> prior_;
  double theta_;
  int64_t n_ = 0;
  std::vector<double> log_wealth_;
};

// Pure form of MeanEValueState::Observe.
absl::StatusOr<MeanEValueState> Update(MeanEValueState state, double y);

// State after observing all of `data`. Equal values are folded together, so
// the result does not depend on the order of `data`.
absl::StatusOr<MeanEValueState> StateFromData(
    std::shared_ptr<const BettingPrior> prior, double theta,
    absl::Span<const double> data);

// sum_k p_k exp(log_wealth_k), by max-shifted summation.
EValue EValueOf(const MeanEValueState& state);

// Bet for the next observation: the wealth-weighted mean of the atoms.
double BettingFraction(const MeanEValueState& state);

// Worst-case change in log E_theta when one observation is added or removed.
absl::StatusOr<LogSensitivity> LogSensitivityBound(double lambda_inf,
                                                   double lambda_sup,
                                                   double theta);
absl::StatusOr<LogSensitivity> LogSensitivityBound(const BettingPrior& prior,
                                                   double theta);

// max{|lambda_sup / (1 - lambda_sup theta_sup)|,
//     |lambda_inf / (1 + lambda_inf (1 - theta_inf))|}: bound on the
// theta-derivative of log(1 + lambda (y - theta)) for a single observation.
absl::StatusOr<double> LipschitzBound(double lambda_inf, double lambda_sup,
                                      double theta_inf, double theta_sup);
absl::StatusOr<double> LipschitzBound(const BettingPrior& prior,
                                      double theta_inf, double theta_sup);

// Lipschitz constant of theta -> log E_theta over [theta_inf, theta_sup] after
// n observations: the log e-value is a sum of n per-observation terms, so the
// single-observation bound is multiplied by n.
absl::StatusOr<double> LogEValueLipschitzBound(const BettingPrior& prior,
                                               double theta_inf,
                                               double theta_sup, int64_t n);

}  // namespace evdp

#endif  // EVDP_MEAN_EVALUE_H_
