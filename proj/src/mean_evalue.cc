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

#include "evdp/mean_evalue.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/status_macros.h"

namespace evdp {
namespace {

absl::Status CheckTheta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("theta must lie in (0, 1), got ", theta));
  }
  return absl::OkStatus();
}

absl::Status CheckObservation(double y) {
  if (!(y >= 0.0 && y <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("observations must lie in [0, 1], got ", y));
  }
  return absl::OkStatus();
}

BettingPrior MidpointPrior(double lo, double hi, int k) {
  BettingPrior prior;
  prior.lambda_inf = lo;
  prior.lambda_sup = hi;
  prior.atoms.resize(k);
  prior.weights.assign(k, 1.0 / k);
  for (int i = 0; i < k; ++i) {
    prior.atoms[i] = lo + (i + 0.5) / k * (hi - lo);
  }
  return prior;
}

}  // namespace

absl::Status ValidatePrior(const BettingPrior& prior, double theta_inf,
                           double theta_sup) {
  RETURN_IF_ERROR(CheckTheta(theta_inf));
  RETURN_IF_ERROR(CheckTheta(theta_sup));
  if (theta_inf > theta_sup) {
    return absl::InvalidArgumentError("theta_inf must not exceed theta_sup");
  }
  if (prior.atoms.empty() || prior.atoms.size() != prior.weights.size()) {
    return absl::InvalidArgumentError(
        "prior needs one weight per atom and at least one atom");
  }
  if (!std::isfinite(prior.lambda_inf) || !std::isfinite(prior.lambda_sup) ||
      prior.lambda_inf > prior.lambda_sup) {
    return absl::InvalidArgumentError("prior support is not an interval");
  }
  if (!(prior.lambda_inf > -1.0 / (1.0 - theta_inf)) ||
      !(prior.lambda_sup < 1.0 / theta_sup)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "prior support [%g, %g] must lie inside (-1/(1-theta), 1/theta) for "
        "theta in [%g, %g]",
        prior.lambda_inf, prior.lambda_sup, theta_inf, theta_sup));
  }
  double total = 0.0;
  for (size_t i = 0; i < prior.atoms.size(); ++i) {
    if (!(prior.weights[i] >= 0.0)) {
      return absl::InvalidArgumentError("prior weights must be >= 0");
    }
    if (!(prior.atoms[i] >= prior.lambda_inf &&
          prior.atoms[i] <= prior.lambda_sup)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "prior atom ", prior.atoms[i], " lies outside its support"));
    }
    total += prior.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    return absl::InvalidArgumentError(
        absl::StrCat("prior weights sum to ", total, ", not 1"));
  }
  return absl::OkStatus();
}

absl::StatusOr<BettingPrior> MakeUniformPriorForRange(double lambda_inf,
                                                      double lambda_sup, int k,
                                                      double theta_inf,
                                                      double theta_sup,
                                                      double margin) {
  RETURN_IF_ERROR(CheckTheta(theta_inf));
  RETURN_IF_ERROR(CheckTheta(theta_sup));
  if (theta_inf > theta_sup) {
    return absl::InvalidArgumentError("theta_inf must not exceed theta_sup");
  }
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("prior needs at least one atom, got K=", k));
  }
  if (!std::isfinite(lambda_inf) || !std::isfinite(lambda_sup) ||
      lambda_inf > lambda_sup) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "bet support [%g, %g] is not a finite interval", lambda_inf,
        lambda_sup));
  }
  if (!(margin > 0.0 && margin < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("support margin must lie in (0, 1), got ", margin));
  }
  const double lo = std::max(lambda_inf, -(1.0 - margin) / (1.0 - theta_inf));
  const double hi = std::min(lambda_sup, (1.0 - margin) / theta_sup);
  if (lo > hi) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "bet support [%g, %g] does not meet the admissible range for theta in "
        "[%g, %g]",
        lambda_inf, lambda_sup, theta_inf, theta_sup));
  }
  return MidpointPrior(lo, hi, k);
}

absl::StatusOr<BettingPrior> MakeUniformPrior(double lambda_inf,
                                              double lambda_sup, int k,
                                              double theta, double margin) {
  return MakeUniformPriorForRange(lambda_inf, lambda_sup, k, theta, theta,
                                  margin);
}

absl::StatusOr<BettingPrior> MakeOneSidedPrior(double c, double theta, int k) {
  if (!(c > 0.0 && c < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("betting constant c must lie in (0, 1), got ", c));
  }
  RETURN_IF_ERROR(CheckTheta(theta));
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("prior needs at least one atom, got K=", k));
  }
  return MidpointPrior(0.0, c / theta, k);
}

absl::StatusOr<MeanEValueState> MeanEValueState::Create(
    std::shared_ptr<const BettingPrior> prior, double theta) {
  if (prior == nullptr) return absl::InvalidArgumentError("null prior");
  RETURN_IF_ERROR(ValidatePrior(*prior, theta, theta));
  return MeanEValueState(std::move(prior), theta);
}

absl::StatusOr<MeanEValueState> MeanEValueState::Create(BettingPrior prior,
                                                        double theta) {
  return Create(std::make_shared<const BettingPrior>(std::move(prior)), theta);
}

absl::Status MeanEValueState::Observe(double y) {
  return ObserveRepeated(y, 1);
}

absl::Status MeanEValueState::ObserveRepeated(double y, int64_t count) {
  RETURN_IF_ERROR(CheckObservation(y));
  if (count < 0) {
    return absl::InvalidArgumentError("observation count must be >= 0");
  }
  if (count == 0) return absl::OkStatus();
  const std::vector<double>& atoms = prior_->atoms;
  std::vector<double> increments(atoms.size());
  for (size_t k = 0; k < atoms.size(); ++k) {
    const double step = atoms[k] * (y - theta_);
    if (!(step > -1.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "bet %g at theta=%g loses all wealth on y=%g", atoms[k], theta_, y));
    }
    increments[k] = std::log1p(step);
  }
  const double c = static_cast<double>(count);
  for (size_t k = 0; k < atoms.size(); ++k) {
    log_wealth_[k] += count == 1 ? increments[k] : c * increments[k];
  }
  n_ += count;
  return absl::OkStatus();
}

absl::StatusOr<MeanEValueState> Update(MeanEValueState state, double y) {
  RETURN_IF_ERROR(state.Observe(y));
  return state;
}

absl::StatusOr<MeanEValueState> StateFromData(
    std::shared_ptr<const BettingPrior> prior, double theta,
    absl::Span<const double> data) {
  ASSIGN_OR_RETURN(MeanEValueState state,
                   MeanEValueState::Create(std::move(prior), theta));
  std::map<double, int64_t> counts;
  for (size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] >= 0.0 && data[i] <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "observation %d is %g, outside [0, 1]", i, data[i]));
    }
    ++counts[data[i]];
  }
  for (const auto& [y, count] : counts) {
    RETURN_IF_ERROR(state.ObserveRepeated(y, count));
  }
  return state;
}

EValue EValueOf(const MeanEValueState& state) {
  const std::vector<double>& lw = state.log_wealth();
  const std::vector<double>& w = state.prior().weights;
  double max_term = -HUGE_VAL;
  for (size_t k = 0; k < lw.size(); ++k) {
    if (w[k] > 0.0) max_term = std::max(max_term, lw[k]);
  }
  // Dividing by the summed weights absorbs their rounding, so an empty state
  // is exactly 1.
  double sum = 0.0;
  double total = 0.0;
  for (size_t k = 0; k < lw.size(); ++k) {
    if (w[k] > 0.0) {
      sum += w[k] * std::exp(lw[k] - max_term);
      total += w[k];
    }
  }
  return EValue::FromLog(max_term + std::log(sum / total)).value();
}

double BettingFraction(const MeanEValueState& state) {
  const std::vector<double>& lw = state.log_wealth();
  const std::vector<double>& w = state.prior().weights;
  const std::vector<double>& atoms = state.prior().atoms;
  double max_term = -HUGE_VAL;
  for (size_t k = 0; k < lw.size(); ++k) {
    if (w[k] > 0.0) max_term = std::max(max_term, lw[k]);
  }
  double num = 0.0;
  double den = 0.0;
  for (size_t k = 0; k < lw.size(); ++k) {
    if (w[k] <= 0.0) continue;
    const double mass = w[k] * std::exp(lw[k] - max_term);
    num += mass * atoms[k];
    den += mass;
  }
  return num / den;
}

absl::StatusOr<LogSensitivity> LogSensitivityBound(double lambda_inf,
                                                   double lambda_sup,
                                                   double theta) {
  RETURN_IF_ERROR(CheckTheta(theta));
  if (!(lambda_inf <= lambda_sup)) {
    return absl::InvalidArgumentError("lambda_inf must not exceed lambda_sup");
  }
  const double gain =
      std::max(lambda_sup * (1.0 - theta), -lambda_inf * theta);
  const double loss =
      std::min(lambda_inf * (1.0 - theta), -lambda_sup * theta);
  if (!(loss > -1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "bet support [%g, %g] is not admissible at theta=%g", lambda_inf,
        lambda_sup, theta));
  }
  return LogSensitivity::Create(
      std::max({0.0, std::log1p(gain), -std::log1p(loss)}));
}

absl::StatusOr<LogSensitivity> LogSensitivityBound(const BettingPrior& prior,
                                                   double theta) {
  return LogSensitivityBound(prior.lambda_inf, prior.lambda_sup, theta);
}

absl::StatusOr<double> LipschitzBound(double lambda_inf, double lambda_sup,
                                      double theta_inf, double theta_sup) {
  RETURN_IF_ERROR(CheckTheta(theta_inf));
  RETURN_IF_ERROR(CheckTheta(theta_sup));
  if (theta_inf > theta_sup) {
    return absl::InvalidArgumentError("theta_inf must not exceed theta_sup");
  }
  const double upper_den = 1.0 - lambda_sup * theta_sup;
  const double lower_den = 1.0 + lambda_inf * (1.0 - theta_inf);
  if (!(upper_den > 0.0) || !(lower_den > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "bet support [%g, %g] is not admissible for theta in [%g, %g]",
        lambda_inf, lambda_sup, theta_inf, theta_sup));
  }
  return std::max(std::abs(lambda_sup / upper_den),
                  std::abs(lambda_inf / lower_den));
}

absl::StatusOr<double> LipschitzBound(const BettingPrior& prior,
                                      double theta_inf, double theta_sup) {
  return LipschitzBound(prior.lambda_inf, prior.lambda_sup, theta_inf,
                        theta_sup);
}

absl::StatusOr<double> LogEValueLipschitzBound(const BettingPrior& prior,
                                               double theta_inf,
                                               double theta_sup, int64_t n) {
  if (n < 0) return absl::InvalidArgumentError("sample size must be >= 0");
  ASSIGN_OR_RETURN(const double per_observation,
                   LipschitzBound(prior, theta_inf, theta_sup));
  return static_cast<double>(n) * per_observation;
}

}  // namespace evdp
