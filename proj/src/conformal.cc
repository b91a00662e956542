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

#include "evdp/conformal.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/status_macros.h"

namespace evdp {

ScoreQuantizer::ScoreQuantizer(int bins, double lo, double hi)
    : bins_(bins), lo_(lo), hi_(hi), width_((hi - lo) / bins), centers_(bins) {
  for (int k = 0; k < bins; ++k) centers_[k] = center(k);
}

absl::StatusOr<ScoreQuantizer> ScoreQuantizer::Create(int bins, double lo,
                                                      double hi) {
  if (bins < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least one bin, got ", bins));
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo > 0.0) || !(hi > lo)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "score range must satisfy 0 < lo < hi, got [%g, %g]", lo, hi));
  }
  return ScoreQuantizer(bins, lo, hi);
}

absl::StatusOr<int> ScoreQuantizer::BinOf(double score) const {
  if (!(score >= lo_ && score <= hi_)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "score %g is outside the quantizer range [%g, %g]", score, lo_, hi_));
  }
  const double position = (score - lo_) / width_;
  const int bin = static_cast<int>(std::ceil(position)) - 1;
  return std::clamp(bin, 0, bins_ - 1);
}

absl::StatusOr<CalibrationScores> CalibrationScores::Create(
    const ScoreQuantizer& quantizer, absl::Span<const double> raw) {
  std::vector<double> values(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    auto bin = quantizer.BinOf(raw[i]);
    if (!bin.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "calibration score ", i, ": ", bin.status().message()));
    }
    values[i] = quantizer.center(*bin);
  }
  return FromValues(std::move(values));
}

absl::StatusOr<CalibrationScores> CalibrationScores::FromValues(
    std::vector<double> values) {
  if (values.empty()) {
    return absl::InvalidArgumentError("calibration set is empty");
  }
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "calibration score %d is %g; scores must be positive", i,
          values[i]));
    }
    sum += values[i];
  }
  return CalibrationScores(std::move(values), sum);
}

absl::StatusOr<EValue> ExchEValue(const CalibrationScores& calib,
                                  double s_test) {
  if (!(s_test > 0.0) || !std::isfinite(s_test)) {
    return absl::InvalidArgumentError(
        absl::StrCat("test score must be positive, got ", s_test));
  }
  return EValue::Create((calib.n() + 1) * s_test / (calib.sum() + s_test));
}

absl::StatusOr<LogSensitivity> ExchSensitivity(double a, double b, int n) {
  if (!(a > 0.0) || !(b >= a) || !std::isfinite(b)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "score bounds must satisfy 0 < a <= b, got a=%g, b=%g", a, b));
  }
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("calibration size must be >= 1, got ", n));
  }
  return LogSensitivity::Create(2.0 * (b / a) / (n + 1));
}

absl::StatusOr<PrivateLevelEValues> PrivatizeLevels(
    const CalibrationScores& calib, const ScoreQuantizer& quantizer,
    const RenyiBudget& budget, MechanismKind mechanism, RandomStream& rng) {
  for (int i = 0; i < calib.n(); ++i) {
    const double v = calib.values()[i];
    if (!(v >= quantizer.lo() && v <= quantizer.hi())) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "calibration score %d (%g) is outside the quantizer range", i, v));
    }
  }
  const int bins = quantizer.bins();
  ASSIGN_OR_RETURN(const RenyiBudget per_level, SplitBudget(budget, bins));
  ASSIGN_OR_RETURN(const LogSensitivity sensitivity,
                   ExchSensitivity(quantizer.smallest_center(),
                                   quantizer.largest_center(), calib.n()));
  ASSIGN_OR_RETURN(std::optional<NoiseSpec> noise,
                   CalibrateRdp(mechanism, sensitivity, per_level));
  if (!noise.has_value()) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "the biased Laplace mechanism is undefined at Rényi order %g with "
        "per-level epsilon %g (log-sensitivity %g); use the Gaussian "
        "mechanism instead",
        per_level.alpha(), per_level.epsilon(), sensitivity.value()));
  }
  ASSIGN_OR_RETURN(BudgetLedger ledger, BudgetLedger::Create(budget.alpha()));
  std::vector<PrivateEValue> levels;
  std::vector<double> non_private_log;
  levels.reserve(bins);
  non_private_log.reserve(bins);
  for (int k = 0; k < bins; ++k) {
    ASSIGN_OR_RETURN(const EValue e, ExchEValue(calib, quantizer.center(k)));
    ASSIGN_OR_RETURN(PrivateEValue released, Privatize(e, *noise, rng));
    ASSIGN_OR_RETURN(ledger, ComposeLedger(ledger, absl::StrCat("level ", k),
                                           per_level));
    non_private_log.push_back(e.log_value());
    levels.push_back(std::move(released));
  }
  return PrivateLevelEValues{std::move(levels), std::move(non_private_log),
                             per_level,         sensitivity,
                             std::move(*noise), std::move(ledger)};
}

absl::StatusOr<PredictionSet> PredictSetFromLogValues(
    absl::Span<const double> level_log_values,
    const ScoreQuantizer& quantizer, absl::Span<const Candidate> candidates,
    double alpha, bool empty_to_singleton) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in (0, 1), got ", alpha));
  }
  if (static_cast<int>(level_log_values.size()) != quantizer.bins()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "got %d level e-values for %d bins", level_log_values.size(),
        quantizer.bins()));
  }
  const double log_threshold = -std::log(alpha);
  PredictionSet set;
  int best = -1;
  double best_log = HUGE_VAL;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto bin = quantizer.BinOf(candidates[i].score);
    if (!bin.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "candidate ", i, " (", candidates[i].label,
          "): ", bin.status().message()));
    }
    const double log_e = level_log_values[*bin];
    if (log_e < log_threshold) set.included.push_back(static_cast<int>(i));
    if (log_e < best_log) {
      best_log = log_e;
      best = static_cast<int>(i);
    }
  }
  set.was_empty = set.included.empty();
  if (set.was_empty && empty_to_singleton && best >= 0) {
    set.included.push_back(best);
  }
  return set;
}

absl::StatusOr<PredictionSet> PredictSet(
    const PrivateLevelEValues& levels, const ScoreQuantizer& quantizer,
    absl::Span<const Candidate> candidates, double alpha,
    bool empty_to_singleton) {
  std::vector<double> logs(levels.levels.size());
  for (size_t k = 0; k < logs.size(); ++k) {
    logs[k] = levels.levels[k].log_value();
  }
  return PredictSetFromLogValues(logs, quantizer, candidates, alpha,
                                 empty_to_singleton);
}

}  // namespace evdp
