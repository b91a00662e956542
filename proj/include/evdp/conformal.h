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

#ifndef EVDP_CONFORMAL_H_
#define EVDP_CONFORMAL_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "evdp/evalue.h"
#include "evdp/noise.h"
#include "evdp/privacy.h"
#include "evdp/random.h"

namespace evdp {

// B equal bins over [lo, hi], lo > 0. A score maps to the center of its bin;
// a score on the edge between two bins goes to the lower one.
class ScoreQuantizer {
 public:
  static absl::StatusOr<ScoreQuantizer> Create(int bins, double lo, double hi);

  int bins() const { return bins_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double center(int k) const { return lo_ + (k + 0.5) * width_; }
  const std::vector<double>& centers() const { return centers_; }
  double smallest_center() const { return centers_.front(); }
  double largest_center() const { return centers_.back(); }

  absl::StatusOr<int> BinOf(double score) const;

 private:
  ScoreQuantizer(int bins, double lo, double hi);

  int bins_;
  double lo_;
  double hi_;
  double width_;
  std::vector<double> centers_;
};

class CalibrationScores {
 public:
  // Quantizes `raw`; fails on the first score outside the quantizer range.
  static absl::StatusOr<CalibrationScores> Create(
      const ScoreQuantizer& quantizer, absl::Span<const double> raw);
  // Scores that are already positive bin values.
  static absl::StatusOr<CalibrationScores> FromValues(
      std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  double sum() const { return sum_; }
  int n() const { return static_cast<int>(values_.size()); }

 private:
  CalibrationScores(std::vector<double> values, double sum)
      : values_(std::move(values)), sum_(sum) {}

  std::vector<double> values_;
  double sum_;
};

// (n + 1) s_test / (sum of calibration scores + s_test).
absl::StatusOr<EValue> ExchEValue(const CalibrationScores& calib,
                                  double s_test);

// 2 (b / a) / (n + 1): add/remove log-sensitivity of the exchangeability
// e-value when every score lies in [a, b].
absl::StatusOr<LogSensitivity> ExchSensitivity(double a, double b, int n);

struct PrivateLevelEValues {
  // One released e-value per bin center.
  std::vector<PrivateEValue> levels;
  std::vector<double> non_private_log;
  RenyiBudget per_level;
  LogSensitivity sensitivity;
  NoiseSpec noise;
  BudgetLedger ledger;
};

// Releases the exchangeability e-value at every bin center, each at
// (alpha, epsilon / B). Noise is drawn once per level, in level order, and
// reused for every later prediction. Fails with FailedPrecondition when the
// biased Laplace mechanism is undefined at the per-level budget.
absl::StatusOr<PrivateLevelEValues> PrivatizeLevels(
    const CalibrationScores& calib, const ScoreQuantizer& quantizer,
    const RenyiBudget& budget, MechanismKind mechanism, RandomStream& rng);

struct Candidate {
  std::string label;
  double score;
};

struct PredictionSet {
  // Indices into the candidate list.
  std::vector<int> included;
  // True when no candidate passed the threshold, before any singleton fix.
  bool was_empty = false;
};

// Keeps candidates whose level log e-value is < log(1 / alpha). With
// `empty_to_singleton`, an empty set becomes the candidate with the smallest
// level e-value (first one on ties).
absl::StatusOr<PredictionSet> PredictSetFromLogValues(
    absl::Span<const double> level_log_values,
    const ScoreQuantizer& quantizer, absl::Span<const Candidate> candidates,
    double alpha, bool empty_to_singleton);
absl::StatusOr<PredictionSet> PredictSet(
    const PrivateLevelEValues& levels, const ScoreQuantizer& quantizer,
    absl::Span<const Candidate> candidates, double alpha,
    bool empty_to_singleton);

}  // namespace evdp

#endif  // EVDP_CONFORMAL_H_
