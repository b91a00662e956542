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

#ifndef EVDP_HARNESS_SYNTHETIC_H_
#define EVDP_HARNESS_SYNTHETIC_H_

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "evdp/conformal.h"
#include "evdp/random.h"

namespace evdp::harness {

// i.i.d. Bernoulli(p) values in {0, 1}.
struct BernoulliSpec {
  double p;
};

// Bernoulli losses with mean `mean_before` for indices < t_change and
// `mean_after` from t_change on.
struct ChangepointSpec {
  double mean_before;
  double mean_after;
  int64_t t_change;
};

// i.i.d. bin indices drawn with probabilities proportional to `weights`.
struct ScoreMixtureSpec {
  std::vector<double> weights;
};

struct SyntheticSpec {
  std::variant<BernoulliSpec, ChangepointSpec, ScoreMixtureSpec> kind;
  int64_t n;
};

absl::Status ValidateSyntheticSpec(const SyntheticSpec& spec);

// n draws. For ScoreMixtureSpec the values are bin indices 0..B-1.
absl::StatusOr<std::vector<double>> Generate(const SyntheticSpec& spec,
                                             RandomStream& rng);

// Index drawn with probability weights[i] / sum(weights), by inverting the
// cumulative sums. `cumulative` must come from CumulativeWeights.
std::vector<double> CumulativeWeights(absl::Span<const double> weights);
int SampleIndex(absl::Span<const double> cumulative, RandomStream& rng);

// Nonconformity scores for a binary classifier whose probability for the
// true label is q ~ Beta(a, b) (and 1 - q for the other label). A label
// with probability q scores
//   lo + (max(q, floor)^-power - 1) / (floor^-power - 1) * (hi - lo),
// which is decreasing in q and spans [lo, hi].
struct BetaScoreModel {
  double a = 8.0;
  double b = 2.0;
  double floor = 0.01;
  double power = 0.25;
  double lo = 1.0;
  double hi = 100.0;
};

absl::Status ValidateBetaScoreModel(const BetaScoreModel& model);

double ModelScore(const BetaScoreModel& model, double q);

// Probability that the true-label (or other-label) score falls in each bin
// of `quantizer`, from the Beta CDF.
absl::StatusOr<std::vector<double>> ModelBinWeights(
    const BetaScoreModel& model, const ScoreQuantizer& quantizer,
    bool true_label);

// One test point: (true-label score, other-label score).
std::pair<double, double> SampleScorePair(const BetaScoreModel& model,
                                          RandomStream& rng);

}  // namespace evdp::harness

#endif  // EVDP_HARNESS_SYNTHETIC_H_
