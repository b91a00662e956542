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

#include "evdp/harness/synthetic.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "boost/math/special_functions/beta.hpp"

namespace evdp::harness {
namespace {

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

// Probability q at which ModelScore equals `score`, for score in [lo, hi].
double ModelProbabilityAt(const BetaScoreModel& model, double score) {
  const double span = std::pow(model.floor, -model.power) - 1.0;
  const double t = (score - model.lo) / (model.hi - model.lo);
  return std::pow(1.0 + t * span, -1.0 / model.power);
}

}  // namespace

absl::Status ValidateSyntheticSpec(const SyntheticSpec& spec) {
  if (spec.n < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("sample size must be >= 0, got ", spec.n));
  }
  if (const auto* b = std::get_if<BernoulliSpec>(&spec.kind)) {
    if (!IsProbability(b->p)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Bernoulli p must lie in [0, 1], got ", b->p));
    }
  } else if (const auto* c = std::get_if<ChangepointSpec>(&spec.kind)) {
    if (!IsProbability(c->mean_before) || !IsProbability(c->mean_after)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "change-point means must lie in [0, 1], got %g and %g",
          c->mean_before, c->mean_after));
    }
    if (c->t_change < 0) {
      return absl::InvalidArgumentError("change point must be >= 0");
    }
  } else {
    const auto& m = std::get<ScoreMixtureSpec>(spec.kind);
    double total = 0.0;
    for (double w : m.weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        return absl::InvalidArgumentError("mixture weights must be >= 0");
      }
      total += w;
    }
    if (!(total > 0.0)) {
      return absl::InvalidArgumentError("mixture weights must not all be 0");
    }
  }
  return absl::OkStatus();
}

std::vector<double> CumulativeWeights(absl::Span<const double> weights) {
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    cumulative[i] = total;
  }
  return cumulative;
}

int SampleIndex(absl::Span<const double> cumulative, RandomStream& rng) {
  const double target = rng.Uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  const int index = static_cast<int>(it - cumulative.begin());
  return std::min(index, static_cast<int>(cumulative.size()) - 1);
}

absl::StatusOr<std::vector<double>> Generate(const SyntheticSpec& spec,
                                             RandomStream& rng) {
  if (absl::Status s = ValidateSyntheticSpec(spec); !s.ok()) return s;
  std::vector<double> out(spec.n);
  if (const auto* b = std::get_if<BernoulliSpec>(&spec.kind)) {
    for (double& y : out) y = rng.Bernoulli(b->p) ? 1.0 : 0.0;
  } else if (const auto* c = std::get_if<ChangepointSpec>(&spec.kind)) {
    for (int64_t i = 0; i < spec.n; ++i) {
      const double mean = i < c->t_change ? c->mean_before : c->mean_after;
      out[i] = rng.Bernoulli(mean) ? 1.0 : 0.0;
    }
  } else {
    const auto cumulative =
        CumulativeWeights(std::get<ScoreMixtureSpec>(spec.kind).weights);
    for (double& y : out) y = SampleIndex(cumulative, rng);
  }
  return out;
}

absl::Status ValidateBetaScoreModel(const BetaScoreModel& model) {
  if (!(model.a > 0.0 && model.b > 0.0)) {
    return absl::InvalidArgumentError("Beta parameters must be positive");
  }
  if (!(model.floor > 0.0 && model.floor < 1.0) || !(model.power > 0.0)) {
    return absl::InvalidArgumentError(
        "score floor must lie in (0, 1) and power must be positive");
  }
  if (!(model.lo > 0.0 && model.hi > model.lo)) {
    return absl::InvalidArgumentError("score range must satisfy 0 < lo < hi");
  }
  return absl::OkStatus();
}

double ModelScore(const BetaScoreModel& model, double q) {
  const double clamped = std::clamp(q, model.floor, 1.0);
  const double span = std::pow(model.floor, -model.power) - 1.0;
  const double t = (std::pow(clamped, -model.power) - 1.0) / span;
  return std::clamp(model.lo + t * (model.hi - model.lo), model.lo, model.hi);
}

absl::StatusOr<std::vector<double>> ModelBinWeights(
    const BetaScoreModel& model, const ScoreQuantizer& quantizer,
    bool true_label) {
  if (absl::Status s = ValidateBetaScoreModel(model); !s.ok()) return s;
  if (quantizer.lo() != model.lo || quantizer.hi() != model.hi) {
    return absl::InvalidArgumentError(
        "quantizer range must match the score model range");
  }
  const double a = true_label ? model.a : model.b;
  const double b = true_label ? model.b : model.a;
  const int bins = quantizer.bins();
  const double width = (quantizer.hi() - quantizer.lo()) / bins;
  // The score is decreasing in q, so bin [u, v] collects
  // q in [q(v), q(u)]; everything below the floor lands on the top score.
  std::vector<double> weights(bins);
  for (int k = 0; k < bins; ++k) {
    const double u = quantizer.lo() + k * width;
    const double v = k + 1 == bins ? quantizer.hi() : u + width;
    const double q_hi = k == 0 ? 1.0 : ModelProbabilityAt(model, u);
    const double q_lo = k + 1 == bins ? 0.0 : ModelProbabilityAt(model, v);
    const double upper = q_hi >= 1.0 ? 1.0 : boost::math::ibeta(a, b, q_hi);
    const double lower = q_lo <= 0.0 ? 0.0 : boost::math::ibeta(a, b, q_lo);
    weights[k] = std::max(0.0, upper - lower);
  }
  return weights;
}

std::pair<double, double> SampleScorePair(const BetaScoreModel& model,
                                          RandomStream& rng) {
  const double q = boost::math::ibeta_inv(model.a, model.b, rng.Uniform());
  return {ModelScore(model, q), ModelScore(model, 1.0 - q)};
}

}  // namespace evdp::harness
