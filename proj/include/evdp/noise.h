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

#ifndef EVDP_NOISE_H_
#define EVDP_NOISE_H_

#include <optional>
#include <string>
#include <variant>

#include "absl/status/statusor.h"
#include "evdp/privacy.h"
#include "evdp/random.h"

namespace evdp {

// Log-scale noise xi ~ N(mean, variance). Valid (E[exp(-xi)] <= 1) iff
// mean >= variance / 2.
struct GaussianNoiseSpec {
  double mean;
  double variance;
};

// Log-scale noise xi ~ Laplace(mean, scale). Valid iff scale < 1 and
// mean >= -log(1 - scale^2).
struct LaplaceNoiseSpec {
  double mean;
  double scale;
};

// No noise: used when the log-sensitivity is zero, and as the non-private
// control in experiments.
struct IdentityNoiseSpec {};

using NoiseDistribution =
    std::variant<GaussianNoiseSpec, LaplaceNoiseSpec, IdentityNoiseSpec>;

// What a calibrated spec was calibrated for.
struct Calibration {
  PrivacyBudget budget;
  double log_sensitivity;
};

// A noise distribution, optionally tagged with the budget it was calibrated
// for. Only calibrated specs can privatize e-values; hand-built specs exist
// for validation and negative controls.
class NoiseSpec {
 public:
  NoiseSpec(NoiseDistribution distribution)  // NOLINT: implicit by design
      : distribution_(distribution) {}
  NoiseSpec(NoiseDistribution distribution, Calibration calibration)
      : distribution_(distribution), calibration_(std::move(calibration)) {}

  const NoiseDistribution& distribution() const { return distribution_; }
  const std::optional<Calibration>& calibration() const {
    return calibration_;
  }

  const GaussianNoiseSpec* gaussian() const {
    return std::get_if<GaussianNoiseSpec>(&distribution_);
  }
  const LaplaceNoiseSpec* laplace() const {
    return std::get_if<LaplaceNoiseSpec>(&distribution_);
  }
  bool is_identity() const {
    return std::holds_alternative<IdentityNoiseSpec>(distribution_);
  }

  // E[xi].
  double mean() const;
  std::string Describe() const;

 private:
  NoiseDistribution distribution_;
  std::optional<Calibration> calibration_;
};

enum class MechanismKind { kGaussian, kLaplace, kIdentity };

std::string MechanismName(MechanismKind kind);
absl::StatusOr<MechanismKind> ParseMechanismKind(const std::string& name);

// Biased Gaussian mechanism for (alpha, epsilon)-RDP:
// variance = alpha * sens^2 / (2 epsilon), mean = variance / 2.
// Zero sensitivity yields the identity spec.
absl::StatusOr<NoiseSpec> CalibrateGaussianRdp(const LogSensitivity& sens,
                                               const RenyiBudget& budget);

// h_alpha(t) = alpha e^{(alpha-1) sens t} + (alpha-1) e^{-alpha sens t}, t >= 0.
absl::StatusOr<double> HAlpha(double t, const LogSensitivity& sens,
                              double alpha);

// The t >= 0 with h_alpha(t) = target, found by bisection. h_alpha is strictly
// increasing for sens > 0, so the root is unique.
absl::StatusOr<double> InvertHAlpha(double target, const LogSensitivity& sens,
                                    double alpha);
// Same, with the target given as log(target); used when the target itself
// overflows a double.
absl::StatusOr<double> InvertHAlphaLog(double log_target,
                                       const LogSensitivity& sens,
                                       double alpha);

// Biased Laplace mechanism for (alpha, epsilon)-RDP. Returns std::nullopt when
// the mechanism is inapplicable (calibrated scale >= 1, so the MGF of the
// noise does not exist at -1).
absl::StatusOr<std::optional<NoiseSpec>> CalibrateLaplaceRdp(
    const LogSensitivity& sens, const RenyiBudget& budget);

// Biased Gaussian mechanism for (epsilon, delta)-DP with
// c^2 = 2 log(1.25 / delta): variance = c^2 sens^2 / epsilon^2, mean =
// variance / 2.
absl::StatusOr<NoiseSpec> CalibrateGaussianApproxDp(const LogSensitivity& sens,
                                                    double epsilon,
                                                    double delta);

// Biased Laplace mechanism for pure epsilon-DP: scale sens / epsilon, mean
// -log(1 - scale^2). Requires epsilon > sens; otherwise returns
// FailedPrecondition (mechanism undefined), distinct from InvalidArgument.
absl::StatusOr<NoiseSpec> CalibrateLaplacePureDp(const LogSensitivity& sens,
                                                 double epsilon);

// Dispatches on `kind`. The identity kind ignores the sensitivity and is only
// private when the sensitivity is zero; it is recorded under `budget` so that
// control runs share the private runs' bookkeeping.
absl::StatusOr<std::optional<NoiseSpec>> CalibrateRdp(
    MechanismKind kind, const LogSensitivity& sens, const RenyiBudget& budget);

// One draw of xi.
double SampleNoise(const NoiseSpec& spec, RandomStream& rng);

// E[exp(-xi)] in closed form.
absl::StatusOr<double> MgfAtMinusOne(const NoiseSpec& spec);

// The same distribution with its mean set to zero and no calibration.
NoiseSpec WithZeroBias(const NoiseSpec& spec);

}  // namespace evdp

#endif  // EVDP_NOISE_H_
