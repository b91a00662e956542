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

#include "evdp/noise.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/status_macros.h"

namespace evdp {
namespace {

constexpr int kMaxBracketDoublings = 2048;
constexpr int kMaxBisectionSteps = 4096;
// The bisection stops once the bracket is this narrow relative to its upper
// end, or when the midpoint can no longer be represented strictly inside.
constexpr double kBisectionRelativeWidth = 1e-15;

double LogAddExp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double LogHAlpha(double t, double sens, double alpha) {
  return LogAddExp(std::log(alpha) + (alpha - 1.0) * sens * t,
                   std::log(alpha - 1.0) - alpha * sens * t);
}

absl::Status CheckAlpha(double alpha) {
  if (!std::isfinite(alpha) || alpha <= 1.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("Rényi order alpha must be finite and > 1, got ", alpha));
  }
  return absl::OkStatus();
}

NoiseSpec IdentitySpec(PrivacyBudget budget, double sens) {
  return NoiseSpec(IdentityNoiseSpec{}, Calibration{std::move(budget), sens});
}

}  // namespace

double NoiseSpec::mean() const {
  if (const auto* g = gaussian()) return g->mean;
  if (const auto* l = laplace()) return l->mean;
  return 0.0;
}

std::string NoiseSpec::Describe() const {
  std::string out;
  if (const auto* g = gaussian()) {
    out = absl::StrFormat("gaussian(mean=%.17g, variance=%.17g)", g->mean,
                          g->variance);
  } else if (const auto* l = laplace()) {
    out = absl::StrFormat("laplace(mean=%.17g, scale=%.17g)", l->mean,
                          l->scale);
  } else {
    out = "identity";
  }
  if (calibration_.has_value()) {
    absl::StrAppend(&out, " @ ", DescribeBudget(calibration_->budget),
                    absl::StrFormat(" sens=%.17g", calibration_->log_sensitivity));
  } else {
    absl::StrAppend(&out, " (uncalibrated)");
  }
  return out;
}

std::string MechanismName(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kGaussian:
      return "gaussian";
    case MechanismKind::kLaplace:
      return "laplace";
    case MechanismKind::kIdentity:
      return "identity";
  }
  return "unknown";
}

absl::StatusOr<MechanismKind> ParseMechanismKind(const std::string& name) {
  if (name == "gaussian") return MechanismKind::kGaussian;
  if (name == "laplace") return MechanismKind::kLaplace;
  if (name == "identity") return MechanismKind::kIdentity;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown mechanism '", name, "' (expected gaussian|laplace|identity)"));
}

absl::StatusOr<NoiseSpec> CalibrateGaussianRdp(const LogSensitivity& sens,
                                               const RenyiBudget& budget) {
  if (sens.is_zero()) return IdentitySpec(budget, 0.0);
  const double delta = sens.value();
  const double variance =
      budget.alpha() * delta * delta / (2.0 * budget.epsilon());
  return NoiseSpec(GaussianNoiseSpec{variance / 2.0, variance},
                   Calibration{budget, delta});
}

absl::StatusOr<double> HAlpha(double t, const LogSensitivity& sens,
                              double alpha) {
  RETURN_IF_ERROR(CheckAlpha(alpha));
  if (!(t >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("h_alpha is defined for t >= 0, got ", t));
  }
  const double c = sens.value();
  return alpha * std::exp((alpha - 1.0) * c * t) +
         (alpha - 1.0) * std::exp(-alpha * c * t);
}

absl::StatusOr<double> InvertHAlphaLog(double log_target,
                                       const LogSensitivity& sens,
                                       double alpha) {
  RETURN_IF_ERROR(CheckAlpha(alpha));
  if (sens.is_zero()) {
    return absl::InvalidArgumentError(
        "h_alpha is constant for zero sensitivity and cannot be inverted");
  }
  const double log_min = std::log(2.0 * alpha - 1.0);
  if (std::isnan(log_target) || log_target < log_min) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "target %g is below the minimum 2*alpha-1 = %g of h_alpha",
        std::exp(log_target), 2.0 * alpha - 1.0));
  }
  if (log_target == log_min) return 0.0;
  if (!std::isfinite(log_target)) {
    return absl::InvalidArgumentError("h_alpha target must be finite");
  }

  const double c = sens.value();
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (LogHAlpha(hi, c, alpha) < log_target) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings || !std::isfinite(hi)) {
      return absl::InternalError("failed to bracket the h_alpha inverse");
    }
  }
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    if (hi - lo <= kBisectionRelativeWidth * hi) break;
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (LogHAlpha(mid, c, alpha) < log_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

absl::StatusOr<double> InvertHAlpha(double target, const LogSensitivity& sens,
                                    double alpha) {
  if (!(target > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("h_alpha target must be positive, got ", target));
  }
  return InvertHAlphaLog(std::log(target), sens, alpha);
}

absl::StatusOr<std::optional<NoiseSpec>> CalibrateLaplaceRdp(
    const LogSensitivity& sens, const RenyiBudget& budget) {
  if (sens.is_zero()) return IdentitySpec(budget, 0.0);
  const double alpha = budget.alpha();
  const double log_target =
      std::log(2.0 * alpha - 1.0) + (alpha - 1.0) * budget.epsilon();
  ASSIGN_OR_RETURN(const double t, InvertHAlphaLog(log_target, sens, alpha));
  const double scale = 1.0 / t;
  if (!(scale < 1.0)) return std::nullopt;
  const double mean = -std::log1p(-scale * scale);
  return NoiseSpec(LaplaceNoiseSpec{mean, scale},
                   Calibration{budget, sens.value()});
}

absl::StatusOr<NoiseSpec> CalibrateGaussianApproxDp(const LogSensitivity& sens,
                                                    double epsilon,
                                                    double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  ASSIGN_OR_RETURN(const ApproxDPBudget budget,
                   ApproxDPBudget::Create(epsilon, delta));
  if (sens.is_zero()) return IdentitySpec(budget, 0.0);
  const double c2 = 2.0 * std::log(1.25 / delta);
  const double variance =
      c2 * sens.value() * sens.value() / (epsilon * epsilon);
  return NoiseSpec(GaussianNoiseSpec{variance / 2.0, variance},
                   Calibration{budget, sens.value()});
}

absl::StatusOr<NoiseSpec> CalibrateLaplacePureDp(const LogSensitivity& sens,
                                                 double epsilon) {
  ASSIGN_OR_RETURN(const ApproxDPBudget budget,
                   ApproxDPBudget::Create(epsilon, 0.0));
  if (sens.is_zero()) return IdentitySpec(budget, 0.0);
  if (!(epsilon > sens.value())) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "biased Laplace (pure DP) needs epsilon > log-sensitivity; got "
        "epsilon=%g, sensitivity=%g",
        epsilon, sens.value()));
  }
  const double scale = sens.value() / epsilon;
  return NoiseSpec(LaplaceNoiseSpec{-std::log1p(-scale * scale), scale},
                   Calibration{budget, sens.value()});
}

absl::StatusOr<std::optional<NoiseSpec>> CalibrateRdp(
    MechanismKind kind, const LogSensitivity& sens, const RenyiBudget& budget) {
  switch (kind) {
    case MechanismKind::kGaussian: {
      ASSIGN_OR_RETURN(NoiseSpec spec, CalibrateGaussianRdp(sens, budget));
      return std::optional<NoiseSpec>(std::move(spec));
    }
    case MechanismKind::kLaplace:
      return CalibrateLaplaceRdp(sens, budget);
    case MechanismKind::kIdentity:
      return std::optional<NoiseSpec>(IdentitySpec(budget, sens.value()));
  }
  return absl::InvalidArgumentError("unknown mechanism kind");
}

double SampleNoise(const NoiseSpec& spec, RandomStream& rng) {
  if (const auto* g = spec.gaussian()) {
    return g->mean + std::sqrt(g->variance) * rng.StandardNormal();
  }
  if (const auto* l = spec.laplace()) {
    return l->mean + l->scale * rng.StandardLaplace();
  }
  return 0.0;
}

absl::StatusOr<double> MgfAtMinusOne(const NoiseSpec& spec) {
  if (const auto* g = spec.gaussian()) {
    return std::exp(-g->mean + g->variance / 2.0);
  }
  if (const auto* l = spec.laplace()) {
    if (!(l->scale < 1.0)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "Laplace MGF at -1 requires scale < 1, got ", l->scale));
    }
    return std::exp(-l->mean) / (1.0 - l->scale * l->scale);
  }
  return 1.0;
}

NoiseSpec WithZeroBias(const NoiseSpec& spec) {
  if (const auto* g = spec.gaussian()) {
    return NoiseSpec(GaussianNoiseSpec{0.0, g->variance});
  }
  if (const auto* l = spec.laplace()) {
    return NoiseSpec(LaplaceNoiseSpec{0.0, l->scale});
  }
  return NoiseSpec(IdentityNoiseSpec{});
}

}  // namespace evdp
