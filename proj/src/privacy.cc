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

#include "evdp/privacy.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/status_macros.h"

namespace evdp {
namespace {

absl::Status CheckFinite(double value, absl::string_view name) {
  if (!std::isfinite(value)) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, " must be finite, got ", value));
  }
  return absl::OkStatus();
}

absl::Status CheckRenyiOrder(double alpha) {
  RETURN_IF_ERROR(CheckFinite(alpha, "Rényi order alpha"));
  if (alpha <= 1.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("Rényi order alpha must be > 1, got ", alpha));
  }
  return absl::OkStatus();
}

// log(exp(a) + exp(b)) without overflow.
double LogAddExp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == -HUGE_VAL) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

absl::StatusOr<RenyiBudget> RenyiBudget::Create(double alpha, double epsilon) {
  RETURN_IF_ERROR(CheckRenyiOrder(alpha));
  RETURN_IF_ERROR(CheckFinite(epsilon, "epsilon"));
  if (epsilon <= 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be > 0, got ", epsilon));
  }
  return RenyiBudget(alpha, epsilon);
}

absl::StatusOr<ApproxDPBudget> ApproxDPBudget::Create(double epsilon,
                                                      double delta) {
  RETURN_IF_ERROR(CheckFinite(epsilon, "epsilon"));
  RETURN_IF_ERROR(CheckFinite(delta, "delta"));
  if (epsilon <= 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be > 0, got ", epsilon));
  }
  if (delta < 0.0 || delta >= 1.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in [0, 1), got ", delta));
  }
  return ApproxDPBudget(epsilon, delta);
}

std::string DescribeBudget(const PrivacyBudget& budget) {
  if (const auto* rdp = std::get_if<RenyiBudget>(&budget)) {
    return absl::StrFormat("rdp(alpha=%g, epsilon=%g)", rdp->alpha(),
                           rdp->epsilon());
  }
  const auto& dp = std::get<ApproxDPBudget>(budget);
  return absl::StrFormat("dp(epsilon=%g, delta=%g)", dp.epsilon(), dp.delta());
}

absl::StatusOr<LogSensitivity> LogSensitivity::Create(double value) {
  RETURN_IF_ERROR(CheckFinite(value, "log-sensitivity"));
  if (value < 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("log-sensitivity must be >= 0, got ", value));
  }
  return LogSensitivity(value);
}

absl::StatusOr<double> RenyiDivergenceGaussian(double shift, double variance,
                                               double alpha) {
  RETURN_IF_ERROR(CheckFinite(shift, "shift"));
  RETURN_IF_ERROR(CheckFinite(variance, "variance"));
  RETURN_IF_ERROR(CheckRenyiOrder(alpha));
  if (variance <= 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("variance must be > 0, got ", variance));
  }
  return alpha * shift * shift / (2.0 * variance);
}

absl::StatusOr<double> RenyiDivergenceLaplace(double shift, double scale,
                                              double alpha) {
  RETURN_IF_ERROR(CheckFinite(shift, "shift"));
  RETURN_IF_ERROR(CheckFinite(scale, "scale"));
  RETURN_IF_ERROR(CheckRenyiOrder(alpha));
  if (scale <= 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("scale must be > 0, got ", scale));
  }
  const double x = std::abs(shift) / scale;
  const double denom = 2.0 * alpha - 1.0;
  double log_integral;
  if ((alpha - 1.0) * x < 1.0) {
    // Near zero shift both exponentials are close to one; expm1 keeps the
    // O(x^2) excess over one accurate.
    const double excess = (alpha * std::expm1((alpha - 1.0) * x) +
                           (alpha - 1.0) * std::expm1(-alpha * x)) /
                          denom;
    log_integral = std::log1p(excess);
  } else {
    log_integral = LogAddExp(std::log(alpha / denom) + (alpha - 1.0) * x,
                             std::log((alpha - 1.0) / denom) - alpha * x);
  }
  return std::max(0.0, log_integral / (alpha - 1.0));
}

absl::StatusOr<ApproxDPBudget> RdpToApproxDp(const RenyiBudget& budget,
                                             double delta) {
  RETURN_IF_ERROR(CheckFinite(delta, "delta"));
  if (delta <= 0.0 || delta >= 1.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  const double epsilon =
      budget.epsilon() + std::log(1.0 / delta) / (budget.alpha() - 1.0);
  return ApproxDPBudget::Create(epsilon, delta);
}

absl::StatusOr<RenyiBudget> SplitBudget(const RenyiBudget& budget, int k) {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("budget split count must be >= 1, got ", k));
  }
  return RenyiBudget::Create(budget.alpha(), budget.epsilon() / k);
}

absl::StatusOr<BudgetLedger> BudgetLedger::Create(double alpha) {
  RETURN_IF_ERROR(CheckRenyiOrder(alpha));
  return BudgetLedger(alpha);
}

double BudgetLedger::spent() const {
  // Neumaier summation.
  double sum = 0.0;
  double compensation = 0.0;
  for (const LedgerEntry& entry : entries_) {
    const double t = sum + entry.epsilon;
    if (std::abs(sum) >= std::abs(entry.epsilon)) {
      compensation += (sum - t) + entry.epsilon;
    } else {
      compensation += (entry.epsilon - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

absl::StatusOr<BudgetLedger> ComposeLedger(const BudgetLedger& ledger,
                                           std::string label,
                                           const RenyiBudget& release) {
  if (release.alpha() != ledger.alpha()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cannot compose a release at Rényi order %g into a ledger at order %g",
        release.alpha(), ledger.alpha()));
  }
  BudgetLedger next = ledger;
  next.entries_.push_back(LedgerEntry{std::move(label), release.epsilon()});
  return next;
}

}  // namespace evdp
