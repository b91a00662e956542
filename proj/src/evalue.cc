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

#include "evdp/evalue.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace evdp {
namespace {

double LogAddExp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == -HUGE_VAL) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

bool SameBudget(const PrivacyBudget& a, const PrivacyBudget& b) {
  return a == b;
}

}  // namespace

absl::StatusOr<EValue> EValue::Create(double value) {
  if (!std::isfinite(value) || value < 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("e-value must be finite and >= 0, got ", value));
  }
  return EValue(value == 0.0 ? -HUGE_VAL : std::log(value));
}

absl::StatusOr<EValue> EValue::FromLog(double log_value) {
  if (std::isnan(log_value) || log_value == HUGE_VAL) {
    return absl::InvalidArgumentError(
        absl::StrCat("log e-value must be < +inf, got ", log_value));
  }
  return EValue(log_value);
}

absl::StatusOr<PValue> PValue::Create(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("p-value must lie in [0, 1], got ", value));
  }
  return PValue(value);
}

absl::StatusOr<PrivateEValue> PrivatizeWithNoise(const EValue& e,
                                                 const NoiseSpec& spec,
                                                 double xi) {
  if (!spec.calibration().has_value()) {
    return absl::FailedPreconditionError(
        "cannot privatize with an uncalibrated noise spec: " +
        spec.Describe());
  }
  if (!std::isfinite(xi)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise draw must be finite, got ", xi));
  }
  const double log_value = e.is_zero() ? -HUGE_VAL : e.log_value() - xi;
  return PrivateEValue(log_value, spec.calibration()->budget, spec.Describe());
}

absl::StatusOr<PrivateEValue> Privatize(const EValue& e, const NoiseSpec& spec,
                                        RandomStream& rng) {
  if (!spec.calibration().has_value()) {
    return PrivatizeWithNoise(e, spec, 0.0);
  }
  return PrivatizeWithNoise(e, spec, SampleNoise(spec, rng));
}

absl::StatusOr<PrivateEValue> ContinueProduct(const PrivateEValue& a,
                                              const PrivateEValue& b) {
  if (!SameBudget(a.budget(), b.budget())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "optional continuation needs a common budget; got ",
        DescribeBudget(a.budget()), " and ", DescribeBudget(b.budget())));
  }
  double log_value;
  if (a.log_value() == -HUGE_VAL || b.log_value() == -HUGE_VAL) {
    log_value = -HUGE_VAL;
  } else {
    log_value = a.log_value() + b.log_value();
  }
  std::string mechanism = a.mechanism() == b.mechanism()
                              ? a.mechanism()
                              : absl::StrCat(a.mechanism(), " * ",
                                             b.mechanism());
  PrivateEValue out(log_value, a.budget(), std::move(mechanism));
  out.lineage_ = a.lineage();
  out.lineage_.insert(out.lineage_.end(), b.lineage().begin(),
                      b.lineage().end());
  out.lineage_.push_back(
      LineageRecord{CombinationKind::kProduct, DescribeBudget(out.budget())});
  return out;
}

absl::StatusOr<PrivateEValue> Average(const PrivateEValue& a,
                                      const PrivateEValue& b, double eta,
                                      bool same_data) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("averaging weight must lie in [0, 1], got ", eta));
  }
  const auto* ra = std::get_if<RenyiBudget>(&a.budget());
  const auto* rb = std::get_if<RenyiBudget>(&b.budget());
  if (ra == nullptr || rb == nullptr) {
    return absl::InvalidArgumentError(
        "averaging is only accounted for Rényi budgets");
  }
  if (ra->alpha() != rb->alpha()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cannot average e-values released at Rényi orders %g and %g",
        ra->alpha(), rb->alpha()));
  }
  const double epsilon = same_data ? ra->epsilon() + rb->epsilon()
                                   : std::max(ra->epsilon(), rb->epsilon());
  auto budget = RenyiBudget::Create(ra->alpha(), epsilon);
  if (!budget.ok()) return budget.status();

  double log_value;
  if (eta == 1.0) {
    log_value = a.log_value();
  } else if (eta == 0.0) {
    log_value = b.log_value();
  } else {
    log_value = LogAddExp(std::log(eta) + a.log_value(),
                          std::log1p(-eta) + b.log_value());
  }
  std::string mechanism =
      a.mechanism() == b.mechanism()
          ? a.mechanism()
          : absl::StrCat(a.mechanism(), " + ", b.mechanism());
  PrivateEValue out(log_value, *budget, std::move(mechanism));
  out.lineage_ = a.lineage();
  out.lineage_.insert(out.lineage_.end(), b.lineage().begin(),
                      b.lineage().end());
  out.lineage_.push_back(LineageRecord{
      same_data ? CombinationKind::kAverageSameData
                : CombinationKind::kAverageIndependent,
      DescribeBudget(out.budget())});
  return out;
}

PValue EToP(const EValue& e) {
  const double p = e.log_value() <= 0.0 ? 1.0 : std::exp(-e.log_value());
  return PValue::Create(p).value();
}

PValue EToP(const PrivateEValue& pe) {
  const double p = pe.log_value() <= 0.0 ? 1.0 : std::exp(-pe.log_value());
  return PValue::Create(p).value();
}

absl::StatusOr<double> GrowthPenalty(const NoiseSpec& spec, int n) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("sample size must be >= 1, got ", n));
  }
  return spec.mean() / n;
}

}  // namespace evdp
