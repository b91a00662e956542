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

#ifndef EVDP_PRIVACY_H_
#define EVDP_PRIVACY_H_

#include <string>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"

namespace evdp {

// Rényi differential privacy parameters: order alpha > 1 and budget
// epsilon > 0 (nats).
class RenyiBudget {
 public:
  static absl::StatusOr<RenyiBudget> Create(double alpha, double epsilon);

  double alpha() const { return alpha_; }
  double epsilon() const { return epsilon_; }

  friend bool operator==(const RenyiBudget&, const RenyiBudget&) = default;

 private:
  RenyiBudget(double alpha, double epsilon)
      : alpha_(alpha), epsilon_(epsilon) {}

  double alpha_;
  double epsilon_;
};

// Classical (epsilon, delta)-differential privacy parameters.
class ApproxDPBudget {
 public:
  static absl::StatusOr<ApproxDPBudget> Create(double epsilon, double delta);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }

  friend bool operator==(const ApproxDPBudget&,
                         const ApproxDPBudget&) = default;

 private:
  ApproxDPBudget(double epsilon, double delta)
      : epsilon_(epsilon), delta_(delta) {}

  double epsilon_;
  double delta_;
};

using PrivacyBudget = std::variant<RenyiBudget, ApproxDPBudget>;

std::string DescribeBudget(const PrivacyBudget& budget);

// Upper bound on |log E(D) - log E(D')| over datasets differing in one record.
class LogSensitivity {
 public:
  static absl::StatusOr<LogSensitivity> Create(double value);
  static LogSensitivity Zero() { return LogSensitivity(0.0); }

  double value() const { return value_; }
  bool is_zero() const { return value_ == 0.0; }

 private:
  explicit LogSensitivity(double value) : value_(value) {}

  double value_;
};

// alpha * shift^2 / (2 * variance): order-alpha Rényi divergence between two
// Gaussians with common variance whose means differ by `shift`.
absl::StatusOr<double> RenyiDivergenceGaussian(double shift, double variance,
                                               double alpha);

// Order-alpha Rényi divergence between Laplace(0, scale) and
// Laplace(shift, scale). Evaluated in the log domain so that large
// (alpha - 1) * |shift| / scale does not overflow.
absl::StatusOr<double> RenyiDivergenceLaplace(double shift, double scale,
                                              double alpha);

// (alpha, epsilon)-RDP implies (epsilon + log(1/delta) / (alpha - 1), delta)-DP.
absl::StatusOr<ApproxDPBudget> RdpToApproxDp(const RenyiBudget& budget,
                                             double delta);

// The per-release budget (alpha, epsilon / k) whose k-fold composition spends
// exactly `budget`.
absl::StatusOr<RenyiBudget> SplitBudget(const RenyiBudget& budget, int k);

struct LedgerEntry {
  std::string label;
  double epsilon;
};

// Audit record of Rényi releases composed at a single fixed order.
class BudgetLedger {
 public:
  static absl::StatusOr<BudgetLedger> Create(double alpha);

  double alpha() const { return alpha_; }
  // Compensated sum of the entry budgets, so the total does not depend on
  // the order entries were composed in beyond one rounding.
  double spent() const;
  const std::vector<LedgerEntry>& entries() const { return entries_; }

 private:
  friend absl::StatusOr<BudgetLedger> ComposeLedger(const BudgetLedger&,
                                                    std::string,
                                                    const RenyiBudget&);
  explicit BudgetLedger(double alpha) : alpha_(alpha) {}

  double alpha_;
  std::vector<LedgerEntry> entries_;
};

// Records one more release. Releases at a different Rényi order than the
// ledger's are rejected rather than converted.
absl::StatusOr<BudgetLedger> ComposeLedger(const BudgetLedger& ledger,
                                           std::string label,
                                           const RenyiBudget& release);

}  // namespace evdp

#endif  // EVDP_PRIVACY_H_
