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

#ifndef EVDP_EVALUE_H_
#define EVDP_EVALUE_H_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "evdp/noise.h"
#include "evdp/privacy.h"
#include "evdp/random.h"

namespace evdp {

// A nonnegative e-value. Stored as its logarithm (-inf for zero) because
// mixture e-values over 1e5 observations leave the range of a double.
class EValue {
 public:
  static absl::StatusOr<EValue> Create(double value);
  // `log_value` may be -inf (the zero e-value) but not +inf or NaN.
  static absl::StatusOr<EValue> FromLog(double log_value);
  static EValue One() { return EValue(0.0); }

  double log_value() const { return log_value_; }
  // May overflow to +inf for very large e-values; compare in log space.
  double value() const { return std::exp(log_value_); }
  bool is_zero() const { return log_value_ == -HUGE_VAL; }

 private:
  explicit EValue(double log_value) : log_value_(log_value) {}

  double log_value_;
};

class PValue {
 public:
  static absl::StatusOr<PValue> Create(double value);
  double value() const { return value_; }

 private:
  explicit PValue(double value) : value_(value) {}

  double value_;
};

enum class CombinationKind {
  kProduct,
  kAverageIndependent,
  kAverageSameData,
};

struct LineageRecord {
  CombinationKind kind;
  // Budget the result was declared at after this step.
  std::string budget;
};

// A released e-value with its privacy budget and provenance. The lineage
// lists combination steps only; a fresh release has an empty lineage.
class PrivateEValue {
 public:
  double log_value() const { return log_value_; }
  double value() const { return std::exp(log_value_); }
  const PrivacyBudget& budget() const { return budget_; }
  const std::string& mechanism() const { return mechanism_; }
  const std::vector<LineageRecord>& lineage() const { return lineage_; }

 private:
  friend absl::StatusOr<PrivateEValue> PrivatizeWithNoise(const EValue&,
                                                          const NoiseSpec&,
                                                          double);
  friend absl::StatusOr<PrivateEValue> ContinueProduct(const PrivateEValue&,
                                                       const PrivateEValue&);
  friend absl::StatusOr<PrivateEValue> Average(const PrivateEValue&,
                                               const PrivateEValue&, double,
                                               bool);
  PrivateEValue(double log_value, PrivacyBudget budget, std::string mechanism)
      : log_value_(log_value),
        budget_(std::move(budget)),
        mechanism_(std::move(mechanism)) {}

  double log_value_;
  PrivacyBudget budget_;
  std::string mechanism_;
  std::vector<LineageRecord> lineage_;
};

// e * exp(-xi) with xi drawn from `spec`. `spec` must be calibrated.
absl::StatusOr<PrivateEValue> Privatize(const EValue& e, const NoiseSpec& spec,
                                        RandomStream& rng);
// Same, with the noise draw supplied by the caller.
absl::StatusOr<PrivateEValue> PrivatizeWithNoise(const EValue& e,
                                                 const NoiseSpec& spec,
                                                 double xi);

// Product of e-values computed on independent data. The caller vouches for
// independence; budgets must be identical and are kept as is.
absl::StatusOr<PrivateEValue> ContinueProduct(const PrivateEValue& a,
                                              const PrivateEValue& b);

// eta * a + (1 - eta) * b. Both inputs need Rényi budgets at the same order.
// On independent data the result is declared at the larger of the two
// epsilons; on the same data the epsilons add.
absl::StatusOr<PrivateEValue> Average(const PrivateEValue& a,
                                      const PrivateEValue& b, double eta,
                                      bool same_data);

// min(1, 1 / e), with 1 for a zero e-value.
PValue EToP(const PrivateEValue& pe);
PValue EToP(const EValue& e);

// E[xi] / n: the drop in growth rate caused by privatization.
absl::StatusOr<double> GrowthPenalty(const NoiseSpec& spec, int n);

}  // namespace evdp

#endif  // EVDP_EVALUE_H_
