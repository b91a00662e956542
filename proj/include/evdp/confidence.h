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

#ifndef EVDP_CONFIDENCE_H_
#define EVDP_CONFIDENCE_H_

#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "evdp/evalue.h"
#include "evdp/mean_evalue.h"
#include "evdp/noise.h"
#include "evdp/privacy.h"
#include "evdp/random.h"

namespace evdp {

inline constexpr double kDefaultPartitionMargin = 1e-3;

// Cuts a_0 < a_1 < ... < a_k of the parameter range. Cells are indexed
// 0..k-1; cell j is [a_j, a_{j+1}].
class Partition {
 public:
  static absl::StatusOr<Partition> Create(std::vector<double> cuts);
  // k equal cells over [lo, hi].
  static absl::StatusOr<Partition> Uniform(
      int k, double lo = kDefaultPartitionMargin,
      double hi = 1.0 - kDefaultPartitionMargin);

  int cells() const { return static_cast<int>(cuts_.size()) - 1; }
  const std::vector<double>& cuts() const { return cuts_; }
  double lower(int j) const { return cuts_[j]; }
  double upper(int j) const { return cuts_[j + 1]; }
  double width(int j) const { return cuts_[j + 1] - cuts_[j]; }
  double midpoint(int j) const { return 0.5 * (cuts_[j] + cuts_[j + 1]); }

 private:
  explicit Partition(std::vector<double> cuts) : cuts_(std::move(cuts)) {}

  std::vector<double> cuts_;
};

// raw * exp(-lipschitz * width).
absl::StatusOr<EValue> Deflate(const EValue& raw, double lipschitz,
                               double width);

struct CellEValue {
  int index;
  EValue raw;
  EValue deflated;
  double lipschitz;
};

struct Interval {
  double lo;
  double hi;
};

struct ConfidenceSet {
  std::vector<int> cells;
  // Maximal runs of adjacent included cells.
  std::vector<Interval> intervals;
  double width = 0.0;
  // Set when no cell survived. Empty sets are legal and are not patched up.
  bool empty = true;

  bool Contains(double theta) const;
};

// Keeps cell j iff its log e-value is <= log(1 / alpha). `log_values` is
// indexed by cell.
absl::StatusOr<ConfidenceSet> BuildCiFromLogValues(
    const Partition& partition, absl::Span<const double> log_values,
    double alpha);

// Same, from cell records that must cover every cell exactly once.
absl::StatusOr<ConfidenceSet> BuildCi(const Partition& partition,
                                      absl::Span<const CellEValue> cells,
                                      double alpha);

struct CiPriorConfig {
  double lambda_inf = -1.0;
  double lambda_sup = 1.0;
  int atoms = kDefaultPriorAtoms;
  double margin = kDefaultSupportMargin;
};

// How each cell's e-value is lowered to hold for every theta in the cell.
// kPerObservation deflates with the closed-form Lipschitz bound as is; the log
// e-value of n observations can change n times faster, so coverage is not
// guaranteed and degrades as n grows. kSampleSize deflates with n times that
// bound; it is valid but keeps cells near the ends of [0, 1] in the set at
// every sample size. kEndpoint replaces each atom's wealth by its smaller
// endpoint value, which is valid because each atom's log wealth is concave
// in theta; its sensitivity is the larger of the add/remove bounds at the
// two endpoints.
enum class LipschitzScaling { kPerObservation, kSampleSize, kEndpoint };

struct PrivateCiOptions {
  CiPriorConfig prior;
  RenyiBudget budget;
  MechanismKind mechanism = MechanismKind::kGaussian;
  double alpha = 0.05;
  LipschitzScaling lipschitz = LipschitzScaling::kEndpoint;
};

struct PrivateCell {
  CellEValue cell;
  // Sensitivity of the deflated log e-value: the add/remove bound at the
  // midpoint, plus the per-observation Lipschitz constant times the cell
  // width under kSampleSize since the deflation exponent then grows by that
  // much per record, or the larger endpoint bound under kEndpoint.
  LogSensitivity sensitivity;
  NoiseSpec noise;
  PrivateEValue released;
};

struct PrivateCiResult {
  ConfidenceSet private_set;
  ConfidenceSet non_private_set;
  BudgetLedger ledger;
  std::vector<PrivateCell> cells;
};

// One cell per partition piece: mean e-value at the midpoint, lowered to hold
// across the cell as selected by `lipschitz`, released at (alpha, epsilon / k). Noise is drawn
// from `rng` in cell order. Fails with FailedPrecondition when the biased
// Laplace mechanism is undefined at the per-cell budget.
absl::StatusOr<PrivateCiResult> PrivateCi(absl::Span<const double> data,
                                          const Partition& partition,
                                          const PrivateCiOptions& options,
                                          RandomStream& rng);

}  // namespace evdp

#endif  // EVDP_CONFIDENCE_H_
