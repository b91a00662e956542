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

#include "evdp/confidence.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/status_macros.h"

namespace evdp {
namespace {

absl::Status CheckLevel(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("significance level must lie in (0, 1), got ", alpha));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<Partition> Partition::Create(std::vector<double> cuts) {
  if (cuts.size() < 2) {
    return absl::InvalidArgumentError("a partition needs at least two cuts");
  }
  for (size_t i = 0; i < cuts.size(); ++i) {
    if (!std::isfinite(cuts[i])) {
      return absl::InvalidArgumentError("partition cuts must be finite");
    }
    if (i > 0 && !(cuts[i] > cuts[i - 1])) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "partition cuts must be strictly increasing (cut %d = %g follows "
          "%g)",
          i, cuts[i], cuts[i - 1]));
    }
  }
  return Partition(std::move(cuts));
}

absl::StatusOr<Partition> Partition::Uniform(int k, double lo, double hi) {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("partition needs at least one cell, got ", k));
  }
  std::vector<double> cuts(k + 1);
  for (int i = 0; i <= k; ++i) {
    cuts[i] = lo + (hi - lo) * i / k;
  }
  cuts[k] = hi;
  return Create(std::move(cuts));
}

absl::StatusOr<EValue> Deflate(const EValue& raw, double lipschitz,
                               double width) {
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Lipschitz constant must be finite and >= 0, got ", lipschitz));
  }
  if (!(width > 0.0) || !std::isfinite(width)) {
    return absl::InvalidArgumentError(
        absl::StrCat("cell width must be finite and > 0, got ", width));
  }
  if (raw.is_zero()) return raw;
  return EValue::FromLog(raw.log_value() - lipschitz * width);
}

bool ConfidenceSet::Contains(double theta) const {
  for (const Interval& interval : intervals) {
    if (theta >= interval.lo && theta <= interval.hi) return true;
  }
  return false;
}

absl::StatusOr<ConfidenceSet> BuildCiFromLogValues(
    const Partition& partition, absl::Span<const double> log_values,
    double alpha) {
  RETURN_IF_ERROR(CheckLevel(alpha));
  if (static_cast<int>(log_values.size()) != partition.cells()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "got %d cell values for a partition with %d cells", log_values.size(),
        partition.cells()));
  }
  const double log_threshold = -std::log(alpha);
  ConfidenceSet set;
  for (int j = 0; j < partition.cells(); ++j) {
    if (std::isnan(log_values[j])) {
      return absl::InvalidArgumentError(
          absl::StrCat("cell ", j, " has a NaN e-value"));
    }
    if (log_values[j] > log_threshold) continue;
    set.cells.push_back(j);
    set.width += partition.width(j);
    if (!set.intervals.empty() && set.cells.size() >= 2 &&
        set.cells[set.cells.size() - 2] == j - 1) {
      set.intervals.back().hi = partition.upper(j);
    } else {
      set.intervals.push_back(Interval{partition.lower(j), partition.upper(j)});
    }
  }
  set.empty = set.cells.empty();
  return set;
}

absl::StatusOr<ConfidenceSet> BuildCi(const Partition& partition,
                                      absl::Span<const CellEValue> cells,
                                      double alpha) {
  std::vector<std::optional<double>> by_index(partition.cells());
  for (const CellEValue& cell : cells) {
    if (cell.index < 0 || cell.index >= partition.cells()) {
      return absl::InvalidArgumentError(
          absl::StrCat("cell index ", cell.index, " is outside the partition"));
    }
    if (by_index[cell.index].has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("cell ", cell.index, " appears more than once"));
    }
    by_index[cell.index] = cell.deflated.log_value();
  }
  std::vector<double> log_values(partition.cells());
  for (int j = 0; j < partition.cells(); ++j) {
    if (!by_index[j].has_value()) {
      return absl::InvalidArgumentError(absl::StrCat("cell ", j, " is missing"));
    }
    log_values[j] = *by_index[j];
  }
  return BuildCiFromLogValues(partition, log_values, alpha);
}

namespace {

// Each atom's wealth is log-concave in theta, so its minimum over [lo, hi]
// sits at an endpoint; mixing the endpoint minima bounds the e-value at every
// theta in the cell from below.
absl::StatusOr<EValue> EndpointLowerBound(
    std::shared_ptr<const BettingPrior> prior,
    const std::map<double, int64_t>& counts, double lo, double hi) {
  ASSIGN_OR_RETURN(MeanEValueState at_lo, MeanEValueState::Create(prior, lo));
  ASSIGN_OR_RETURN(MeanEValueState at_hi, MeanEValueState::Create(prior, hi));
  for (const auto& [y, count] : counts) {
    RETURN_IF_ERROR(at_lo.ObserveRepeated(y, count));
    RETURN_IF_ERROR(at_hi.ObserveRepeated(y, count));
  }
  const std::vector<double>& a = at_lo.log_wealth();
  const std::vector<double>& b = at_hi.log_wealth();
  const std::vector<double>& w = prior->weights;
  double max_term = -HUGE_VAL;
  std::vector<double> lows(a.size());
  for (size_t k = 0; k < a.size(); ++k) {
    lows[k] = std::min(a[k], b[k]);
    if (w[k] > 0.0) max_term = std::max(max_term, lows[k]);
  }
  double sum = 0.0;
  double total = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    if (w[k] > 0.0) {
      sum += w[k] * std::exp(lows[k] - max_term);
      total += w[k];
    }
  }
  return EValue::FromLog(max_term + std::log(sum / total));
}

}  // namespace

absl::StatusOr<PrivateCiResult> PrivateCi(absl::Span<const double> data,
                                          const Partition& partition,
                                          const PrivateCiOptions& options,
                                          RandomStream& rng) {
  RETURN_IF_ERROR(CheckLevel(options.alpha));
  if (data.empty()) {
    return absl::InvalidArgumentError("confidence intervals need data");
  }
  std::map<double, int64_t> counts;
  for (size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] >= 0.0 && data[i] <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "observation %d is %g, outside [0, 1]", i, data[i]));
    }
    ++counts[data[i]];
  }
  const int64_t n = static_cast<int64_t>(data.size());
  const int k = partition.cells();
  ASSIGN_OR_RETURN(const RenyiBudget per_cell,
                   SplitBudget(options.budget, k));
  ASSIGN_OR_RETURN(BudgetLedger ledger,
                   BudgetLedger::Create(options.budget.alpha()));

  PrivateCiResult result{ConfidenceSet{}, ConfidenceSet{}, ledger, {}};
  result.cells.reserve(k);
  std::vector<double> private_log(k);
  std::vector<double> deflated_log(k);
  for (int j = 0; j < k; ++j) {
    const double lo = partition.lower(j);
    const double hi = partition.upper(j);
    const double theta = partition.midpoint(j);
    ASSIGN_OR_RETURN(
        BettingPrior prior_value,
        MakeUniformPriorForRange(options.prior.lambda_inf,
                                 options.prior.lambda_sup, options.prior.atoms,
                                 lo, hi, options.prior.margin));
    auto prior = std::make_shared<const BettingPrior>(std::move(prior_value));
    ASSIGN_OR_RETURN(MeanEValueState state,
                     MeanEValueState::Create(prior, theta));
    for (const auto& [y, count] : counts) {
      RETURN_IF_ERROR(state.ObserveRepeated(y, count));
    }
    const EValue raw = EValueOf(state);
    ASSIGN_OR_RETURN(const double per_observation,
                     LipschitzBound(*prior, lo, hi));
    ASSIGN_OR_RETURN(const LogSensitivity add_remove,
                     LogSensitivityBound(*prior, theta));
    double lipschitz = per_observation;
    double sensitivity_value = add_remove.value();
    EValue deflated = raw;
    switch (options.lipschitz) {
      case LipschitzScaling::kPerObservation: {
        ASSIGN_OR_RETURN(deflated, Deflate(raw, lipschitz, partition.width(j)));
        break;
      }
      case LipschitzScaling::kSampleSize: {
        lipschitz = static_cast<double>(n) * per_observation;
        ASSIGN_OR_RETURN(deflated, Deflate(raw, lipschitz, partition.width(j)));
        sensitivity_value += per_observation * partition.width(j);
        break;
      }
      case LipschitzScaling::kEndpoint: {
        ASSIGN_OR_RETURN(const EValue bound,
                         EndpointLowerBound(prior, counts, lo, hi));
        deflated = bound.log_value() < raw.log_value() ? bound : raw;
        lipschitz = (raw.log_value() - deflated.log_value()) /
                    partition.width(j);
        ASSIGN_OR_RETURN(const LogSensitivity at_lo,
                         LogSensitivityBound(*prior, lo));
        ASSIGN_OR_RETURN(const LogSensitivity at_hi,
                         LogSensitivityBound(*prior, hi));
        sensitivity_value = std::max(at_lo.value(), at_hi.value());
        break;
      }
    }
    ASSIGN_OR_RETURN(const LogSensitivity sensitivity,
                     LogSensitivity::Create(sensitivity_value));
    ASSIGN_OR_RETURN(std::optional<NoiseSpec> noise,
                     CalibrateRdp(options.mechanism, sensitivity, per_cell));
    if (!noise.has_value()) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "the biased Laplace mechanism is undefined at Rényi order %g with "
          "per-cell epsilon %g (cell %d, log-sensitivity %g); use the "
          "Gaussian mechanism instead",
          per_cell.alpha(), per_cell.epsilon(), j, sensitivity.value()));
    }
    ASSIGN_OR_RETURN(PrivateEValue released, Privatize(deflated, *noise, rng));
    ASSIGN_OR_RETURN(result.ledger,
                     ComposeLedger(result.ledger, absl::StrCat("cell ", j),
                                   per_cell));
    private_log[j] = released.log_value();
    deflated_log[j] = deflated.log_value();
    result.cells.push_back(PrivateCell{
        CellEValue{j, raw, deflated, lipschitz}, sensitivity,
        std::move(*noise), std::move(released)});
  }
  ASSIGN_OR_RETURN(result.private_set,
                   BuildCiFromLogValues(partition, private_log, options.alpha));
  ASSIGN_OR_RETURN(
      result.non_private_set,
      BuildCiFromLogValues(partition, deflated_log, options.alpha));
  return result;
}

}  // namespace evdp
