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

#include "evdp/monitor.h"

#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/status_macros.h"

namespace evdp {

absl::Status ValidateMonitorConfig(const MonitorConfig& config) {
  if (!(config.safety_threshold > 0.0 && config.safety_threshold < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "safety threshold must lie in (0, 1), got ", config.safety_threshold));
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in (0, 1), got ", config.alpha));
  }
  if (config.batch_size < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch size must be >= 1, got ", config.batch_size));
  }
  if (!(config.c > 0.0 && config.c < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("betting constant c must lie in (0, 1), got ", config.c));
  }
  if (config.atoms < 1) {
    return absl::InvalidArgumentError("prior needs at least one atom");
  }
  return absl::OkStatus();
}

absl::StatusOr<MonitorState> MonitorState::Create(const MonitorConfig& config) {
  RETURN_IF_ERROR(ValidateMonitorConfig(config));
  ASSIGN_OR_RETURN(
      BettingPrior prior,
      MakeOneSidedPrior(config.c, config.safety_threshold, config.atoms));
  ASSIGN_OR_RETURN(const LogSensitivity sensitivity,
                   LogSensitivityBound(prior, config.safety_threshold));
  ASSIGN_OR_RETURN(
      std::optional<NoiseSpec> noise,
      CalibrateRdp(config.mechanism, sensitivity, config.batch_budget));
  if (!noise.has_value()) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "the biased Laplace mechanism is undefined at Rényi order %g with "
        "batch epsilon %g (log-sensitivity %g); use the Gaussian mechanism "
        "instead",
        config.batch_budget.alpha(), config.batch_budget.epsilon(),
        sensitivity.value()));
  }
  ASSIGN_OR_RETURN(BudgetLedger ledger,
                   BudgetLedger::Create(config.batch_budget.alpha()));
  return MonitorState(std::make_shared<const BettingPrior>(std::move(prior)),
                      std::move(*noise), sensitivity, std::move(ledger));
}

absl::StatusOr<MonitorState> RecordBatch(MonitorState state,
                                         const PrivateEValue& batch,
                                         double batch_log_e,
                                         const MonitorConfig& config) {
  const auto* budget = std::get_if<RenyiBudget>(&batch.budget());
  if (budget == nullptr || !(*budget == config.batch_budget)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "batch e-value released at ", DescribeBudget(batch.budget()),
        " but the monitor is configured for ",
        DescribeBudget(config.batch_budget)));
  }
  const int64_t index = state.batches_seen_;
  ASSIGN_OR_RETURN(state.ledger_,
                   ComposeLedger(state.ledger_, absl::StrCat("batch ", index),
                                 *budget));
  state.cumulative_log_e_ += batch.log_value();
  state.non_private_cumulative_log_e_ += batch_log_e;
  ++state.batches_seen_;
  if (!state.alarm_batch_.has_value() &&
      state.cumulative_log_e_ >= -std::log(config.alpha)) {
    state.alarm_batch_ = index;
  }
  state.history_.push_back(BatchRecord{
      index, batch_log_e, batch.log_value(), state.cumulative_log_e_,
      state.non_private_cumulative_log_e_, state.alarmed()});
  return state;
}

absl::StatusOr<MonitorState> Ingest(MonitorState state,
                                    absl::Span<const double> losses,
                                    const MonitorConfig& config,
                                    RandomStream& rng) {
  for (size_t i = 0; i < losses.size(); ++i) {
    if (!(losses[i] >= 0.0 && losses[i] <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "loss at index %d is %g, outside [0, 1]", i, losses[i]));
    }
  }
  for (double loss : losses) {
    state.pending_.push_back(loss);
    if (static_cast<int>(state.pending_.size()) < config.batch_size) continue;
    ASSIGN_OR_RETURN(
        MeanEValueState batch_state,
        StateFromData(state.prior_, config.safety_threshold, state.pending_));
    state.pending_.clear();
    const EValue raw = EValueOf(batch_state);
    ASSIGN_OR_RETURN(PrivateEValue released,
                     Privatize(raw, state.noise_, rng));
    ASSIGN_OR_RETURN(state, RecordBatch(std::move(state), released,
                                        raw.log_value(), config));
  }
  return state;
}

absl::StatusOr<double> AlarmThreshold(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in (0, 1), got ", alpha));
  }
  return 1.0 / alpha;
}

}  // namespace evdp
