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

#ifndef EVDP_MONITOR_H_
#define EVDP_MONITOR_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "evdp/evalue.h"
#include "evdp/mean_evalue.h"
#include "evdp/noise.h"
#include "evdp/privacy.h"
#include "evdp/random.h"

namespace evdp {

struct MonitorConfig {
  // Null hypothesis: mean loss <= safety_threshold.
  double safety_threshold = 0.5;
  double alpha = 0.05;
  int batch_size = 128;
  // One-sided prior on [0, c / safety_threshold).
  double c = 0.2;
  int atoms = kDefaultPriorAtoms;
  // Budget of each batch release.
  RenyiBudget batch_budget;
  MechanismKind mechanism = MechanismKind::kGaussian;
};

absl::Status ValidateMonitorConfig(const MonitorConfig& config);

struct BatchRecord {
  int64_t batch_index;  // 0-based
  double batch_log_e;             // non-private
  double private_batch_log_e;
  double cumulative_log_e;        // private, running product
  double non_private_cumulative_log_e;
  bool alarmed;
};

class MonitorState {
 public:
  // Calibrates the per-batch mechanism; fails with FailedPrecondition when
  // the biased Laplace mechanism is undefined for the batch sensitivity.
  static absl::StatusOr<MonitorState> Create(const MonitorConfig& config);

  double cumulative_log_e() const { return cumulative_log_e_; }
  double non_private_cumulative_log_e() const {
    return non_private_cumulative_log_e_;
  }
  int64_t batches_seen() const { return batches_seen_; }
  // Latched: once set it stays set.
  bool alarmed() const { return alarm_batch_.has_value(); }
  std::optional<int64_t> alarm_batch() const { return alarm_batch_; }
  const std::vector<double>& pending() const { return pending_; }
  const BudgetLedger& ledger() const { return ledger_; }
  const std::vector<BatchRecord>& history() const { return history_; }
  const NoiseSpec& noise() const { return noise_; }
  const LogSensitivity& sensitivity() const { return sensitivity_; }

 private:
  friend absl::StatusOr<MonitorState> RecordBatch(MonitorState,
                                                  const PrivateEValue&,
                                                  double,
                                                  const MonitorConfig&);
  friend absl::StatusOr<MonitorState> Ingest(MonitorState,
                                             absl::Span<const double>,
                                             const MonitorConfig&,
                                             RandomStream&);
  MonitorState(std::shared_ptr<const BettingPrior> prior, NoiseSpec noise,
               LogSensitivity sensitivity, BudgetLedger ledger)
      : prior_(std::move(prior)),
        noise_(std::move(noise)),
        sensitivity_(sensitivity),
        ledger_(std::move(ledger)) {}

  std::shared_ptr<const BettingPrior> prior_;
  NoiseSpec noise_;
  LogSensitivity sensitivity_;
  BudgetLedger ledger_;
  double cumulative_log_e_ = 0.0;
  double non_private_cumulative_log_e_ = 0.0;
  int64_t batches_seen_ = 0;
  std::optional<int64_t> alarm_batch_;
  std::vector<double> pending_;
  std::vector<BatchRecord> history_;
};

// Buffers `losses` and scores every completed batch: a fresh one-sided mean
// e-value per batch, privatized and multiplied into the running total. All
// losses are checked before any is used; the error names the first bad
// index. Partial batches wait in the buffer.
absl::StatusOr<MonitorState> Ingest(MonitorState state,
                                    absl::Span<const double> losses,
                                    const MonitorConfig& config,
                                    RandomStream& rng);

// Folds in an already released batch e-value. Its budget must equal the
// configured batch budget. `batch_log_e` is the non-private value, used only
// for the non-private trajectory.
absl::StatusOr<MonitorState> RecordBatch(MonitorState state,
                                         const PrivateEValue& batch,
                                         double batch_log_e,
                                         const MonitorConfig& config);

// 1 / alpha.
absl::StatusOr<double> AlarmThreshold(double alpha);

}  // namespace evdp

#endif  // EVDP_MONITOR_H_
