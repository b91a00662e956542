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

#ifndef EVDP_HARNESS_EXPERIMENTS_H_
#define EVDP_HARNESS_EXPERIMENTS_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "evdp/confidence.h"
#include "evdp/harness/csv.h"
#include "evdp/harness/svg.h"
#include "evdp/harness/synthetic.h"
#include "evdp/noise.h"

namespace evdp::harness {

// Marker written wherever a mechanism is undefined or a quantity has no
// meaning for the run (for example coverage on user data with no known truth).
inline constexpr char kNotAvailable[] = "N/A";

// Substream tags. Every random stream in an experiment is derived from the
// root seed through a path that starts with one of these and continues with
// the repetition and combination indices, so results do not depend on the
// number of worker threads.
enum StreamTag : uint64_t { kDataStream = 1, kNoiseStream = 2, kTestStream = 3 };

struct PlotFile {
  std::string csv;
  std::string svg;
  PlotSpec spec;
};

struct ExperimentResult {
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<PlotFile> plots;
  // One entry per (combination) for which the mechanism was undefined.
  std::vector<std::string> undefined;
};

// Writes every table under `out_dir`, then renders each plot from the CSV as
// read back from disk. Returns the paths written, in order.
absl::StatusOr<std::vector<std::string>> WriteExperiment(
    const ExperimentResult& result, const std::string& out_dir);

struct CiExperimentConfig {
  std::vector<int64_t> ns = {1000, 10000, 100000};
  int reps = 20;
  double p = 0.3;
  double alpha = 0.05;
  double renyi_alpha = 2.0;
  std::vector<double> epsilons = {0.1, 1.0, 10.0};
  std::vector<MechanismKind> mechanisms = {MechanismKind::kGaussian,
                                           MechanismKind::kLaplace};
  int cells = 50;
  LipschitzScaling lipschitz = LipschitzScaling::kEndpoint;
  // Optional CSV with a numeric column "y" in [0, 1]. When set, `ns` and `p`
  // are ignored and repetitions differ only in the privacy noise.
  std::string data_path;
  int threads = 0;
};

absl::Status ValidateCiExperimentConfig(const CiExperimentConfig& config);
absl::StatusOr<ExperimentResult> RunCiExperiment(
    const CiExperimentConfig& config, uint64_t seed);

struct MonitorExperimentConfig {
  int runs = 200;
  int batches = 50;
  int batch_size = 128;
  double threshold = 0.5;
  double alpha = 0.05;
  double c = 0.2;
  double renyi_alpha = 2.0;
  double shift = 0.1;
  int change_batch = 20;
  std::vector<double> epsilons = {0.05, 0.5, 5.0};
  std::vector<MechanismKind> mechanisms = {MechanismKind::kGaussian};
  // Optional CSV with a numeric column "loss" in [0, 1]. When set, a single
  // run monitors that stream.
  std::string losses_path;
  int threads = 0;
};

absl::Status ValidateMonitorExperimentConfig(
    const MonitorExperimentConfig& config);
absl::StatusOr<ExperimentResult> RunMonitorExperiment(
    const MonitorExperimentConfig& config, uint64_t seed);

struct ConformalExperimentConfig {
  int reps = 100;
  int n = 1000;
  int bins = 50;
  int test_points = 100;
  double alpha = 0.1;
  std::vector<double> renyi_alphas = {2.0};
  std::vector<double> epsilons = {0.1, 1.0, 10.0};
  std::vector<MechanismKind> mechanisms = {MechanismKind::kGaussian,
                                           MechanismKind::kLaplace};
  BetaScoreModel model;
  // Optional user data: a calibration CSV with column "score" and a
  // candidate CSV with columns "id", "label", "score". Both must be given
  // together; a single repetition is then run and per-candidate decisions
  // are written.
  std::string calibration_path;
  std::string candidates_path;
  int threads = 0;
};

absl::Status ValidateConformalExperimentConfig(
    const ConformalExperimentConfig& config);
absl::StatusOr<ExperimentResult> RunConformalExperiment(
    const ConformalExperimentConfig& config, uint64_t seed);

}  // namespace evdp::harness

#endif  // EVDP_HARNESS_EXPERIMENTS_H_
