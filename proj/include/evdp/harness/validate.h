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

#ifndef EVDP_HARNESS_VALIDATE_H_
#define EVDP_HARNESS_VALIDATE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "evdp/harness/csv.h"
#include "evdp/noise.h"
#include "evdp/privacy.h"
#include "evdp/random.h"

namespace evdp::harness {

// A calibrated noise spec together with the inputs that produced it.
struct GridSpec {
  std::string label;
  MechanismKind kind;
  double sensitivity;
  // Set for Rényi calibrations; empty for approximate and pure DP.
  std::optional<RenyiBudget> rdp;
  NoiseSpec spec;
};

// Rényi orders {2, 10, 50}, epsilons {0.01, 0.1, 0.5, 1, 2, 10} and
// log-sensitivities {0.01, 0.05, 0.1, 0.5, 1}, calibrated with every
// mechanism that is defined there: Gaussian RDP, Laplace RDP, Gaussian
// approximate DP at delta = 1e-5 and Laplace pure DP. Gaussian specs with
// variance above kMaxGridVariance are left out because a Monte Carlo mean of
// a lognormal with larger variance is not resolvable with 10^6 draws.
inline constexpr double kMaxGridVariance = 8.0;
inline constexpr double kGridDelta = 1e-5;
std::vector<GridSpec> StandardSpecGrid();

struct MonteCarloEstimate {
  double mean;
  double standard_error;
};

// Estimates E[exp(-xi)] from `draws` draws of the noise, taken as antithetic
// pairs (xi, 2*mean - xi). The standard error is that of the pair averages.
MonteCarloEstimate MonteCarloMgf(const NoiseSpec& spec, int64_t draws,
                                 RandomStream& rng);

struct ValidateOptions {
  uint64_t seed = 1;
  // Replaces every calibrated spec with its zero-bias variant, a negative
  // control that must make the bias checks fail.
  bool inject_zero_bias = false;
  int threads = 0;
};

struct PropertyResult {
  std::string module;
  std::string property;
  bool passed;
  std::string observed;
};

struct PropertyInfo {
  std::string module;
  std::string property;
};

// Every registered property, in report order.
std::vector<PropertyInfo> RegisteredProperties();

std::vector<PropertyResult> RunValidation(const ValidateOptions& options);

CsvTable ValidationTable(const std::vector<PropertyResult>& results);

}  // namespace evdp::harness

#endif  // EVDP_HARNESS_VALIDATE_H_
