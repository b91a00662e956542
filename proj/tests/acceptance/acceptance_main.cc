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

// Acceptance checks. Each criterion prints one PASS or FAIL line with the
// measured quantities and its runtime against the allowed limit. Pass
// criterion numbers as arguments to run a subset; no arguments runs all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "evdp/confidence.h"
#include "evdp/conformal.h"
#include "evdp/harness/synthetic.h"
#include "evdp/mean_evalue.h"
#include "evdp/monitor.h"
#include "evdp/noise.h"
#include "evdp/privacy.h"
#include "evdp/random.h"

namespace evdp {
namespace {

constexpr uint64_t kSeed = 20260;

struct Outcome {
  bool passed;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

template <typename T>
T Must(absl::StatusOr<T> value, const char* what) {
  if (!value.ok()) {
    std::fprintf(stderr, "%s: %s\n", what,
                 std::string(value.status().message()).c_str());
    std::abort();
  }
  return *std::move(value);
}

double LogUniform(RandomStream& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.Uniform() * (std::log(hi) - std::log(lo)));
}

// D_alpha(Lap(0, b) || Lap(shift, b)), evaluated independently of the library.
double OracleLaplaceDivergence(double shift, double scale, double alpha) {
  const double t = shift / scale;
  const double a = std::log(alpha / (2 * alpha - 1)) + (alpha - 1) * t;
  const double b = std::log((alpha - 1) / (2 * alpha - 1)) - alpha * t;
  const double m = std::max(a, b);
  return (m + std::log(std::exp(a - m) + std::exp(b - m))) / (alpha - 1);
}

double OracleGaussianDivergence(double shift, double variance, double alpha) {
  return alpha * shift * shift / (2 * variance);
}

// ---------------------------------------------------------------------------
// Calibrated mechanism grid shared by criteria 1, 2 and 10.

struct GridEntry {
  std::string label;
  double alpha;
  double epsilon;
  double sensitivity;
  NoiseSpec spec;
};

const std::vector<double> kAlphas = {2, 10, 50};
const std::vector<double> kEpsilons = {0.01, 0.1, 0.5, 1, 2, 10};
const std::vector<double> kSensitivities = {0.01, 0.05, 0.1, 0.5, 1};

// Every calibrated Rényi spec on the grid. Monte Carlo checks keep only
// variances up to `max_variance`, beyond which e^{-xi} is too heavy-tailed
// for a standard error from 10^6 draws to mean anything.
std::vector<GridEntry> RdpGrid(double max_variance) {
  std::vector<GridEntry> grid;
  for (double alpha : kAlphas) {
    for (double epsilon : kEpsilons) {
      for (double delta : kSensitivities) {
        const LogSensitivity sens =
            Must(LogSensitivity::Create(delta), "sensitivity");
        const RenyiBudget budget =
            Must(RenyiBudget::Create(alpha, epsilon), "budget");
        const NoiseSpec gaussian =
            Must(CalibrateGaussianRdp(sens, budget), "gaussian");
        if (gaussian.gaussian()->variance <= max_variance) {
          grid.push_back({absl::StrFormat("gaussian a=%g e=%g d=%g", alpha,
                                          epsilon, delta),
                          alpha, epsilon, delta, gaussian});
        }
        const std::optional<NoiseSpec> laplace =
            Must(CalibrateLaplaceRdp(sens, budget), "laplace");
        if (laplace.has_value() &&
            2 * laplace->laplace()->scale * laplace->laplace()->scale <=
                max_variance) {
          grid.push_back({absl::StrFormat("laplace a=%g e=%g d=%g", alpha,
                                          epsilon, delta),
                          alpha, epsilon, delta, *laplace});
        }
      }
    }
  }
  return grid;
}

struct Estimate {
  double mean;
  double standard_error;
};

// E[e^{-xi}] from `draws` samples taken as antithetic pairs (xi, 2 mu - xi),
// both distributions being symmetric about mu. The standard error comes from
// the pair averages.
Estimate MonteCarloMgf(const NoiseSpec& spec, int draws, RandomStream& rng) {
  const double mu = spec.mean();
  const int pairs = draws / 2;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const double xi = SampleNoise(spec, rng);
    const double v = 0.5 * (std::exp(-xi) + std::exp(-(2 * mu - xi)));
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / pairs;
  const double var = std::max(0.0, sum_sq / pairs - mean * mean);
  return {mean, std::sqrt(var / (pairs - 1))};
}

// ---------------------------------------------------------------------------

Outcome MechanismValidity() {
  const std::vector<GridEntry> grid = RdpGrid(8.0);
  double worst_closed = 0.0;
  double worst_z = -HUGE_VAL;
  std::string worst_label;
  int failures = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double closed = Must(MgfAtMinusOne(grid[i].spec), "mgf");
    worst_closed = std::max(worst_closed, closed);
    RandomStream rng = RandomStream::Derive(kSeed, {1, i});
    const Estimate est = MonteCarloMgf(grid[i].spec, 1000000, rng);
    const double z = (est.mean - 1.0) / est.standard_error;
    if (z > worst_z) {
      worst_z = z;
      worst_label = grid[i].label;
    }
    if (closed > 1.0 + 1e-12 || est.mean > 1.0 + 4 * est.standard_error) {
      ++failures;
    }
  }
  const bool passed = grid.size() >= 20 && failures == 0;
  return {passed,
          absl::StrFormat("%d specs, %d failing; max closed-form mgf %.15g; "
                          "max Monte Carlo (mean - 1) / SE %.3g (%s)",
                          grid.size(), failures, worst_closed, worst_z,
                          worst_label)};
}

Outcome PrivacyTightness() {
  const std::vector<GridEntry> grid = RdpGrid(HUGE_VAL);
  double worst_library = 0.0;
  double worst_oracle = 0.0;
  for (const GridEntry& e : grid) {
    double library;
    double oracle;
    if (const auto* g = e.spec.gaussian()) {
      library = Must(RenyiDivergenceGaussian(e.sensitivity, g->variance,
                                             e.alpha),
                     "gaussian divergence");
      oracle = OracleGaussianDivergence(e.sensitivity, g->variance, e.alpha);
    } else {
      const double b = e.spec.laplace()->scale;
      library = Must(RenyiDivergenceLaplace(e.sensitivity, b, e.alpha),
                     "laplace divergence");
      oracle = OracleLaplaceDivergence(e.sensitivity, b, e.alpha);
    }
    worst_library = std::max(worst_library, std::abs(library - e.epsilon));
    worst_oracle = std::max(worst_oracle, std::abs(oracle - e.epsilon));
  }
  const bool passed = worst_library <= 1e-9 && worst_oracle <= 1e-9;
  return {passed, absl::StrFormat("%d specs; max |divergence - epsilon| %.3g "
                                  "(library), %.3g (independent formula)",
                                  grid.size(), worst_library, worst_oracle)};
}

// Scale b with D_alpha(Lap(0, b) || Lap(shift, b)) = epsilon, by bisection on
// log b. The divergence decreases in b.
double OracleLaplaceScale(double shift, double alpha, double epsilon) {
  double lo = std::log(1e-12);
  double hi = std::log(1e12);
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (OracleLaplaceDivergence(shift, std::exp(mid), alpha) > epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

Outcome LaplaceFrontier() {
  RandomStream rng = RandomStream::Derive(kSeed, {3});
  int disagreements = 0;
  int undefined = 0;
  for (int i = 0; i < 1000; ++i) {
    const double alpha = 1.0 + LogUniform(rng, 0.1, 100.0);
    const double epsilon = LogUniform(rng, 1e-3, 100.0);
    const double delta = LogUniform(rng, 1e-3, 10.0);
    const bool oracle_undefined =
        OracleLaplaceScale(delta, alpha, epsilon) >= 1.0;
    const std::optional<NoiseSpec> spec = Must(
        CalibrateLaplaceRdp(Must(LogSensitivity::Create(delta), "sens"),
                            Must(RenyiBudget::Create(alpha, epsilon), "b")),
        "laplace");
    if (oracle_undefined) ++undefined;
    if (oracle_undefined != !spec.has_value()) ++disagreements;
  }
  return {disagreements == 0,
          absl::StrFormat("1000 triples, %d undefined by the oracle, %d "
                          "disagreements",
                          undefined, disagreements)};
}

struct RandomInstance {
  std::shared_ptr<const BettingPrior> prior;
  double theta;
  std::vector<double> data;
};

RandomInstance DrawInstance(RandomStream& rng, int max_atoms, int max_n) {
  RandomInstance out;
  out.theta = 0.05 + 0.9 * rng.Uniform();
  const double lo = -0.95 / (1.0 - out.theta);
  const double hi = 0.95 / out.theta;
  const int k = 1 + static_cast<int>(rng.Uniform() * max_atoms);
  BettingPrior prior;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    prior.atoms.push_back(lo + (hi - lo) * rng.Uniform());
    prior.weights.push_back(0.05 + rng.Uniform());
    total += prior.weights.back();
  }
  for (double& w : prior.weights) w /= total;
  prior.lambda_inf = lo;
  prior.lambda_sup = hi;
  out.prior = std::make_shared<const BettingPrior>(std::move(prior));
  const int n = 1 + static_cast<int>(rng.Uniform() * max_n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    out.data.push_back(u < 0.2 ? 0.0 : u > 0.8 ? 1.0 : rng.Uniform());
  }
  return out;
}

Outcome PortfolioCorrectness() {
  RandomStream rng = RandomStream::Derive(kSeed, {4});
  double worst_mixture = 0.0;
  double worst_product = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const RandomInstance inst = DrawInstance(rng, 16, 20);
    MeanEValueState state =
        Must(MeanEValueState::Create(inst.prior, inst.theta), "state");
    long double log_product = 0.0L;
    for (double y : inst.data) {
      const long double bet = BettingFraction(state);
      log_product += std::log1p(bet * (y - inst.theta));
      if (!state.Observe(y).ok()) std::abort();
    }
    long double mixture = 0.0L;
    for (size_t k = 0; k < inst.prior->atoms.size(); ++k) {
      long double wealth = 1.0L;
      for (double y : inst.data) {
        wealth *= 1.0L + static_cast<long double>(inst.prior->atoms[k]) *
                             (y - inst.theta);
      }
      mixture += inst.prior->weights[k] * wealth;
    }
    const long double library = EValueOf(state).log_value();
    worst_mixture = std::max(
        worst_mixture,
        static_cast<double>(std::abs(std::expm1(library - std::log(mixture)))));
    worst_product = std::max(
        worst_product,
        static_cast<double>(std::abs(std::expm1(library - log_product))));
  }
  // Observations are fed one at a time in the given order.
  auto sequential = [](const RandomInstance& inst) {
    MeanEValueState state =
        Must(MeanEValueState::Create(inst.prior, inst.theta), "state");
    for (double y : inst.data) {
      if (!state.Observe(y).ok()) std::abort();
    }
    return EValueOf(state).log_value();
  };
  double worst_permutation = 0.0;
  for (int i = 0; i < 1000; ++i) {
    RandomInstance inst = DrawInstance(rng, 16, 20);
    const double before = sequential(inst);
    for (size_t j = inst.data.size(); j > 1; --j) {
      const size_t swap = static_cast<size_t>(rng.Uniform() * j);
      std::swap(inst.data[j - 1], inst.data[std::min(swap, j - 1)]);
    }
    const double after = sequential(inst);
    worst_permutation =
        std::max(worst_permutation, std::abs(std::expm1(after - before)));
  }
  const bool passed = worst_mixture <= 1e-10 && worst_product <= 1e-10 &&
                      worst_permutation <= 1e-12;
  return {passed,
          absl::StrFormat("max relative gap: library vs direct mixture %.3g, "
                          "library vs predictable product %.3g (limit 1e-10); "
                          "permutation %.3g (limit 1e-12)",
                          worst_mixture, worst_product, worst_permutation)};
}

double LogE(const std::shared_ptr<const BettingPrior>& prior, double theta,
            const std::vector<double>& data) {
  return EValueOf(Must(StateFromData(prior, theta, data), "state"))
      .log_value();
}

Outcome BoundsHold() {
  RandomStream rng = RandomStream::Derive(kSeed, {5});
  // Add/remove sensitivity of the mean e-value.
  int mean_violations = 0;
  double mean_ratio = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double theta = 0.02 + 0.96 * rng.Uniform();
    const double lambda_inf = -0.99 / (1.0 - theta) * rng.Uniform();
    const double lambda_sup = 0.99 / theta * rng.Uniform();
    const int atoms = 1 + static_cast<int>(rng.Uniform() * 32);
    auto prior = std::make_shared<const BettingPrior>(Must(
        MakeUniformPrior(lambda_inf, lambda_sup, atoms, theta), "prior"));
    std::vector<double> data;
    const int n = static_cast<int>(rng.Uniform() * 40);
    for (int j = 0; j < n; ++j) data.push_back(rng.Uniform());
    std::vector<double> neighbor = data;
    if (i % 2 == 0 || data.empty()) {
      const double u = rng.Uniform();
      neighbor.push_back(u < 0.3 ? 0.0 : u > 0.7 ? 1.0 : rng.Uniform());
    } else {
      neighbor.erase(neighbor.begin() +
                     static_cast<int>(rng.Uniform() * neighbor.size()));
    }
    const double bound =
        Must(LogSensitivityBound(*prior, theta), "sensitivity").value();
    const double diff =
        std::abs(LogE(prior, theta, data) - LogE(prior, theta, neighbor));
    if (diff > bound + 1e-12) ++mean_violations;
    if (bound > 0.0) mean_ratio = std::max(mean_ratio, diff / bound);
  }
  // Add/remove sensitivity of the exchangeability e-value.
  int exch_violations = 0;
  double exch_ratio = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = LogUniform(rng, 0.1, 10.0);
    const double b = a * LogUniform(rng, 1.0, 100.0);
    const int n = 1 + static_cast<int>(rng.Uniform() * 200);
    std::vector<double> small(n);
    for (double& s : small) {
      const double u = rng.Uniform();
      s = u < 0.2 ? a : u > 0.8 ? b : a + (b - a) * rng.Uniform();
    }
    std::vector<double> big = small;
    big.push_back(rng.Uniform() < 0.5 ? a : b);
    const double test = rng.Uniform() < 0.5 ? a + (b - a) * rng.Uniform()
                                            : (rng.Uniform() < 0.5 ? a : b);
    const double bound = Must(ExchSensitivity(a, b, n), "exch bound").value();
    const double e_small =
        Must(ExchEValue(Must(CalibrationScores::FromValues(small), "c"), test),
             "exch")
            .log_value();
    const double e_big =
        Must(ExchEValue(Must(CalibrationScores::FromValues(big), "c"), test),
             "exch")
            .log_value();
    const double diff = std::abs(e_small - e_big);
    if (diff > bound + 1e-12) ++exch_violations;
    exch_ratio = std::max(exch_ratio, diff / bound);
  }
  // Lipschitz continuity of theta -> log E_theta(D), by finite differences.
  int lipschitz_violations = 0;
  int per_observation_exceeded = 0;
  double lipschitz_ratio = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double t1 = 0.02 + 0.96 * rng.Uniform();
    double t2 = 0.02 + 0.96 * rng.Uniform();
    const double theta_inf = std::min(t1, t2);
    const double theta_sup = std::max(t1, t2);
    const double lambda_inf = -0.99 / (1.0 - theta_inf) * rng.Uniform();
    const double lambda_sup = 0.99 / theta_sup * rng.Uniform();
    const int atoms = 1 + static_cast<int>(rng.Uniform() * 32);
    auto prior = std::make_shared<const BettingPrior>(
        Must(MakeUniformPriorForRange(lambda_inf, lambda_sup, atoms, theta_inf,
                                      theta_sup),
             "prior"));
    const int n = 1 + static_cast<int>(rng.Uniform() * 50);
    std::vector<double> data(n);
    for (double& y : data) {
      const double u = rng.Uniform();
      y = u < 0.25 ? 0.0 : u > 0.75 ? 1.0 : rng.Uniform();
    }
    const double h = std::max(1e-9, std::min(1e-4, theta_sup - theta_inf));
    const double theta = theta_inf + (theta_sup - theta_inf - h) * rng.Uniform();
    const double l0 = LogE(prior, theta, data);
    const double l1 = LogE(prior, std::min(theta + h, theta_sup), data);
    const double step = std::min(theta + h, theta_sup) - theta;
    if (step <= 0.0) continue;
    const double slope = std::abs(l1 - l0) / step;
    const double bound = Must(LogEValueLipschitzBound(*prior, theta_inf,
                                                      theta_sup, n),
                              "lipschitz");
    const double per_observation =
        Must(LipschitzBound(*prior, theta_inf, theta_sup), "lipschitz");
    const double rounding = 1e-13 * (1.0 + std::abs(l0)) / step;
    if (slope > bound * (1 + 1e-6) + rounding) ++lipschitz_violations;
    if (slope > per_observation * (1 + 1e-6) + rounding) {
      ++per_observation_exceeded;
    }
    if (bound > 0.0) lipschitz_ratio = std::max(lipschitz_ratio, slope / bound);
  }
  const bool passed =
      mean_violations == 0 && exch_violations == 0 && lipschitz_violations == 0;
  return {passed,
          absl::StrFormat(
              "mean e-value sensitivity: %d violations / 10000 (max ratio "
              "%.3g); exchangeability sensitivity: %d / 10000 (max ratio "
              "%.3g); Lipschitz (n times the per-observation constant): %d / "
              "10000 (max ratio %.3g); the per-observation constant alone is "
              "exceeded in %d checks",
              mean_violations, mean_ratio, exch_violations, exch_ratio,
              lipschitz_violations, lipschitz_ratio,
              per_observation_exceeded)};
}

std::vector<double> Bernoulli(int n, double p, RandomStream& rng) {
  std::vector<double> out(n);
  for (double& y : out) y = rng.Bernoulli(p) ? 1.0 : 0.0;
  return out;
}

Outcome CiCoverage() {
  const Partition partition = Must(Partition::Uniform(20), "partition");
  const PrivateCiOptions options{CiPriorConfig{},
                                 Must(RenyiBudget::Create(2, 1), "budget"),
                                 MechanismKind::kGaussian, 0.05};
  const int reps = 500;
  int covered = 0;
  double width = 0.0;
  for (int r = 0; r < reps; ++r) {
    RandomStream data_rng = RandomStream::Derive(kSeed, {6, 1, uint64_t(r)});
    RandomStream noise_rng = RandomStream::Derive(kSeed, {6, 2, uint64_t(r)});
    const PrivateCiResult result = Must(
        PrivateCi(Bernoulli(2000, 0.3, data_rng), partition, options,
                  noise_rng),
        "ci");
    if (result.private_set.Contains(0.3)) ++covered;
    width += result.private_set.width;
  }
  const double coverage = static_cast<double>(covered) / reps;
  const double floor = 0.95 - 3 * std::sqrt(0.95 * 0.05 / reps);
  return {coverage >= floor,
          absl::StrFormat("coverage %.4f over %d reps (floor %.4f); mean "
                          "width %.4f",
                          coverage, reps, floor, width / reps)};
}

Outcome CiConvergence() {
  const Partition partition = Must(Partition::Uniform(50), "partition");
  const PrivateCiOptions options{CiPriorConfig{},
                                 Must(RenyiBudget::Create(2, 10), "budget"),
                                 MechanismKind::kGaussian, 0.05};
  double gaps[2] = {0.0, 0.0};
  const int ns[2] = {1000, 100000};
  for (int s = 0; s < 20; ++s) {
    for (int i = 0; i < 2; ++i) {
      RandomStream data_rng =
          RandomStream::Derive(kSeed, {7, 1, uint64_t(i), uint64_t(s)});
      RandomStream noise_rng =
          RandomStream::Derive(kSeed, {7, 2, uint64_t(i), uint64_t(s)});
      const PrivateCiResult result =
          Must(PrivateCi(Bernoulli(ns[i], 0.3, data_rng), partition, options,
                         noise_rng),
               "ci");
      gaps[i] += (result.private_set.width - result.non_private_set.width) / 20;
    }
  }
  const bool passed = gaps[1] <= 0.25 * gaps[0];
  return {passed,
          absl::StrFormat("mean private minus non-private width: %.4g at "
                          "n=1e3, %.4g at n=1e5 (ratio limit 0.25)",
                          gaps[0], gaps[1])};
}

Outcome MonitorControl() {
  MonitorConfig config{0.5, 0.05, 128, 0.2, kDefaultPriorAtoms,
                       Must(RenyiBudget::Create(2, 0.05), "budget"),
                       MechanismKind::kGaussian};
  const int runs = 1000;
  const int batches = 50;
  int null_alarms = 0;
  int detections = 0;
  for (int r = 0; r < runs; ++r) {
    for (int shifted = 0; shifted < 2; ++shifted) {
      RandomStream data_rng =
          RandomStream::Derive(kSeed, {8, 1, uint64_t(shifted), uint64_t(r)});
      RandomStream noise_rng =
          RandomStream::Derive(kSeed, {8, 2, uint64_t(shifted), uint64_t(r)});
      std::vector<double> losses;
      losses.reserve(batches * config.batch_size);
      for (int b = 0; b < batches; ++b) {
        const double mean = shifted == 1 && b >= 20 ? 0.6 : 0.5;
        for (int i = 0; i < config.batch_size; ++i) {
          losses.push_back(data_rng.Bernoulli(mean) ? 1.0 : 0.0);
        }
      }
      MonitorState state = Must(MonitorState::Create(config), "monitor");
      state = Must(Ingest(std::move(state), losses, config, noise_rng),
                   "ingest");
      if (state.alarmed()) ++(shifted == 1 ? detections : null_alarms);
    }
  }
  const double false_alarm = static_cast<double>(null_alarms) / runs;
  const double ceiling = 0.05 + 3 * std::sqrt(0.05 * 0.95 / runs);
  const double detection = static_cast<double>(detections) / runs;
  return {false_alarm <= ceiling && detection >= 0.95,
          absl::StrFormat("null ever-alarm fraction %.4f (ceiling %.4f); "
                          "detection by batch 50 after +0.1 at batch 20: "
                          "%.4f (floor 0.95)",
                          false_alarm, ceiling, detection)};
}

struct ConformalTally {
  int predictions = 0;
  int covered = 0;
  long size_total = 0;
  bool undefined = false;
};

Outcome ConformalBehavior() {
  const harness::BetaScoreModel model;
  const ScoreQuantizer quantizer =
      Must(ScoreQuantizer::Create(50, 1.0, 100.0), "quantizer");
  const std::vector<double> epsilons = {0.1, 1.0};
  const std::vector<MechanismKind> mechanisms = {MechanismKind::kGaussian,
                                                 MechanismKind::kLaplace};
  const int reps = 200;
  const int test_points = 50;
  const int n = 1000;
  const double alpha = 0.1;
  ConformalTally non_private;
  std::vector<ConformalTally> tallies(epsilons.size() * mechanisms.size());
  for (int r = 0; r < reps; ++r) {
    RandomStream data_rng = RandomStream::Derive(kSeed, {9, 1, uint64_t(r)});
    std::vector<double> raw(n);
    for (double& s : raw) s = harness::SampleScorePair(model, data_rng).first;
    const CalibrationScores calib =
        Must(CalibrationScores::Create(quantizer, raw), "calibration");
    std::vector<std::vector<Candidate>> tests(test_points);
    for (auto& candidates : tests) {
      const auto [truth, other] = harness::SampleScorePair(model, data_rng);
      candidates = {{"1", truth}, {"0", other}};
    }
    auto tally = [&](ConformalTally& t, const std::vector<double>& log_values) {
      for (const auto& candidates : tests) {
        const PredictionSet set = Must(
            PredictSetFromLogValues(log_values, quantizer, candidates, alpha,
                                    false),
            "predict");
        ++t.predictions;
        t.size_total += set.included.size();
        if (std::find(set.included.begin(), set.included.end(), 0) !=
            set.included.end()) {
          ++t.covered;
        }
      }
    };
    RandomStream unused(0);
    const PrivateLevelEValues identity =
        Must(PrivatizeLevels(calib, quantizer,
                             Must(RenyiBudget::Create(2, 1), "budget"),
                             MechanismKind::kIdentity, unused),
             "identity");
    tally(non_private, identity.non_private_log);
    for (size_t ei = 0; ei < epsilons.size(); ++ei) {
      for (size_t mi = 0; mi < mechanisms.size(); ++mi) {
        ConformalTally& t = tallies[ei * mechanisms.size() + mi];
        RandomStream noise_rng = RandomStream::Derive(
            kSeed, {9, 2, uint64_t(r), uint64_t(ei), uint64_t(mi)});
        auto levels = PrivatizeLevels(
            calib, quantizer, Must(RenyiBudget::Create(2, epsilons[ei]), "b"),
            mechanisms[mi], noise_rng);
        if (!levels.ok()) {
          if (levels.status().code() != absl::StatusCode::kFailedPrecondition) {
            std::abort();
          }
          t.undefined = true;
          continue;
        }
        std::vector<double> log_values;
        for (const PrivateEValue& e : levels->levels) {
          log_values.push_back(e.log_value());
        }
        tally(t, log_values);
      }
    }
  }
  bool coverage_ok = true;
  bool size_ok = true;
  std::vector<std::string> parts;
  const double base_size =
      static_cast<double>(non_private.size_total) / non_private.predictions;
  parts.push_back(absl::StrFormat(
      "non-private coverage %.4f size %.3f",
      static_cast<double>(non_private.covered) / non_private.predictions,
      base_size));
  for (size_t ei = 0; ei < epsilons.size(); ++ei) {
    for (size_t mi = 0; mi < mechanisms.size(); ++mi) {
      const ConformalTally& t = tallies[ei * mechanisms.size() + mi];
      const std::string name = absl::StrFormat(
          "%s eps=%g", MechanismName(mechanisms[mi]), epsilons[ei]);
      if (t.undefined) {
        coverage_ok = false;
        if (epsilons[ei] == 1.0) size_ok = false;
        parts.push_back(name + " undefined");
        continue;
      }
      const double coverage = static_cast<double>(t.covered) / t.predictions;
      const double floor =
          (1 - alpha) - 3 * std::sqrt(alpha * (1 - alpha) / t.predictions);
      const double size = static_cast<double>(t.size_total) / t.predictions;
      if (coverage < floor) coverage_ok = false;
      if (epsilons[ei] == 1.0 && std::abs(size / base_size - 1) > 0.2) {
        size_ok = false;
      }
      parts.push_back(absl::StrFormat("%s coverage %.4f (floor %.4f) size %.3f",
                                      name, coverage, floor, size));
    }
  }
  // Laplace applicability with 500 bins.
  const ScoreQuantizer fine =
      Must(ScoreQuantizer::Create(500, 1.0, 100.0), "quantizer");
  RandomStream data_rng = RandomStream::Derive(kSeed, {9, 3});
  std::vector<double> raw(n);
  for (double& s : raw) s = harness::SampleScorePair(model, data_rng).first;
  const CalibrationScores calib =
      Must(CalibrationScores::Create(fine, raw), "calibration");
  bool laplace_ok = true;
  for (double epsilon : epsilons) {
    RandomStream noise_rng = RandomStream::Derive(kSeed, {9, 4});
    auto levels = PrivatizeLevels(calib, fine,
                                  Must(RenyiBudget::Create(2, epsilon), "b"),
                                  MechanismKind::kLaplace, noise_rng);
    const bool defined = levels.ok();
    if (!defined) laplace_ok = false;
    parts.push_back(absl::StrFormat(
        "B=500 laplace eps=%g %s (log-sensitivity %.4g, per-level epsilon %g)",
        epsilon, defined ? "defined" : "undefined",
        Must(ExchSensitivity(fine.smallest_center(), fine.largest_center(), n),
             "sens")
            .value(),
        epsilon / 500));
  }
  parts.push_back(absl::StrFormat("coverage %s, size %s, B=500 laplace %s",
                                  coverage_ok ? "ok" : "FAIL",
                                  size_ok ? "ok" : "FAIL",
                                  laplace_ok ? "ok" : "FAIL"));
  return {coverage_ok && size_ok && laplace_ok, absl::StrJoin(parts, "; ")};
}

Outcome BiasNecessity() {
  const std::vector<GridEntry> grid = RdpGrid(8.0);
  int failures = 0;
  double min_z = HUGE_VAL;
  std::string min_label;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].spec.is_identity()) continue;
    const NoiseSpec zero = WithZeroBias(grid[i].spec);
    RandomStream rng = RandomStream::Derive(kSeed, {10, i});
    const Estimate est = MonteCarloMgf(zero, 1000000, rng);
    const double z = (est.mean - 1.0) / est.standard_error;
    if (z < min_z) {
      min_z = z;
      min_label = grid[i].label;
    }
    if (!(est.mean - 1.0 > 3 * est.standard_error)) ++failures;
  }
  return {failures == 0,
          absl::StrFormat("%d zero-bias specs, %d not above 1 by 3 SE; "
                          "smallest (mean - 1) / SE %.3g (%s)",
                          grid.size(), failures, min_z, min_label)};
}

Outcome PureAndApproxDpMechanisms() {
  RandomStream rng = RandomStream::Derive(kSeed, {11});
  int wrong_rejections = 0;
  int mgf_failures = 0;
  int defined = 0;
  for (int i = 0; i < 1000; ++i) {
    const double delta = LogUniform(rng, 1e-3, 10.0);
    const double epsilon =
        i % 10 == 0 ? delta : LogUniform(rng, 1e-3, 100.0);
    const auto spec = CalibrateLaplacePureDp(
        Must(LogSensitivity::Create(delta), "sens"), epsilon);
    if (epsilon <= delta) {
      if (spec.ok() ||
          spec.status().code() != absl::StatusCode::kFailedPrecondition) {
        ++wrong_rejections;
      }
      continue;
    }
    if (!spec.ok()) {
      ++wrong_rejections;
      continue;
    }
    ++defined;
    const double b = spec->laplace()->scale;
    const double mgf = Must(MgfAtMinusOne(*spec), "mgf");
    if (!(b < 1.0) || mgf > 1.0 + 1e-12) ++mgf_failures;
  }
  // Hand values: c^2 = 2 ln(125), variance = c^2 (0.1)^2 / 1^2, mean = variance/2.
  const double variance_expected = 0.096566274746046022;
  const double mean_expected = 0.048283137373023011;
  const NoiseSpec g = Must(
      CalibrateGaussianApproxDp(Must(LogSensitivity::Create(0.1), "s"), 1.0,
                                0.01),
      "approx");
  const double var_err = std::abs(g.gaussian()->variance - variance_expected);
  const double mean_err = std::abs(g.gaussian()->mean - mean_expected);
  const bool passed = wrong_rejections == 0 && mgf_failures == 0 &&
                      var_err <= 1e-9 && mean_err <= 1e-9;
  return {passed,
          absl::StrFormat("pure-DP Laplace: %d wrong accept/reject decisions, "
                          "%d of %d defined specs violating b < 1 or mgf <= 1; "
                          "approx-DP Gaussian at (0.1, 1, 0.01): variance %.17g "
                          "(err %.3g), mean %.17g (err %.3g)",
                          wrong_rejections, mgf_failures, defined,
                          g.gaussian()->variance, var_err, g.gaussian()->mean,
                          mean_err)};
}

std::vector<Criterion> Criteria() {
  return {
      {1, "mechanism validity", 30, MechanismValidity},
      {2, "privacy tightness", 1, PrivacyTightness},
      {3, "Laplace applicability frontier", 10, LaplaceFrontier},
      {4, "universal portfolio correctness", 20, PortfolioCorrectness},
      {5, "sensitivity and Lipschitz bounds", 60, BoundsHold},
      {6, "confidence interval coverage", 300, CiCoverage},
      {7, "convergence to non-private intervals", 300, CiConvergence},
      {8, "monitor false alarms and detection", 300, MonitorControl},
      {9, "conformal coverage and set size", 300, ConformalBehavior},
      {10, "bias necessity negative control", 30, BiasNecessity},
      {11, "pure-DP Laplace and approximate-DP Gaussian", 1,
       PureAndApproxDpMechanisms},
  };
}

}  // namespace
}  // namespace evdp

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const evdp::Criterion& c : evdp::Criteria()) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    const evdp::Outcome outcome = c.run();
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    const bool in_time = seconds < c.limit_seconds;
    const bool passed = outcome.passed && in_time;
    if (!passed) ++failures;
    std::printf("%s criterion %d (%s): %s [%.2f s, limit %g s%s]\n",
                passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                outcome.detail.c_str(), seconds, c.limit_seconds,
                in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
