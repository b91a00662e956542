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

#include "evdp/harness/validate.h"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/confidence.h"
#include "evdp/conformal.h"
#include "evdp/evalue.h"
#include "evdp/harness/experiments.h"
#include "evdp/harness/parallel.h"
#include "evdp/harness/svg.h"
#include "evdp/harness/synthetic.h"
#include "evdp/mean_evalue.h"
#include "evdp/monitor.h"
#include "evdp/status_macros.h"

namespace evdp::harness {
namespace {

constexpr uint64_t kValidateStream = 4;

struct Outcome {
  bool passed;
  std::string observed;
};

using CheckFn = absl::StatusOr<Outcome> (*)(const ValidateOptions&,
                                            RandomStream&);

struct Check {
  const char* module;
  const char* property;
  CheckFn fn;
};

double UniformIn(RandomStream& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.Uniform();
}

int IntIn(RandomStream& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.NextU64() % static_cast<uint64_t>(hi - lo + 1));
}

template <typename T>
void Shuffle(std::vector<T>& values, RandomStream& rng) {
  for (size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[rng.NextU64() % i]);
  }
}

std::vector<double> RandomUnitData(RandomStream& rng, int n) {
  std::vector<double> data(n);
  const bool binary = rng.Bernoulli(0.5);
  for (double& y : data) {
    y = binary ? (rng.Bernoulli(0.5) ? 1.0 : 0.0) : rng.Uniform();
  }
  return data;
}

double LogAddExp(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::vector<GridSpec> SpecsUnderTest(const ValidateOptions& options) {
  std::vector<GridSpec> grid = StandardSpecGrid();
  if (options.inject_zero_bias) {
    for (GridSpec& g : grid) g.spec = WithZeroBias(g.spec);
  }
  return grid;
}

double BinomialSe(double p, double trials) {
  return std::sqrt(p * (1.0 - p) / trials);
}

// ---------------------------------------------------------------------------
// privacy_core

absl::StatusOr<Outcome> LaplaceDivergenceMonotone(const ValidateOptions&,
                                                  RandomStream&) {
  double worst = 0.0;
  int points = 0;
  for (double alpha : {1.5, 2.0, 10.0, 50.0}) {
    for (double scale : {0.1, 0.5, 1.0, 2.0}) {
      double previous = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        ASSIGN_OR_RETURN(const double d,
                         RenyiDivergenceLaplace(0.01 * i, scale, alpha));
        worst = std::max(worst, previous - d);
        previous = d;
        ++points;
      }
    }
  }
  return Outcome{worst <= 0.0,
                 absl::StrFormat("largest decrease %g over %d grid points",
                                 worst, points)};
}

absl::StatusOr<Outcome> GaussianDivergenceScaling(const ValidateOptions&,
                                                  RandomStream& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double m = UniformIn(rng, 0.01, 5.0);
    const double v = UniformIn(rng, 0.1, 5.0);
    const double alpha = UniformIn(rng, 1.1, 50.0);
    const double k = UniformIn(rng, 1.0, 10.0);
    ASSIGN_OR_RETURN(const double base, RenyiDivergenceGaussian(m, v, alpha));
    ASSIGN_OR_RETURN(const double in_alpha,
                     RenyiDivergenceGaussian(m, v, k * alpha));
    ASSIGN_OR_RETURN(const double in_shift,
                     RenyiDivergenceGaussian(k * m, v, alpha));
    worst = std::max(worst, std::abs(in_alpha - k * base) / (k * base));
    worst = std::max(worst,
                     std::abs(in_shift - k * k * base) / (k * k * base));
  }
  return Outcome{worst <= 8 * DBL_EPSILON,
                 absl::StrFormat("max relative error %g (limit %g)", worst,
                                 8 * DBL_EPSILON)};
}

absl::StatusOr<Outcome> LedgerOrderIndependent(const ValidateOptions&,
                                               RandomStream& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = UniformIn(rng, 1.5, 20.0);
    std::vector<RenyiBudget> releases;
    const int count = IntIn(rng, 2, 40);
    for (int i = 0; i < count; ++i) {
      ASSIGN_OR_RETURN(RenyiBudget b,
                       RenyiBudget::Create(alpha, std::exp(UniformIn(rng, -7, 3))));
      releases.push_back(b);
    }
    auto fold = [&](const std::vector<RenyiBudget>& order)
        -> absl::StatusOr<double> {
      ASSIGN_OR_RETURN(BudgetLedger ledger, BudgetLedger::Create(alpha));
      for (const RenyiBudget& b : order) {
        ASSIGN_OR_RETURN(ledger, ComposeLedger(ledger, "release", b));
      }
      return ledger.spent();
    };
    ASSIGN_OR_RETURN(const double reference, fold(releases));
    for (int s = 0; s < 5; ++s) {
      std::vector<RenyiBudget> order = releases;
      Shuffle(order, rng);
      ASSIGN_OR_RETURN(const double spent, fold(order));
      worst = std::max(worst, std::abs(spent - reference) / reference);
    }
  }
  return Outcome{worst <= 4 * DBL_EPSILON,
                 absl::StrFormat("max relative spread of spent %g", worst)};
}

absl::StatusOr<Outcome> RdpToApproxLimit(const ValidateOptions&,
                                         RandomStream&) {
  bool ok = true;
  double last_gap = 0.0;
  for (double alpha : {2.0, 10.0, 50.0}) {
    for (double epsilon : {0.1, 1.0, 5.0}) {
      ASSIGN_OR_RETURN(const RenyiBudget budget,
                       RenyiBudget::Create(alpha, epsilon));
      double previous = HUGE_VAL;
      for (int k = 1; k <= 12; ++k) {
        ASSIGN_OR_RETURN(const ApproxDPBudget dp,
                         RdpToApproxDp(budget, 1.0 - std::pow(10.0, -k)));
        ok = ok && dp.epsilon() >= epsilon && dp.epsilon() <= previous;
        previous = dp.epsilon();
      }
      last_gap = std::max(last_gap, previous - epsilon);
    }
  }
  ok = ok && last_gap <= 1e-9;
  return Outcome{ok, absl::StrFormat("gap at delta = 1 - 1e-12 is %g",
                                     last_gap)};
}

// ---------------------------------------------------------------------------
// mechanisms

absl::StatusOr<Outcome> MgfClosedForm(const ValidateOptions& options,
                                      RandomStream&) {
  double worst = 0.0;
  const auto specs = SpecsUnderTest(options);
  for (const GridSpec& g : specs) {
    ASSIGN_OR_RETURN(const double mgf, MgfAtMinusOne(g.spec));
    worst = std::max(worst, mgf);
  }
  return Outcome{worst <= 1.0 + 1e-12,
                 absl::StrFormat("max E[exp(-xi)] = %.15g over %d specs",
                                 worst, specs.size())};
}

absl::StatusOr<Outcome> PrivacyTightness(const ValidateOptions& options,
                                         RandomStream&) {
  double worst = 0.0;
  int checked = 0;
  for (const GridSpec& g : SpecsUnderTest(options)) {
    if (!g.rdp.has_value()) continue;
    double divergence;
    if (const auto* gauss = g.spec.gaussian()) {
      ASSIGN_OR_RETURN(divergence, RenyiDivergenceGaussian(
                                       g.sensitivity, gauss->variance,
                                       g.rdp->alpha()));
    } else if (const auto* lap = g.spec.laplace()) {
      ASSIGN_OR_RETURN(divergence,
                       RenyiDivergenceLaplace(g.sensitivity, lap->scale,
                                              g.rdp->alpha()));
    } else {
      continue;
    }
    worst = std::max(worst, std::abs(divergence - g.rdp->epsilon()));
    ++checked;
  }
  return Outcome{worst <= 1e-9,
                 absl::StrFormat("max |divergence - epsilon| = %g over %d specs",
                                 worst, checked)};
}

absl::StatusOr<Outcome> HAlphaInverse(const ValidateOptions&, RandomStream&) {
  double worst = 0.0;
  int points = 0;
  for (double alpha : {1.5, 2.0, 10.0, 50.0}) {
    for (double c : {0.01, 0.1, 1.0}) {
      ASSIGN_OR_RETURN(const LogSensitivity sens, LogSensitivity::Create(c));
      for (int i = 0; i <= 200; ++i) {
        const double t = 0.5 * i;
        ASSIGN_OR_RETURN(const double h, HAlpha(t, sens, alpha));
        double back;
        if (std::isfinite(h)) {
          ASSIGN_OR_RETURN(back, InvertHAlpha(h, sens, alpha));
        } else {
          const double log_h =
              LogAddExp(std::log(alpha) + (alpha - 1.0) * c * t,
                        std::log(alpha - 1.0) - alpha * c * t);
          ASSIGN_OR_RETURN(back, InvertHAlphaLog(log_h, sens, alpha));
        }
        worst = std::max(worst, std::abs(back - t) / std::max(t, 1.0));
        ++points;
      }
    }
  }
  return Outcome{worst <= 1e-9,
                 absl::StrFormat("max relative error %g over %d points", worst,
                                 points)};
}

absl::StatusOr<Outcome> MonteCarloValidity(const ValidateOptions& options,
                                           RandomStream& rng) {
  double worst_z = -HUGE_VAL;
  std::string worst_label;
  int failures = 0;
  const auto specs = SpecsUnderTest(options);
  for (const GridSpec& g : specs) {
    const MonteCarloEstimate mc = MonteCarloMgf(g.spec, 1000000, rng);
    const double z = (mc.mean - 1.0) / mc.standard_error;
    if (mc.mean > 1.0 + 4.0 * mc.standard_error) ++failures;
    if (z > worst_z) {
      worst_z = z;
      worst_label = g.label;
    }
  }
  return Outcome{failures == 0,
                 absl::StrFormat("%d of %d specs above 1 + 4 SE; largest z = "
                                 "%.3g (%s)",
                                 failures, specs.size(), worst_z, worst_label)};
}

absl::StatusOr<Outcome> BiasNecessity(const ValidateOptions& options,
                                      RandomStream& rng) {
  int valid_failures = 0;
  int unbiased_passes = 0;
  double weakest_z = HUGE_VAL;
  const auto specs = SpecsUnderTest(options);
  for (const GridSpec& g : specs) {
    ASSIGN_OR_RETURN(const double mgf, MgfAtMinusOne(g.spec));
    if (mgf > 1.0 + 1e-12) ++valid_failures;
    const MonteCarloEstimate mc =
        MonteCarloMgf(WithZeroBias(g.spec), 1000000, rng);
    const double z = (mc.mean - 1.0) / mc.standard_error;
    weakest_z = std::min(weakest_z, z);
    if (!(z > 3.0)) ++unbiased_passes;
  }
  return Outcome{valid_failures == 0 && unbiased_passes == 0,
                 absl::StrFormat("%d specs invalid with their bias; %d "
                                 "zero-bias variants not rejected; smallest "
                                 "zero-bias z = %.3g",
                                 valid_failures, unbiased_passes, weakest_z)};
}

// ---------------------------------------------------------------------------
// evalue_core

absl::StatusOr<NoiseSpec> RdpSpec(MechanismKind kind, double sensitivity,
                                  double alpha, double epsilon) {
  ASSIGN_OR_RETURN(const LogSensitivity sens,
                   LogSensitivity::Create(sensitivity));
  ASSIGN_OR_RETURN(const RenyiBudget budget,
                   RenyiBudget::Create(alpha, epsilon));
  ASSIGN_OR_RETURN(std::optional<NoiseSpec> spec,
                   CalibrateRdp(kind, sens, budget));
  if (!spec.has_value()) {
    return absl::InternalError("validation spec unexpectedly undefined");
  }
  return *std::move(spec);
}

absl::StatusOr<Outcome> PrivatizationValidity(const ValidateOptions&,
                                              RandomStream& rng) {
  ASSIGN_OR_RETURN(const LogSensitivity sens, LogSensitivity::Create(0.5));
  std::vector<NoiseSpec> specs;
  ASSIGN_OR_RETURN(NoiseSpec gauss, RdpSpec(MechanismKind::kGaussian, 1.0, 2, 1));
  ASSIGN_OR_RETURN(NoiseSpec lap, RdpSpec(MechanismKind::kLaplace, 0.1, 2, 1));
  ASSIGN_OR_RETURN(NoiseSpec approx, CalibrateGaussianApproxDp(sens, 2.0, 1e-5));
  ASSIGN_OR_RETURN(NoiseSpec pure, CalibrateLaplacePureDp(sens, 1.0));
  specs = {gauss, lap, approx, pure};
  ASSIGN_OR_RETURN(const EValue e, EValue::Create(3.0));
  double worst_z = -HUGE_VAL;
  int failures = 0;
  for (const NoiseSpec& spec : specs) {
    constexpr int kReps = 1000000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < kReps; ++i) {
      ASSIGN_OR_RETURN(const PrivateEValue pe, Privatize(e, spec, rng));
      const double delta = pe.value() - mean;
      mean += delta / (i + 1);
      m2 += delta * (pe.value() - mean);
    }
    const double se = std::sqrt(m2 / (kReps - 1) / kReps);
    if (mean > e.value() + 4.0 * se) ++failures;
    worst_z = std::max(worst_z, (mean - e.value()) / se);
  }
  return Outcome{failures == 0,
                 absl::StrFormat("%d of 4 specs above e + 4 SE; largest z = "
                                 "%.3g",
                                 failures, worst_z)};
}

absl::StatusOr<Outcome> GrowthIdentity(const ValidateOptions&,
                                       RandomStream& rng) {
  ASSIGN_OR_RETURN(const NoiseSpec spec,
                   RdpSpec(MechanismKind::kGaussian, 0.3, 2, 1));
  int mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    ASSIGN_OR_RETURN(const EValue e, EValue::FromLog(UniformIn(rng, -50, 50)));
    const int n = IntIn(rng, 1, 1000);
    const double xi = SampleNoise(spec, rng);
    ASSIGN_OR_RETURN(const PrivateEValue pe, PrivatizeWithNoise(e, spec, xi));
    if (pe.log_value() != e.log_value() - xi) ++mismatches;
    const double growth = pe.log_value() / n;
    const double expected = e.log_value() / n - xi / n;
    worst = std::max(worst, std::abs(growth - expected) /
                                std::max(1.0, std::abs(expected)));
  }
  return Outcome{mismatches == 0 && worst <= 4 * DBL_EPSILON,
                 absl::StrFormat("%d log mismatches; max growth rounding %g",
                                 mismatches, worst)};
}

absl::StatusOr<Outcome> ContinueProductLaws(const ValidateOptions&,
                                            RandomStream& rng) {
  ASSIGN_OR_RETURN(const NoiseSpec spec,
                   RdpSpec(MechanismKind::kGaussian, 0.3, 2, 1));
  double worst = 0.0;
  bool lineage_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<PrivateEValue> parts;
    for (int i = 0; i < 3; ++i) {
      ASSIGN_OR_RETURN(const EValue e, EValue::FromLog(UniformIn(rng, -20, 20)));
      ASSIGN_OR_RETURN(PrivateEValue pe, Privatize(e, spec, rng));
      parts.push_back(std::move(pe));
    }
    ASSIGN_OR_RETURN(const PrivateEValue ab, ContinueProduct(parts[0], parts[1]));
    ASSIGN_OR_RETURN(const PrivateEValue ab_c, ContinueProduct(ab, parts[2]));
    ASSIGN_OR_RETURN(const PrivateEValue bc, ContinueProduct(parts[1], parts[2]));
    ASSIGN_OR_RETURN(const PrivateEValue a_bc, ContinueProduct(parts[0], bc));
    ASSIGN_OR_RETURN(const PrivateEValue ba, ContinueProduct(parts[1], parts[0]));
    const double scale = std::max(1.0, std::abs(ab_c.log_value()));
    worst = std::max(worst, std::abs(ab_c.log_value() - a_bc.log_value()) / scale);
    worst = std::max(worst, std::abs(ab.log_value() - ba.log_value()) / scale);
    lineage_ok = lineage_ok && parts[0].lineage().empty() &&
                 ab.lineage().size() == 1 && ab_c.lineage().size() == 2;
  }
  return Outcome{worst <= 1e-12 && lineage_ok,
                 absl::StrFormat("max log discrepancy %g; lineage %s", worst,
                                 lineage_ok ? "grows by one per fold"
                                            : "inconsistent")};
}

absl::StatusOr<Outcome> EToPMonotone(const ValidateOptions&, RandomStream&) {
  double previous = HUGE_VAL;
  int violations = 0;
  for (int i = 0; i <= 1000; ++i) {
    ASSIGN_OR_RETURN(const EValue e, EValue::FromLog(i * std::log(1e6) / 1000));
    const double p = EToP(e).value();
    if (p > previous || p > 1.0) ++violations;
    previous = p;
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d monotonicity violations on e in [1, 1e6]",
                                 violations)};
}

absl::StatusOr<Outcome> AverageInRange(const ValidateOptions&,
                                       RandomStream& rng) {
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    ASSIGN_OR_RETURN(const NoiseSpec sa,
                     RdpSpec(MechanismKind::kGaussian, 0.2, 2,
                             UniformIn(rng, 0.1, 5)));
    ASSIGN_OR_RETURN(const NoiseSpec sb,
                     RdpSpec(MechanismKind::kLaplace, 0.05, 2,
                             UniformIn(rng, 0.1, 5)));
    ASSIGN_OR_RETURN(const EValue ea, EValue::FromLog(UniformIn(rng, -10, 10)));
    ASSIGN_OR_RETURN(const EValue eb, EValue::FromLog(UniformIn(rng, -10, 10)));
    ASSIGN_OR_RETURN(const PrivateEValue a, Privatize(ea, sa, rng));
    ASSIGN_OR_RETURN(const PrivateEValue b, Privatize(eb, sb, rng));
    ASSIGN_OR_RETURN(const PrivateEValue avg,
                     Average(a, b, rng.Uniform(), rng.Bernoulli(0.5)));
    const double lo = std::min(a.value(), b.value());
    const double hi = std::max(a.value(), b.value());
    if (avg.value() < lo * (1 - 1e-12) || avg.value() > hi * (1 + 1e-12)) {
      ++violations;
    }
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d of 10000 averages outside [min, max]",
                                 violations)};
}

// ---------------------------------------------------------------------------
// mean_evalue

absl::StatusOr<BettingPrior> RandomPrior(RandomStream& rng, double theta) {
  return MakeUniformPrior(-UniformIn(rng, 0.1, 2.0), UniformIn(rng, 0.1, 2.0),
                          IntIn(rng, 1, 16), theta);
}

absl::StatusOr<Outcome> MixtureProduct(const ValidateOptions&,
                                       RandomStream& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double theta = UniformIn(rng, 0.05, 0.95);
    ASSIGN_OR_RETURN(BettingPrior prior, RandomPrior(rng, theta));
    auto shared = std::make_shared<const BettingPrior>(std::move(prior));
    const std::vector<double> data = RandomUnitData(rng, IntIn(rng, 0, 20));
    ASSIGN_OR_RETURN(const MeanEValueState mixture,
                     StateFromData(shared, theta, data));
    ASSIGN_OR_RETURN(MeanEValueState state,
                     MeanEValueState::Create(shared, theta));
    double log_product = 0.0;
    for (double y : data) {
      log_product += std::log1p(BettingFraction(state) * (y - theta));
      ASSIGN_OR_RETURN(state, Update(std::move(state), y));
    }
    worst = std::max(worst,
                     std::abs(EValueOf(mixture).log_value() - log_product));
  }
  return Outcome{worst <= 1e-10,
                 absl::StrFormat("max relative difference %g", worst)};
}

absl::StatusOr<Outcome> PermutationInvariance(const ValidateOptions&,
                                              RandomStream& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double theta = UniformIn(rng, 0.05, 0.95);
    ASSIGN_OR_RETURN(BettingPrior prior, RandomPrior(rng, theta));
    auto shared = std::make_shared<const BettingPrior>(std::move(prior));
    std::vector<double> data = RandomUnitData(rng, IntIn(rng, 1, 50));
    auto fold = [&](const std::vector<double>& order)
        -> absl::StatusOr<double> {
      ASSIGN_OR_RETURN(MeanEValueState state,
                       MeanEValueState::Create(shared, theta));
      for (double y : order) {
        ASSIGN_OR_RETURN(state, Update(std::move(state), y));
      }
      return EValueOf(state).log_value();
    };
    ASSIGN_OR_RETURN(const double reference, fold(data));
    Shuffle(data, rng);
    ASSIGN_OR_RETURN(const double shuffled, fold(data));
    worst = std::max(worst, std::abs(reference - shuffled));
  }
  return Outcome{worst <= 1e-12,
                 absl::StrFormat("max relative difference %g", worst)};
}

absl::StatusOr<Outcome> MeanSensitivity(const ValidateOptions&,
                                        RandomStream& rng) {
  int violations = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double theta = UniformIn(rng, 0.05, 0.95);
    ASSIGN_OR_RETURN(BettingPrior prior, RandomPrior(rng, theta));
    auto shared = std::make_shared<const BettingPrior>(std::move(prior));
    std::vector<double> data = RandomUnitData(rng, IntIn(rng, 1, 50));
    ASSIGN_OR_RETURN(const MeanEValueState full,
                     StateFromData(shared, theta, data));
    data.erase(data.begin() + (rng.NextU64() % data.size()));
    ASSIGN_OR_RETURN(const MeanEValueState removed,
                     StateFromData(shared, theta, data));
    ASSIGN_OR_RETURN(const LogSensitivity bound,
                     LogSensitivityBound(*shared, theta));
    const double diff = std::abs(EValueOf(full).log_value() -
                                 EValueOf(removed).log_value());
    if (diff > bound.value() + 1e-12) ++violations;
    worst_ratio = std::max(worst_ratio, diff / bound.value());
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d violations in 10000 pairs; max ratio to "
                                 "bound %.6g",
                                 violations, worst_ratio)};
}

absl::StatusOr<Outcome> MeanLipschitz(const ValidateOptions&,
                                      RandomStream& rng) {
  int violations = 0;
  double worst_scaled = 0.0;
  double worst_per_observation = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double width = UniformIn(rng, 0.02, 0.2);
    const double theta_inf = UniformIn(rng, 0.01, 0.99 - width);
    const double theta_sup = theta_inf + width;
    ASSIGN_OR_RETURN(BettingPrior prior,
                     MakeUniformPriorForRange(-1.0, 1.0, 21, theta_inf,
                                              theta_sup));
    auto shared = std::make_shared<const BettingPrior>(std::move(prior));
    const std::vector<double> data = RandomUnitData(rng, IntIn(rng, 1, 100));
    const double h = 1e-6 * width;
    const double theta = UniformIn(rng, theta_inf, theta_sup - h);
    ASSIGN_OR_RETURN(const MeanEValueState at,
                     StateFromData(shared, theta, data));
    ASSIGN_OR_RETURN(const MeanEValueState next,
                     StateFromData(shared, theta + h, data));
    const double slope =
        std::abs(EValueOf(next).log_value() - EValueOf(at).log_value()) / h;
    ASSIGN_OR_RETURN(const double bound,
                     LogEValueLipschitzBound(*shared, theta_inf, theta_sup,
                                             static_cast<int64_t>(data.size())));
    ASSIGN_OR_RETURN(const double per_observation,
                     LipschitzBound(*shared, theta_inf, theta_sup));
    if (slope > bound * (1.0 + 1e-6)) ++violations;
    worst_scaled = std::max(worst_scaled, slope / bound);
    worst_per_observation = std::max(worst_per_observation,
                                     slope / per_observation);
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d violations in 10000 checks; max ratio to "
                                 "n * L %.4g; max ratio to per-observation L "
                                 "%.4g",
                                 violations, worst_scaled,
                                 worst_per_observation)};
}

absl::StatusOr<Outcome> MeanNullValidity(const ValidateOptions&,
                                         RandomStream& rng) {
  constexpr double kTheta = 0.3;
  constexpr int kN = 200;
  constexpr int kReps = 10000;
  ASSIGN_OR_RETURN(BettingPrior prior, MakeUniformPrior(-1.0, 1.0, 101, kTheta));
  auto shared = std::make_shared<const BettingPrior>(std::move(prior));
  double mean = 0.0, m2 = 0.0;
  for (int rep = 0; rep < kReps; ++rep) {
    int64_t ones = 0;
    for (int i = 0; i < kN; ++i) ones += rng.Bernoulli(kTheta) ? 1 : 0;
    ASSIGN_OR_RETURN(MeanEValueState state,
                     MeanEValueState::Create(shared, kTheta));
    RETURN_IF_ERROR(state.ObserveRepeated(1.0, ones));
    RETURN_IF_ERROR(state.ObserveRepeated(0.0, kN - ones));
    const double v = EValueOf(state).value();
    const double delta = v - mean;
    mean += delta / (rep + 1);
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / (kReps - 1) / kReps);
  return Outcome{mean <= 1.0 + 4.0 * se,
                 absl::StrFormat("mean e-value %.5g, SE %.3g", mean, se)};
}

absl::StatusOr<Outcome> MeanEmptyState(const ValidateOptions&,
                                       RandomStream& rng) {
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double theta = UniformIn(rng, 0.05, 0.95);
    ASSIGN_OR_RETURN(BettingPrior prior, RandomPrior(rng, theta));
    ASSIGN_OR_RETURN(const MeanEValueState state,
                     MeanEValueState::Create(std::move(prior), theta));
    if (state.n() != 0 || EValueOf(state).log_value() != 0.0) ++violations;
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d of 100 empty states differ from e = 1",
                                 violations)};
}

// ---------------------------------------------------------------------------
// confidence

absl::StatusOr<Outcome> CiNesting(const ValidateOptions&, RandomStream& rng) {
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    ASSIGN_OR_RETURN(const Partition partition,
                     Partition::Uniform(IntIn(rng, 2, 50)));
    std::vector<double> logs(partition.cells());
    for (double& v : logs) v = 3.0 * rng.StandardNormal();
    const double a1 = UniformIn(rng, 0.01, 0.5);
    const double a2 = UniformIn(rng, a1, 0.99);
    ASSIGN_OR_RETURN(ConfidenceSet wide, BuildCiFromLogValues(partition, logs, a1));
    ASSIGN_OR_RETURN(ConfidenceSet narrow,
                     BuildCiFromLogValues(partition, logs, a2));
    std::sort(wide.cells.begin(), wide.cells.end());
    std::sort(narrow.cells.begin(), narrow.cells.end());
    if (!std::includes(wide.cells.begin(), wide.cells.end(),
                       narrow.cells.begin(), narrow.cells.end())) {
      ++violations;
    }
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d of 1000 nesting violations", violations)};
}

absl::StatusOr<Outcome> CiCoverage(const ValidateOptions&, RandomStream& rng) {
  constexpr int kReps = 200;
  constexpr double kTruth = 0.3;
  constexpr double kAlpha = 0.05;
  ASSIGN_OR_RETURN(const Partition partition, Partition::Uniform(20));
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 1.0));
  int private_hits = 0, exact_hits = 0;
  for (int rep = 0; rep < kReps; ++rep) {
    ASSIGN_OR_RETURN(const std::vector<double> data,
                     Generate(SyntheticSpec{BernoulliSpec{kTruth}, 1000}, rng));
    ASSIGN_OR_RETURN(
        const PrivateCiResult ci,
        PrivateCi(data, partition,
                  PrivateCiOptions{CiPriorConfig{}, budget,
                                   MechanismKind::kGaussian, kAlpha},
                  rng));
    private_hits += ci.private_set.Contains(kTruth) ? 1 : 0;
    exact_hits += ci.non_private_set.Contains(kTruth) ? 1 : 0;
  }
  const double floor = 1.0 - kAlpha - 3.0 * BinomialSe(1.0 - kAlpha, kReps);
  const double p_cov = static_cast<double>(private_hits) / kReps;
  const double e_cov = static_cast<double>(exact_hits) / kReps;
  return Outcome{p_cov >= floor && e_cov >= floor,
                 absl::StrFormat("coverage private %.3f, non-private %.3f "
                                 "(floor %.3f)",
                                 p_cov, e_cov, floor)};
}

absl::StatusOr<Outcome> CiPrivatizationWidens(const ValidateOptions&,
                                              RandomStream& rng) {
  ASSIGN_OR_RETURN(const Partition partition, Partition::Uniform(20));
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 1.0));
  ASSIGN_OR_RETURN(const std::vector<double> data,
                   Generate(SyntheticSpec{BernoulliSpec{0.3}, 1000}, rng));
  ASSIGN_OR_RETURN(const PrivateCiResult ci,
                   PrivateCi(data, partition,
                             PrivateCiOptions{CiPriorConfig{}, budget,
                                              MechanismKind::kGaussian, 0.05},
                             rng));
  int violations = 0;
  double worst_z = -HUGE_VAL;
  for (const PrivateCell& cell : ci.cells) {
    constexpr int kDraws = 10000;
    // Ratios to the raw value keep cells with extreme e-values finite.
    const double offset =
        cell.cell.deflated.log_value() - cell.cell.raw.log_value();
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double v = std::exp(offset - SampleNoise(cell.noise, rng));
      const double delta = v - mean;
      mean += delta / (i + 1);
      m2 += delta * (v - mean);
    }
    const double se = std::sqrt(m2 / (kDraws - 1) / kDraws);
    if (mean > 1.0 + 4.0 * se) ++violations;
    if (se > 0) worst_z = std::max(worst_z, (mean - 1.0) / se);
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d of %d cells with noised mean above raw + "
                                 "4 SE; largest z = %.3g",
                                 violations, ci.cells.size(), worst_z)};
}

absl::StatusOr<Outcome> CiBudgetExact(const ValidateOptions&,
                                      RandomStream& rng) {
  double worst = 0.0;
  bool ok = true;
  ASSIGN_OR_RETURN(const std::vector<double> data,
                   Generate(SyntheticSpec{BernoulliSpec{0.4}, 100}, rng));
  for (int k : {1, 7, 20, 50, 97}) {
    ASSIGN_OR_RETURN(const Partition partition, Partition::Uniform(k));
    for (double epsilon : {0.1, 1.0, 3.7}) {
      ASSIGN_OR_RETURN(const RenyiBudget budget,
                       RenyiBudget::Create(2.0, epsilon));
      ASSIGN_OR_RETURN(const PrivateCiResult ci,
                       PrivateCi(data, partition,
                                 PrivateCiOptions{CiPriorConfig{}, budget,
                                                  MechanismKind::kGaussian,
                                                  0.05},
                                 rng));
      const double gap = std::abs(ci.ledger.spent() - epsilon);
      ok = ok && gap <= k * epsilon * DBL_EPSILON &&
           static_cast<int>(ci.ledger.entries().size()) == k;
      worst = std::max(worst, gap / (epsilon * DBL_EPSILON));
    }
  }
  return Outcome{ok, absl::StrFormat("max |spent - epsilon| = %.3g roundings",
                                     worst)};
}

// ---------------------------------------------------------------------------
// monitor

MonitorConfig StandardMonitor(const RenyiBudget& budget, MechanismKind kind) {
  return MonitorConfig{0.5, 0.05, 128, 0.2, kDefaultPriorAtoms, budget, kind};
}

absl::StatusOr<MonitorState> RunMonitor(const MonitorConfig& config,
                                        absl::Span<const double> losses,
                                        RandomStream& rng) {
  ASSIGN_OR_RETURN(MonitorState state, MonitorState::Create(config));
  return Ingest(std::move(state), losses, config, rng);
}

absl::StatusOr<std::vector<double>> LossStream(RandomStream& rng,
                                               double before, double after,
                                               int change_batch) {
  return Generate(SyntheticSpec{ChangepointSpec{before, after,
                                                int64_t{change_batch} * 128},
                                50 * 128},
                  rng);
}

absl::StatusOr<Outcome> MonitorAnytimeValidity(const ValidateOptions&,
                                               RandomStream& rng) {
  constexpr int kRuns = 1000;
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 0.05));
  const MonitorConfig config = StandardMonitor(budget, MechanismKind::kGaussian);
  int alarms = 0;
  for (int run = 0; run < kRuns; ++run) {
    ASSIGN_OR_RETURN(const std::vector<double> losses,
                     LossStream(rng, 0.5, 0.5, 0));
    ASSIGN_OR_RETURN(const MonitorState state, RunMonitor(config, losses, rng));
    alarms += state.alarmed() ? 1 : 0;
  }
  const double rate = static_cast<double>(alarms) / kRuns;
  const double limit = 0.05 + 3.0 * BinomialSe(0.05, kRuns);
  return Outcome{rate <= limit,
                 absl::StrFormat("ever-alarm rate %.4f (limit %.4f)", rate,
                                 limit)};
}

absl::StatusOr<Outcome> MonitorBudget(const ValidateOptions&,
                                      RandomStream& rng) {
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 0.05));
  const MonitorConfig config = StandardMonitor(budget, MechanismKind::kGaussian);
  ASSIGN_OR_RETURN(const std::vector<double> losses,
                   LossStream(rng, 0.5, 0.6, 20));
  ASSIGN_OR_RETURN(const MonitorState state, RunMonitor(config, losses, rng));
  const BudgetLedger& ledger = state.ledger();
  bool ok = ledger.alpha() == 2.0 && ledger.entries().size() == 50;
  for (const LedgerEntry& entry : ledger.entries()) {
    ok = ok && entry.epsilon == 0.05;
  }
  const double gap = std::abs(ledger.spent() - 50 * 0.05);
  ok = ok && gap <= 50 * 2.5 * DBL_EPSILON;
  return Outcome{ok, absl::StrFormat("%d ledger entries at order %g; spent "
                                     "%.17g",
                                     ledger.entries().size(), ledger.alpha(),
                                     ledger.spent())};
}

absl::StatusOr<Outcome> MonitorMonotoneDeterministic(const ValidateOptions&,
                                                     RandomStream& rng) {
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 0.5));
  const MonitorConfig config = StandardMonitor(budget, MechanismKind::kGaussian);
  int resets = 0, mismatches = 0, alarmed_runs = 0;
  for (int run = 0; run < 50; ++run) {
    ASSIGN_OR_RETURN(const std::vector<double> losses,
                     LossStream(rng, 0.5, 0.7, 10));
    const uint64_t noise_seed = rng.NextU64();
    RandomStream first_rng(noise_seed), second_rng(noise_seed);
    ASSIGN_OR_RETURN(const MonitorState first,
                     RunMonitor(config, losses, first_rng));
    ASSIGN_OR_RETURN(const MonitorState second,
                     RunMonitor(config, losses, second_rng));
    bool seen = false;
    for (size_t b = 0; b < first.history().size(); ++b) {
      const BatchRecord& r = first.history()[b];
      if (seen && !r.alarmed) ++resets;
      seen = seen || r.alarmed;
      if (r.cumulative_log_e != second.history()[b].cumulative_log_e) {
        ++mismatches;
      }
    }
    alarmed_runs += seen ? 1 : 0;
  }
  return Outcome{resets == 0 && mismatches == 0,
                 absl::StrFormat("%d alarm resets, %d replay mismatches, %d of "
                                 "50 runs alarmed",
                                 resets, mismatches, alarmed_runs)};
}

absl::StatusOr<Outcome> MonitorPower(const ValidateOptions&,
                                     RandomStream& rng) {
  constexpr int kRuns = 200;
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 0.05));
  const MonitorConfig identity = StandardMonitor(budget, MechanismKind::kIdentity);
  const MonitorConfig gaussian = StandardMonitor(budget, MechanismKind::kGaussian);
  std::vector<int64_t> exact, noisy;
  for (int run = 0; run < kRuns; ++run) {
    ASSIGN_OR_RETURN(const std::vector<double> losses,
                     LossStream(rng, 0.6, 0.6, 0));
    ASSIGN_OR_RETURN(const MonitorState a, RunMonitor(identity, losses, rng));
    ASSIGN_OR_RETURN(const MonitorState b, RunMonitor(gaussian, losses, rng));
    exact.push_back(a.alarm_batch().value_or(50));
    noisy.push_back(b.alarm_batch().value_or(50));
  }
  std::sort(exact.begin(), exact.end());
  std::sort(noisy.begin(), noisy.end());
  const int64_t me = exact[kRuns / 2];
  const int64_t mn = noisy[kRuns / 2];
  return Outcome{me <= mn,
                 absl::StrFormat("median alarm batch identity %d, gaussian %d",
                                 me, mn)};
}

// ---------------------------------------------------------------------------
// conformal

absl::StatusOr<CalibrationScores> DrawCalibration(
    const ScoreQuantizer& quantizer, const std::vector<double>& cumulative,
    int n, RandomStream& rng) {
  std::vector<double> values(n);
  for (double& v : values) v = quantizer.center(SampleIndex(cumulative, rng));
  return CalibrationScores::FromValues(std::move(values));
}

absl::StatusOr<std::vector<double>> ModelCumulative(
    const ScoreQuantizer& quantizer) {
  ASSIGN_OR_RETURN(const std::vector<double> weights,
                   ModelBinWeights(BetaScoreModel{}, quantizer, true));
  return CumulativeWeights(weights);
}

absl::StatusOr<Outcome> ConformalMonotone(const ValidateOptions&,
                                          RandomStream& rng) {
  ASSIGN_OR_RETURN(const ScoreQuantizer quantizer,
                   ScoreQuantizer::Create(50, 1.0, 100.0));
  ASSIGN_OR_RETURN(const std::vector<double> cumulative,
                   ModelCumulative(quantizer));
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 1.0));
  constexpr double kAlpha = 0.1;
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ASSIGN_OR_RETURN(const CalibrationScores calib,
                     DrawCalibration(quantizer, cumulative,
                                     IntIn(rng, 10, 300), rng));
    double previous = -HUGE_VAL;
    for (int i = 0; i <= 200; ++i) {
      ASSIGN_OR_RETURN(const EValue e,
                       ExchEValue(calib, 1.0 + 99.0 * i / 200.0));
      if (!(e.log_value() > previous)) ++violations;
      previous = e.log_value();
    }
    ASSIGN_OR_RETURN(const PrivateLevelEValues levels,
                     PrivatizeLevels(calib, quantizer, budget,
                                     MechanismKind::kIdentity, rng));
    std::vector<double> logs;
    std::vector<Candidate> candidates;
    for (int k = 0; k < quantizer.bins(); ++k) {
      logs.push_back(levels.levels[k].log_value());
      if (k > 0 && logs[k] < logs[k - 1]) ++violations;
      candidates.push_back(Candidate{absl::StrCat(k), quantizer.center(k)});
    }
    ASSIGN_OR_RETURN(const PredictionSet set,
                     PredictSetFromLogValues(logs, quantizer, candidates,
                                             kAlpha, false));
    std::vector<bool> included(quantizer.bins(), false);
    for (int k : set.included) included[k] = true;
    for (int k = 0; k < quantizer.bins(); ++k) {
      if (included[k] != (logs[k] < -std::log(kAlpha))) ++violations;
    }
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d monotonicity or threshold violations",
                                 violations)};
}

absl::StatusOr<Outcome> ConformalSensitivity(const ValidateOptions&,
                                             RandomStream& rng) {
  int violations = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int bins = std::vector<int>{5, 20, 50, 200}[trial % 4];
    ASSIGN_OR_RETURN(const ScoreQuantizer quantizer,
                     ScoreQuantizer::Create(bins, 1.0, 100.0));
    const int n = IntIn(rng, 1, 300);
    std::vector<double> values(n + 1);
    for (double& v : values) v = quantizer.center(IntIn(rng, 0, bins - 1));
    ASSIGN_OR_RETURN(const CalibrationScores big,
                     CalibrationScores::FromValues(values));
    values.erase(values.begin() + (rng.NextU64() % values.size()));
    ASSIGN_OR_RETURN(const CalibrationScores small,
                     CalibrationScores::FromValues(values));
    ASSIGN_OR_RETURN(const LogSensitivity bound,
                     ExchSensitivity(quantizer.smallest_center(),
                                     quantizer.largest_center(), n));
    for (double s : quantizer.centers()) {
      ASSIGN_OR_RETURN(const EValue a, ExchEValue(big, s));
      ASSIGN_OR_RETURN(const EValue b, ExchEValue(small, s));
      const double diff = std::abs(a.log_value() - b.log_value());
      if (diff > bound.value() + 1e-12) ++violations;
      worst_ratio = std::max(worst_ratio, diff / bound.value());
    }
  }
  return Outcome{violations == 0,
                 absl::StrFormat("%d violations over 10000 neighbouring sets; "
                                 "max ratio to bound %.4g",
                                 violations, worst_ratio)};
}

absl::StatusOr<Outcome> ConformalCoverage(const ValidateOptions&,
                                          RandomStream& rng) {
  constexpr int kReps = 200;
  constexpr int kTests = 50;
  constexpr double kAlpha = 0.1;
  ASSIGN_OR_RETURN(const ScoreQuantizer quantizer,
                   ScoreQuantizer::Create(50, 1.0, 100.0));
  ASSIGN_OR_RETURN(const std::vector<double> cumulative,
                   ModelCumulative(quantizer));
  ASSIGN_OR_RETURN(const RenyiBudget budget, RenyiBudget::Create(2.0, 1.0));
  const double floor =
      1.0 - kAlpha - 3.0 * BinomialSe(1.0 - kAlpha, kReps * kTests);
  std::string observed;
  bool ok = true;
  for (MechanismKind kind : {MechanismKind::kIdentity, MechanismKind::kGaussian}) {
    int hits = 0;
    for (int rep = 0; rep < kReps; ++rep) {
      ASSIGN_OR_RETURN(const CalibrationScores calib,
                       DrawCalibration(quantizer, cumulative, 1000, rng));
      ASSIGN_OR_RETURN(const PrivateLevelEValues levels,
                       PrivatizeLevels(calib, quantizer, budget, kind, rng));
      for (int t = 0; t < kTests; ++t) {
        const Candidate truth{
            "true", quantizer.center(SampleIndex(cumulative, rng))};
        ASSIGN_OR_RETURN(const PredictionSet set,
                         PredictSet(levels, quantizer, {truth}, kAlpha, false));
        hits += set.included.empty() ? 0 : 1;
      }
    }
    const double coverage = static_cast<double>(hits) / (kReps * kTests);
    ok = ok && coverage >= floor;
    absl::StrAppendFormat(&observed, "%s%s coverage %.4f",
                          observed.empty() ? "" : ", ", MechanismName(kind),
                          coverage);
  }
  absl::StrAppendFormat(&observed, " (floor %.4f)", floor);
  return Outcome{ok, observed};
}

absl::StatusOr<Outcome> ConformalBudgetExact(const ValidateOptions&,
                                             RandomStream& rng) {
  bool ok = true;
  double worst = 0.0;
  for (int bins : {1, 10, 50, 500}) {
    ASSIGN_OR_RETURN(const ScoreQuantizer quantizer,
                     ScoreQuantizer::Create(bins, 1.0, 100.0));
    std::vector<double> values(200);
    for (double& v : values) v = quantizer.center(IntIn(rng, 0, bins - 1));
    ASSIGN_OR_RETURN(const CalibrationScores calib,
                     CalibrationScores::FromValues(values));
    for (double epsilon : {0.1, 1.0, 7.3}) {
      ASSIGN_OR_RETURN(const RenyiBudget budget,
                       RenyiBudget::Create(2.0, epsilon));
      ASSIGN_OR_RETURN(const PrivateLevelEValues levels,
                       PrivatizeLevels(calib, quantizer, budget,
                                       MechanismKind::kGaussian, rng));
      const double gap = std::abs(levels.ledger.spent() - epsilon);
      ok = ok && gap <= bins * epsilon * DBL_EPSILON &&
           static_cast<int>(levels.ledger.entries().size()) == bins;
      worst = std::max(worst, gap / (epsilon * DBL_EPSILON));
    }
  }
  return Outcome{ok, absl::StrFormat("max |spent - epsilon| = %.3g roundings",
                                     worst)};
}

// ---------------------------------------------------------------------------
// harness

struct SmallRuns {
  ExperimentResult ci;
  ExperimentResult monitor;
  ExperimentResult conformal;
};

absl::StatusOr<SmallRuns> RunSmallExperiments(uint64_t seed, int threads) {
  CiExperimentConfig ci;
  ci.ns = {200, 400};
  ci.reps = 3;
  ci.cells = 10;
  ci.epsilons = {1.0};
  ci.threads = threads;
  MonitorExperimentConfig monitor;
  monitor.runs = 4;
  monitor.batches = 6;
  monitor.batch_size = 32;
  monitor.change_batch = 3;
  monitor.epsilons = {0.5};
  monitor.threads = threads;
  ConformalExperimentConfig conformal;
  conformal.reps = 3;
  conformal.n = 200;
  conformal.bins = 10;
  conformal.test_points = 20;
  conformal.epsilons = {1.0};
  conformal.threads = threads;
  SmallRuns runs;
  ASSIGN_OR_RETURN(runs.ci, RunCiExperiment(ci, seed));
  ASSIGN_OR_RETURN(runs.monitor, RunMonitorExperiment(monitor, seed));
  ASSIGN_OR_RETURN(runs.conformal, RunConformalExperiment(conformal, seed));
  return runs;
}

std::vector<const ExperimentResult*> All(const SmallRuns& runs) {
  return {&runs.ci, &runs.monitor, &runs.conformal};
}

absl::StatusOr<Outcome> HarnessDeterminism(const ValidateOptions&,
                                           RandomStream& rng) {
  const uint64_t seed = rng.NextU64();
  ASSIGN_OR_RETURN(const SmallRuns serial, RunSmallExperiments(seed, 1));
  ASSIGN_OR_RETURN(const SmallRuns again, RunSmallExperiments(seed, 1));
  ASSIGN_OR_RETURN(const SmallRuns pooled, RunSmallExperiments(seed, 3));
  int tables = 0, differences = 0;
  const auto a = All(serial), b = All(again), c = All(pooled);
  for (size_t e = 0; e < a.size(); ++e) {
    for (size_t t = 0; t < a[e]->tables.size(); ++t) {
      const std::string text = a[e]->tables[t].second.ToString();
      ++tables;
      if (text != b[e]->tables[t].second.ToString() ||
          text != c[e]->tables[t].second.ToString()) {
        ++differences;
      }
    }
  }
  return Outcome{differences == 0,
                 absl::StrFormat("%d of %d tables differ across reruns and "
                                 "thread counts",
                                 differences, tables)};
}

absl::StatusOr<Outcome> HarnessDocumentedRerender(const ValidateOptions&,
                                                  RandomStream& rng) {
  ASSIGN_OR_RETURN(const SmallRuns runs, RunSmallExperiments(rng.NextU64(), 1));
  int problems = 0, tables = 0, plots = 0;
  for (const ExperimentResult* result : All(runs)) {
    std::map<std::string, std::string> texts;
    for (const auto& [name, table] : result->tables) {
      const std::string text = table.ToString();
      texts[name] = text;
      ++tables;
      const std::string first = text.substr(0, text.find('\n'));
      for (const CsvColumn& c : table.columns()) {
        if (c.description.empty() ||
            first.find(c.name + " = " + c.description) == std::string::npos) {
          ++problems;
        }
      }
      auto parsed = ParseCsv(text);
      if (!parsed.ok() || parsed->ToString() != text) ++problems;
    }
    for (const PlotFile& plot : result->plots) {
      ++plots;
      ASSIGN_OR_RETURN(const CsvTable parsed, ParseCsv(texts[plot.csv]));
      ASSIGN_OR_RETURN(const std::string once, RenderLinePlot(parsed, plot.spec));
      ASSIGN_OR_RETURN(const CsvTable reparsed, ParseCsv(parsed.ToString()));
      ASSIGN_OR_RETURN(const std::string twice,
                       RenderLinePlot(reparsed, plot.spec));
      if (once != twice) ++problems;
    }
  }
  return Outcome{problems == 0,
                 absl::StrFormat("%d problems across %d tables and %d plots",
                                 problems, tables, plots)};
}

absl::StatusOr<Outcome> RegistryCompleteness(const ValidateOptions&,
                                             RandomStream&);

const std::vector<Check>& Checks() {
  static const auto* checks = new std::vector<Check>{
      {"privacy_core", "laplace_divergence_monotone_in_shift",
       LaplaceDivergenceMonotone},
      {"privacy_core", "gaussian_divergence_scaling", GaussianDivergenceScaling},
      {"privacy_core", "ledger_order_independent", LedgerOrderIndependent},
      {"privacy_core", "rdp_to_approx_dp_limit", RdpToApproxLimit},
      {"mechanisms", "mgf_closed_form_validity", MgfClosedForm},
      {"mechanisms", "privacy_tightness", PrivacyTightness},
      {"mechanisms", "h_alpha_inverse_roundtrip", HAlphaInverse},
      {"mechanisms", "monte_carlo_validity", MonteCarloValidity},
      {"mechanisms", "bias_necessity", BiasNecessity},
      {"evalue_core", "privatization_validity", PrivatizationValidity},
      {"evalue_core", "growth_identity", GrowthIdentity},
      {"evalue_core", "continue_product_laws", ContinueProductLaws},
      {"evalue_core", "e_to_p_monotone", EToPMonotone},
      {"evalue_core", "average_in_range", AverageInRange},
      {"mean_evalue", "mixture_product_equivalence", MixtureProduct},
      {"mean_evalue", "permutation_invariance", PermutationInvariance},
      {"mean_evalue", "empirical_sensitivity", MeanSensitivity},
      {"mean_evalue", "empirical_lipschitz", MeanLipschitz},
      {"mean_evalue", "null_validity", MeanNullValidity},
      {"mean_evalue", "empty_state_is_one", MeanEmptyState},
      {"confidence", "nesting", CiNesting},
      {"confidence", "coverage", CiCoverage},
      {"confidence", "privatization_widens", CiPrivatizationWidens},
      {"confidence", "budget_exactness", CiBudgetExact},
      {"monitor", "anytime_validity", MonitorAnytimeValidity},
      {"monitor", "optional_continuation_budget", MonitorBudget},
      {"monitor", "monotone_alarm_and_determinism",
       MonitorMonotoneDeterministic},
      {"monitor", "power_sanity", MonitorPower},
      {"conformal", "monotonicity", ConformalMonotone},
      {"conformal", "empirical_sensitivity", ConformalSensitivity},
      {"conformal", "marginal_coverage", ConformalCoverage},
      {"conformal", "budget_exactness", ConformalBudgetExact},
      {"harness", "byte_determinism", HarnessDeterminism},
      {"harness", "documented_columns_and_svg_rerender",
       HarnessDocumentedRerender},
      {"harness", "registry_completeness", RegistryCompleteness},
  };
  return *checks;
}

// Number of invariants each module declares.
const std::map<std::string, int>& ExpectedCounts() {
  static const auto* counts = new std::map<std::string, int>{
      {"privacy_core", 4}, {"mechanisms", 5}, {"evalue_core", 5},
      {"mean_evalue", 6},  {"confidence", 4}, {"monitor", 4},
      {"conformal", 4},    {"harness", 3},
  };
  return *counts;
}

absl::StatusOr<Outcome> RegistryCompleteness(const ValidateOptions&,
                                             RandomStream&) {
  std::map<std::string, int> counts;
  for (const Check& c : Checks()) ++counts[c.module];
  int expected = 0;
  for (const auto& [module, n] : ExpectedCounts()) expected += n;
  const bool ok = counts == ExpectedCounts() &&
                  static_cast<int>(Checks().size()) == expected;
  return Outcome{ok, absl::StrFormat("%d registered, %d expected",
                                     Checks().size(), expected)};
}

}  // namespace

std::vector<GridSpec> StandardSpecGrid() {
  std::vector<GridSpec> grid;
  for (double alpha : {2.0, 10.0, 50.0}) {
    for (double epsilon : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0}) {
      for (double delta : {0.01, 0.05, 0.1, 0.5, 1.0}) {
        const LogSensitivity sens = *LogSensitivity::Create(delta);
        const RenyiBudget budget = *RenyiBudget::Create(alpha, epsilon);
        const std::string where = absl::StrFormat(
            "alpha=%g epsilon=%g sensitivity=%g", alpha, epsilon, delta);
        NoiseSpec gauss = *CalibrateGaussianRdp(sens, budget);
        if (gauss.gaussian()->variance <= kMaxGridVariance) {
          grid.push_back(GridSpec{"gaussian-rdp " + where,
                                  MechanismKind::kGaussian, delta, budget,
                                  std::move(gauss)});
        }
        std::optional<NoiseSpec> lap = *CalibrateLaplaceRdp(sens, budget);
        if (lap.has_value()) {
          grid.push_back(GridSpec{"laplace-rdp " + where,
                                  MechanismKind::kLaplace, delta, budget,
                                  *std::move(lap)});
        }
      }
    }
  }
  for (double epsilon : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0}) {
    for (double delta : {0.01, 0.05, 0.1, 0.5, 1.0}) {
      const LogSensitivity sens = *LogSensitivity::Create(delta);
      const std::string where =
          absl::StrFormat("epsilon=%g sensitivity=%g", epsilon, delta);
      NoiseSpec gauss = *CalibrateGaussianApproxDp(sens, epsilon, kGridDelta);
      if (gauss.gaussian()->variance <= kMaxGridVariance) {
        grid.push_back(GridSpec{"gaussian-approx-dp " + where,
                                MechanismKind::kGaussian, delta, std::nullopt,
                                std::move(gauss)});
      }
      auto pure = CalibrateLaplacePureDp(sens, epsilon);
      if (pure.ok()) {
        grid.push_back(GridSpec{"laplace-pure-dp " + where,
                                MechanismKind::kLaplace, delta, std::nullopt,
                                *std::move(pure)});
      }
    }
  }
  return grid;
}

MonteCarloEstimate MonteCarloMgf(const NoiseSpec& spec, int64_t draws,
                                 RandomStream& rng) {
  const double mean = spec.mean();
  const int64_t pairs = std::max<int64_t>(2, draws / 2);
  double avg = 0.0, m2 = 0.0;
  for (int64_t i = 0; i < pairs; ++i) {
    const double xi = SampleNoise(spec, rng);
    const double v = 0.5 * (std::exp(-xi) + std::exp(xi - 2.0 * mean));
    const double delta = v - avg;
    avg += delta / static_cast<double>(i + 1);
    m2 += delta * (v - avg);
  }
  const double variance = m2 / static_cast<double>(pairs - 1);
  return MonteCarloEstimate{avg,
                            std::sqrt(variance / static_cast<double>(pairs))};
}

std::vector<PropertyInfo> RegisteredProperties() {
  std::vector<PropertyInfo> out;
  for (const Check& c : Checks()) out.push_back({c.module, c.property});
  return out;
}

std::vector<PropertyResult> RunValidation(const ValidateOptions& options) {
  const auto& checks = Checks();
  return ParallelMap(
      static_cast<int>(checks.size()),
      [&](int i) {
        const Check& c = checks[i];
        RandomStream rng = RandomStream::Derive(
            options.seed, {kValidateStream, static_cast<uint64_t>(i)});
        absl::StatusOr<Outcome> outcome = c.fn(options, rng);
        if (!outcome.ok()) {
          return PropertyResult{c.module, c.property, false,
                                absl::StrCat("error: ",
                                             outcome.status().ToString())};
        }
        return PropertyResult{c.module, c.property, outcome->passed,
                              outcome->observed};
      },
      options.threads);
}

CsvTable ValidationTable(const std::vector<PropertyResult>& results) {
  CsvTable table({{"module", "module the property belongs to"},
                  {"property", "property name"},
                  {"passed", "1 if the property held, 0 otherwise"},
                  {"observed", "observed value behind the verdict"}});
  for (const PropertyResult& r : results) {
    // Commas would split the observed text into extra cells.
    std::string observed = r.observed;
    std::replace(observed.begin(), observed.end(), ',', ';');
    table.AddRow({r.module, r.property, r.passed ? "1" : "0", observed})
        .IgnoreError();
  }
  return table;
}

}  // namespace evdp::harness
