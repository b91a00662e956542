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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "evdp/harness/csv.h"
#include "evdp/harness/experiments.h"
#include "evdp/harness/manifest.h"
#include "evdp/harness/validate.h"
#include "evdp/noise.h"

namespace {

using evdp::LipschitzScaling;
using evdp::MechanismKind;
namespace harness = evdp::harness;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUndefined = 3;

struct Common {
  uint64_t seed = 1;
  std::string out = "out";
  int threads = 0;
};

void AddCommon(CLI::App* sub, Common& common) {
  sub->set_config("--config", "", "flat key = value file; flags win");
  sub->allow_config_extras(false);
  sub->add_option("--seed", common.seed, "root random seed")
      ->capture_default_str();
  sub->add_option("--out", common.out, "output directory")
      ->capture_default_str();
  sub->add_option("--threads", common.threads,
                  "worker threads (0 = hardware concurrency)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

// CLI11 reads config files only for the top-level app, so a subcommand's
// --config is applied here. Options given on the command line keep their
// values and unknown keys are rejected.
void ApplyConfig(CLI::App* sub) {
  CLI::Option* config = sub->get_config_ptr();
  if (config == nullptr || config->count() == 0) return;
  for (const std::string& path : config->as<std::vector<std::string>>()) {
    for (const CLI::ConfigItem& item :
         sub->get_config_formatter_base()->from_file(path)) {
      if (item.name == "++" || item.name == "--") continue;
      CLI::Option* option = item.parents.empty()
                                ? sub->get_option_no_throw("--" + item.name)
                                : nullptr;
      if (option == nullptr || option == config) {
        throw CLI::ConfigError::Extras(item.fullname());
      }
      if (option->count() > 0) continue;
      option->add_result(item.inputs);
      option->run_callback();
    }
  }
}

CLI::Option* AddMechanisms(CLI::App* sub, std::vector<std::string>& names) {
  return sub
      ->add_option("--mechanism", names, "gaussian, laplace and/or identity")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "laplace", "identity"}));
}

template <typename T>
std::string List(const std::vector<T>& values) {
  std::vector<std::string> parts;
  for (const T& v : values) {
    if constexpr (std::is_same_v<T, std::string>) {
      parts.push_back(v);
    } else if constexpr (std::is_floating_point_v<T>) {
      parts.push_back(harness::FormatDouble(v));
    } else {
      parts.push_back(harness::FormatInt(v));
    }
  }
  return absl::StrCat("[", absl::StrJoin(parts, ", "), "]");
}

std::vector<MechanismKind> ParseMechanisms(
    const std::vector<std::string>& names) {
  std::vector<MechanismKind> kinds;
  for (const std::string& name : names) {
    kinds.push_back(*evdp::ParseMechanismKind(name));
  }
  return kinds;
}

int ExitForStatus(const absl::Status& status) {
  std::cerr << "evdp: " << status.message() << "\n";
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kOutOfRange:
      return kExitUsage;
    case absl::StatusCode::kFailedPrecondition:
      return kExitUndefined;
    default:
      return kExitValidation;
  }
}

int Finish(const harness::ExperimentResult& result, harness::RunManifest manifest,
           const Common& common, bool mechanisms_requested) {
  auto written = harness::WriteExperiment(result, common.out);
  if (!written.ok()) return ExitForStatus(written.status());
  manifest.seed = common.seed;
  manifest.Set("threads", harness::FormatInt(common.threads));
  manifest.outputs = *written;
  const std::string manifest_path =
      (std::filesystem::path(common.out) / "manifest.txt").string();
  if (auto s = harness::WriteFile(manifest_path, manifest.ToText()); !s.ok()) {
    return ExitForStatus(s);
  }
  for (const std::string& path : *written) std::cout << "wrote " << path << "\n";
  std::cout << "wrote " << manifest_path << "\n";
  for (const std::string& note : result.undefined) {
    std::cerr << "evdp: mechanism undefined for " << note
              << " (rows marked N/A)\n";
  }
  if (mechanisms_requested && !result.undefined.empty()) return kExitUndefined;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private e-values: confidence intervals, "
               "monitoring, conformal prediction and validation"};
  app.require_subcommand(1);

  // ci
  Common ci_common;
  harness::CiExperimentConfig ci;
  std::vector<std::string> ci_mechanisms = {"gaussian", "laplace"};
  CLI::App* ci_cmd = app.add_subcommand(
      "ci", "private confidence intervals for a mean in [0, 1]");
  AddCommon(ci_cmd, ci_common);
  ci_cmd->add_option("--alpha", ci.alpha, "significance level")
      ->capture_default_str();
  ci_cmd->add_option("--epsilon", ci.epsilons, "total Renyi epsilon values")
      ->capture_default_str();
  ci_cmd->add_option("--renyi-alpha", ci.renyi_alpha, "Renyi order")
      ->capture_default_str();
  CLI::Option* ci_mech = AddMechanisms(ci_cmd, ci_mechanisms);
  ci_cmd->add_option("--n", ci.ns, "sample sizes")->capture_default_str();
  ci_cmd->add_option("--cells", ci.cells, "partition cells")
      ->capture_default_str();
  ci_cmd->add_option("--reps", ci.reps, "repetitions")->capture_default_str();
  ci_cmd->add_option("--p", ci.p, "Bernoulli mean of synthetic data")
      ->capture_default_str();
  std::string ci_lipschitz = "endpoint";
  ci_cmd
      ->add_option("--lipschitz", ci_lipschitz,
                   "how cell e-values are lowered across a cell: endpoint, "
                   "sample-size or per-observation")
      ->check(CLI::IsMember({"endpoint", "sample-size", "per-observation"}))
      ->capture_default_str();
  ci_cmd->add_option("--data", ci.data_path,
                     "CSV with a column \"y\" in [0, 1] instead of synthetic "
                     "data");

  // monitor
  Common mon_common;
  harness::MonitorExperimentConfig mon;
  std::vector<std::string> mon_mechanisms = {"gaussian"};
  CLI::App* mon_cmd = app.add_subcommand(
      "monitor", "private sequential monitoring of a loss stream");
  AddCommon(mon_cmd, mon_common);
  mon_cmd->add_option("--alpha", mon.alpha, "alarm level")
      ->capture_default_str();
  mon_cmd->add_option("--epsilon", mon.epsilons, "per-batch Renyi epsilons")
      ->capture_default_str();
  mon_cmd->add_option("--renyi-alpha", mon.renyi_alpha, "Renyi order")
      ->capture_default_str();
  CLI::Option* mon_mech = AddMechanisms(mon_cmd, mon_mechanisms);
  mon_cmd->add_option("--batch-size", mon.batch_size, "losses per batch")
      ->capture_default_str();
  mon_cmd->add_option("--runs", mon.runs, "synthetic runs")
      ->capture_default_str();
  mon_cmd->add_option("--batches", mon.batches, "batches per synthetic run")
      ->capture_default_str();
  mon_cmd->add_option("--threshold", mon.threshold, "safety threshold")
      ->capture_default_str();
  mon_cmd->add_option("--shift", mon.shift, "mean shift after the change")
      ->capture_default_str();
  mon_cmd->add_option("--change-batch", mon.change_batch,
                      "0-based batch at which the mean shifts")
      ->capture_default_str();
  mon_cmd->add_option("--c", mon.c, "betting prior scale")
      ->capture_default_str();
  mon_cmd->add_option("--losses", mon.losses_path,
                      "CSV with a column \"loss\" in [0, 1] instead of "
                      "synthetic streams");

  // conformal
  Common cp_common;
  harness::ConformalExperimentConfig cp;
  std::vector<std::string> cp_mechanisms = {"gaussian", "laplace"};
  CLI::App* cp_cmd = app.add_subcommand(
      "conformal", "private conformal prediction sets");
  AddCommon(cp_cmd, cp_common);
  cp_cmd->add_option("--alpha", cp.alpha, "miscoverage level")
      ->capture_default_str();
  cp_cmd->add_option("--epsilon", cp.epsilons,
                     "total Renyi epsilons over all levels")
      ->capture_default_str();
  cp_cmd->add_option("--renyi-alpha", cp.renyi_alphas, "Renyi orders")
      ->capture_default_str();
  CLI::Option* cp_mech = AddMechanisms(cp_cmd, cp_mechanisms);
  cp_cmd->add_option("--n", cp.n, "calibration set size")
      ->capture_default_str();
  cp_cmd->add_option("--bins", cp.bins, "score bins")->capture_default_str();
  cp_cmd->add_option("--reps", cp.reps, "repetitions")->capture_default_str();
  cp_cmd->add_option("--test-points", cp.test_points,
                     "test points per repetition")
      ->capture_default_str();
  cp_cmd->add_option("--calibration", cp.calibration_path,
                     "CSV with a column \"score\"");
  cp_cmd->add_option("--candidates", cp.candidates_path,
                     "CSV with columns \"id\", \"label\", \"score\"");

  // validate
  Common val_common;
  bool inject_zero_bias = false;
  CLI::App* val_cmd = app.add_subcommand(
      "validate", "run every registered property check");
  AddCommon(val_cmd, val_common);
  val_cmd->add_flag("--inject-zero-bias", inject_zero_bias)
      ->group("");

  try {
    app.parse(argc, argv);
    for (CLI::App* sub : app.get_subcommands()) ApplyConfig(sub);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (ci_cmd->parsed()) {
    ci.mechanisms = ParseMechanisms(ci_mechanisms);
    ci.threads = ci_common.threads;
    ci.lipschitz = ci_lipschitz == "endpoint" ? LipschitzScaling::kEndpoint
                   : ci_lipschitz == "sample-size"
                       ? LipschitzScaling::kSampleSize
                       : LipschitzScaling::kPerObservation;
    auto result = harness::RunCiExperiment(ci, ci_common.seed);
    if (!result.ok()) return ExitForStatus(result.status());
    harness::RunManifest manifest{"ci"};
    manifest.Set("alpha", harness::FormatDouble(ci.alpha));
    manifest.Set("epsilon", List(ci.epsilons));
    manifest.Set("renyi-alpha", harness::FormatDouble(ci.renyi_alpha));
    if (ci_mech->count() > 0) {
      manifest.Set("mechanism", List(ci_mechanisms));
    } else {
      manifest.SetDefaulted("mechanism", List(ci_mechanisms));
    }
    manifest.Set("n", List(ci.ns));
    manifest.Set("cells", harness::FormatInt(ci.cells));
    manifest.Set("reps", harness::FormatInt(ci.reps));
    manifest.Set("p", harness::FormatDouble(ci.p));
    manifest.Set("lipschitz", ci_lipschitz);
    if (!ci.data_path.empty()) manifest.Set("data", ci.data_path);
    return Finish(*result, std::move(manifest), ci_common,
                  ci_mech->count() > 0);
  }
  if (mon_cmd->parsed()) {
    mon.mechanisms = ParseMechanisms(mon_mechanisms);
    mon.threads = mon_common.threads;
    auto result = harness::RunMonitorExperiment(mon, mon_common.seed);
    if (!result.ok()) return ExitForStatus(result.status());
    harness::RunManifest manifest{"monitor"};
    manifest.Set("alpha", harness::FormatDouble(mon.alpha));
    manifest.Set("epsilon", List(mon.epsilons));
    manifest.Set("renyi-alpha", harness::FormatDouble(mon.renyi_alpha));
    if (mon_mech->count() > 0) {
      manifest.Set("mechanism", List(mon_mechanisms));
    } else {
      manifest.SetDefaulted("mechanism", List(mon_mechanisms));
    }
    manifest.Set("batch-size", harness::FormatInt(mon.batch_size));
    manifest.Set("runs", harness::FormatInt(mon.runs));
    manifest.Set("batches", harness::FormatInt(mon.batches));
    manifest.Set("threshold", harness::FormatDouble(mon.threshold));
    manifest.Set("shift", harness::FormatDouble(mon.shift));
    manifest.Set("change-batch", harness::FormatInt(mon.change_batch));
    manifest.Set("c", harness::FormatDouble(mon.c));
    if (!mon.losses_path.empty()) manifest.Set("losses", mon.losses_path);
    return Finish(*result, std::move(manifest), mon_common,
                  mon_mech->count() > 0);
  }
  if (cp_cmd->parsed()) {
    cp.mechanisms = ParseMechanisms(cp_mechanisms);
    cp.threads = cp_common.threads;
    auto result = harness::RunConformalExperiment(cp, cp_common.seed);
    if (!result.ok()) return ExitForStatus(result.status());
    harness::RunManifest manifest{"conformal"};
    manifest.Set("alpha", harness::FormatDouble(cp.alpha));
    manifest.Set("epsilon", List(cp.epsilons));
    manifest.Set("renyi-alpha", List(cp.renyi_alphas));
    if (cp_mech->count() > 0) {
      manifest.Set("mechanism", List(cp_mechanisms));
    } else {
      manifest.SetDefaulted("mechanism", List(cp_mechanisms));
    }
    manifest.Set("n", harness::FormatInt(cp.n));
    manifest.Set("bins", harness::FormatInt(cp.bins));
    manifest.Set("reps", harness::FormatInt(cp.reps));
    manifest.Set("test-points", harness::FormatInt(cp.test_points));
    if (!cp.calibration_path.empty()) {
      manifest.Set("calibration", cp.calibration_path);
      manifest.Set("candidates", cp.candidates_path);
    }
    return Finish(*result, std::move(manifest), cp_common,
                  cp_mech->count() > 0);
  }

  harness::ValidateOptions options;
  options.seed = val_common.seed;
  options.inject_zero_bias = inject_zero_bias;
  options.threads = val_common.threads;
  const std::vector<harness::PropertyResult> results =
      harness::RunValidation(options);
  harness::ExperimentResult report;
  report.tables.emplace_back("validate.csv", harness::ValidationTable(results));
  int failures = 0;
  for (const harness::PropertyResult& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.module << "/"
              << r.property << ": " << r.observed << "\n";
    failures += r.passed ? 0 : 1;
  }
  harness::RunManifest manifest{"validate"};
  if (inject_zero_bias) manifest.Set("inject-zero-bias", "true");
  const int code = Finish(report, std::move(manifest), val_common, false);
  if (code != kExitOk) return code;
  std::cout << results.size() - failures << " of " << results.size()
            << " properties passed\n";
  return failures == 0 ? kExitOk : kExitValidation;
}
