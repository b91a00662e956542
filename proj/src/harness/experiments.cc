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

#include "evdp/harness/experiments.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "evdp/confidence.h"
#include "evdp/conformal.h"
#include "evdp/harness/parallel.h"
#include "evdp/monitor.h"
#include "evdp/privacy.h"
#include "evdp/random.h"
#include "evdp/status_macros.h"

namespace evdp::harness {
namespace {

using Row = std::vector<std::string>;

constexpr char kNonPrivate[] = "nonprivate";

bool IsUndefined(const absl::Status& status) {
  return status.code() == absl::StatusCode::kFailedPrecondition;
}

uint64_t Tag(MechanismKind kind) { return static_cast<uint64_t>(kind); }

std::string Fmt(double v) { return FormatDouble(v); }
std::string Fmt(int64_t v) { return FormatInt(v); }
std::string Rate(int64_t hits, int64_t total) {
  return total == 0 ? kNotAvailable : Fmt(static_cast<double>(hits) / total);
}

absl::Status CheckLevel(double alpha, const char* name) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, " must lie in (0, 1), got ", alpha));
  }
  return absl::OkStatus();
}

absl::Status CheckPositive(int64_t value, const char* name) {
  if (value < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, " must be >= 1, got ", value));
  }
  return absl::OkStatus();
}

absl::Status CheckBudgets(const std::vector<double>& renyi_alphas,
                          const std::vector<double>& epsilons,
                          const std::vector<MechanismKind>& mechanisms) {
  for (double a : renyi_alphas) {
    for (double e : epsilons) {
      RETURN_IF_ERROR(RenyiBudget::Create(a, e).status());
    }
  }
  if (epsilons.empty()) {
    return absl::InvalidArgumentError("at least one epsilon is required");
  }
  if (mechanisms.empty()) {
    return absl::InvalidArgumentError("at least one mechanism is required");
  }
  return absl::OkStatus();
}

absl::Status CheckThreads(int threads) {
  if (threads < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("thread count must be >= 0, got ", threads));
  }
  return absl::OkStatus();
}

// Collects the first error from a batch of job outcomes.
template <typename T>
absl::Status FirstError(const std::vector<absl::StatusOr<T>>& outcomes) {
  for (const auto& outcome : outcomes) {
    if (!outcome.ok()) return outcome.status();
  }
  return absl::OkStatus();
}

std::string UndefinedNote(double renyi_alpha, double epsilon,
                          MechanismKind kind) {
  return absl::StrFormat("%s at renyi_alpha=%g epsilon=%g",
                         MechanismName(kind), renyi_alpha, epsilon);
}

}  // namespace

absl::StatusOr<std::vector<std::string>> WriteExperiment(
    const ExperimentResult& result, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    return absl::UnavailableError(absl::StrCat(
        "cannot create output directory ", out_dir, ": ", ec.message()));
  }
  std::vector<std::string> written;
  for (const auto& [name, table] : result.tables) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    RETURN_IF_ERROR(WriteFile(path, table.ToString()));
    written.push_back(path);
  }
  for (const PlotFile& plot : result.plots) {
    const std::filesystem::path dir(out_dir);
    ASSIGN_OR_RETURN(const CsvTable table, ReadCsv((dir / plot.csv).string()));
    ASSIGN_OR_RETURN(const std::string svg, RenderLinePlot(table, plot.spec));
    const std::string path = (dir / plot.svg).string();
    RETURN_IF_ERROR(WriteFile(path, svg));
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Confidence intervals.

absl::Status ValidateCiExperimentConfig(const CiExperimentConfig& config) {
  if (config.data_path.empty()) {
    if (config.ns.empty()) {
      return absl::InvalidArgumentError("at least one sample size is required");
    }
    for (int64_t n : config.ns) RETURN_IF_ERROR(CheckPositive(n, "n"));
    if (!(config.p >= 0.0 && config.p <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("p must lie in [0, 1], got ", config.p));
    }
  }
  RETURN_IF_ERROR(CheckPositive(config.reps, "reps"));
  RETURN_IF_ERROR(CheckPositive(config.cells, "cells"));
  RETURN_IF_ERROR(CheckLevel(config.alpha, "alpha"));
  RETURN_IF_ERROR(CheckThreads(config.threads));
  return CheckBudgets({config.renyi_alpha}, config.epsilons,
                      config.mechanisms);
}

namespace {

Row CiRow(int64_t n, int rep, const CiExperimentConfig& config,
          const std::string& epsilon, const std::string& mechanism,
          const ConfidenceSet* set, std::optional<double> truth) {
  Row row = {Fmt(n), Fmt(int64_t{rep}), Fmt(config.alpha),
             Fmt(config.renyi_alpha), epsilon, mechanism};
  if (set == nullptr) {
    row.insert(row.end(), {"undefined", kNotAvailable, kNotAvailable,
                           kNotAvailable, kNotAvailable, kNotAvailable});
    return row;
  }
  row.push_back("ok");
  if (set->empty) {
    row.insert(row.end(), {kNotAvailable, kNotAvailable});
  } else {
    row.push_back(Fmt(set->intervals.front().lo));
    row.push_back(Fmt(set->intervals.back().hi));
  }
  row.push_back(Fmt(set->width));
  row.push_back(Fmt(static_cast<int64_t>(set->intervals.size())));
  row.push_back(truth.has_value() ? Fmt(int64_t{set->Contains(*truth)})
                                  : std::string(kNotAvailable));
  return row;
}

struct CiJobOutput {
  std::vector<Row> rows;
  std::vector<std::string> undefined;
};

}  // namespace

absl::StatusOr<ExperimentResult> RunCiExperiment(
    const CiExperimentConfig& config, uint64_t seed) {
  RETURN_IF_ERROR(ValidateCiExperimentConfig(config));
  ASSIGN_OR_RETURN(const Partition partition,
                   Partition::Uniform(config.cells));
  const bool user_data = !config.data_path.empty();
  std::vector<double> data;
  std::vector<int64_t> ns = config.ns;
  if (user_data) {
    ASSIGN_OR_RETURN(data, ReadNumericColumn(config.data_path, "y"));
    if (data.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat(config.data_path, " contains no observations"));
    }
    ns = {static_cast<int64_t>(data.size())};
  }
  const std::optional<double> truth =
      user_data ? std::nullopt : std::optional<double>(config.p);
  ASSIGN_OR_RETURN(const RenyiBudget reference,
                   RenyiBudget::Create(config.renyi_alpha,
                                       config.epsilons.front()));

  const int jobs = static_cast<int>(ns.size()) * config.reps;
  auto run = [&](int job) -> absl::StatusOr<CiJobOutput> {
    const int ni = job / config.reps;
    const int rep = job % config.reps;
    const int64_t n = ns[ni];
    std::vector<double> sample;
    if (user_data) {
      sample = data;
    } else {
      RandomStream rng = RandomStream::Derive(
          seed, {kDataStream, static_cast<uint64_t>(ni),
                 static_cast<uint64_t>(rep)});
      ASSIGN_OR_RETURN(sample,
                       Generate(SyntheticSpec{BernoulliSpec{config.p}, n}, rng));
    }
    CiJobOutput out;
    // The identity mechanism adds no noise, so its private set is the
    // non-private interval.
    RandomStream unused(0);
    ASSIGN_OR_RETURN(
        const PrivateCiResult baseline,
        PrivateCi(sample, partition,
                  PrivateCiOptions{CiPriorConfig{}, reference,
                                   MechanismKind::kIdentity, config.alpha,
                                   config.lipschitz},
                  unused));
    out.rows.push_back(CiRow(n, rep, config, kNotAvailable, kNonPrivate,
                             &baseline.non_private_set, truth));
    for (size_t ei = 0; ei < config.epsilons.size(); ++ei) {
      ASSIGN_OR_RETURN(const RenyiBudget budget,
                       RenyiBudget::Create(config.renyi_alpha,
                                           config.epsilons[ei]));
      for (MechanismKind kind : config.mechanisms) {
        RandomStream rng = RandomStream::Derive(
            seed, {kNoiseStream, static_cast<uint64_t>(ni),
                   static_cast<uint64_t>(rep), static_cast<uint64_t>(ei),
                   Tag(kind)});
        auto result =
            PrivateCi(sample, partition,
                      PrivateCiOptions{CiPriorConfig{}, budget, kind,
                                       config.alpha, config.lipschitz},
                      rng);
        if (!result.ok() && !IsUndefined(result.status())) {
          return result.status();
        }
        if (!result.ok()) {
          out.undefined.push_back(UndefinedNote(config.renyi_alpha,
                                                config.epsilons[ei], kind));
        }
        out.rows.push_back(
            CiRow(n, rep, config, Fmt(config.epsilons[ei]),
                  MechanismName(kind),
                  result.ok() ? &result->private_set : nullptr, truth));
      }
    }
    return out;
  };
  const auto outcomes = ParallelMap(jobs, run, config.threads);
  RETURN_IF_ERROR(FirstError(outcomes));

  CsvTable intervals({
      {"n", "sample size"},
      {"rep", "repetition index"},
      {"alpha", "significance level of the interval"},
      {"renyi_alpha", "Renyi order of the privacy budget"},
      {"epsilon", "total Renyi epsilon across all cells (N/A when non-private)"},
      {"mechanism", "gaussian, laplace, identity or nonprivate"},
      {"status", "ok, or undefined when the mechanism cannot be calibrated"},
      {"lower", "smallest included theta (N/A when the set is empty)"},
      {"upper", "largest included theta (N/A when the set is empty)"},
      {"width", "total length of the included cells"},
      {"intervals", "number of disjoint intervals in the set"},
      {"covers", "1 if the set contains the true mean (N/A when unknown)"},
  });
  // Summary accumulators keyed by (sample size index, position in job).
  struct Acc {
    Row key;
    int64_t defined = 0;
    double width = 0.0;
    int64_t covers = 0;
  };
  std::map<std::pair<int, size_t>, Acc> acc;
  std::set<std::string> undefined;
  for (int job = 0; job < jobs; ++job) {
    const CiJobOutput& out = *outcomes[job];
    for (size_t pos = 0; pos < out.rows.size(); ++pos) {
      const Row& row = out.rows[pos];
      RETURN_IF_ERROR(intervals.AddRow(row));
      Acc& a = acc[{job / config.reps, pos}];
      a.key = {row[0], row[3], row[4], row[5]};
      if (row[6] != "ok") continue;
      ++a.defined;
      a.width += *ParseDouble(row[9]);
      if (row[11] == "1") ++a.covers;
    }
    undefined.insert(out.undefined.begin(), out.undefined.end());
  }
  CsvTable summary({
      {"n", "sample size"},
      {"renyi_alpha", "Renyi order of the privacy budget"},
      {"epsilon", "total Renyi epsilon (N/A when non-private)"},
      {"mechanism", "gaussian, laplace, identity or nonprivate"},
      {"defined_reps", "repetitions where the mechanism was defined"},
      {"mean_width", "mean total width over defined repetitions"},
      {"coverage", "fraction of defined repetitions covering the true mean"},
  });
  for (const auto& [key, a] : acc) {
    Row row = a.key;
    row.push_back(Fmt(a.defined));
    row.push_back(a.defined == 0 ? std::string(kNotAvailable)
                                 : Fmt(a.width / a.defined));
    row.push_back(truth.has_value() ? Rate(a.covers, a.defined)
                                    : std::string(kNotAvailable));
    RETURN_IF_ERROR(summary.AddRow(std::move(row)));
  }
  ExperimentResult result;
  result.tables.emplace_back("ci_intervals.csv", std::move(intervals));
  result.tables.emplace_back("ci_summary.csv", std::move(summary));
  result.plots.push_back(PlotFile{
      "ci_summary.csv", "ci_width.svg",
      PlotSpec{"Mean interval width vs n", "n", "mean_width",
               {"mechanism", "epsilon"}, true}});
  result.undefined.assign(undefined.begin(), undefined.end());
  return result;
}

// ---------------------------------------------------------------------------
// Sequential monitoring.

namespace {

MonitorConfig ToMonitorConfig(const MonitorExperimentConfig& config,
                              const RenyiBudget& budget, MechanismKind kind) {
  return MonitorConfig{config.threshold, config.alpha, config.batch_size,
                       config.c,         kDefaultPriorAtoms, budget,
                       kind};
}

}  // namespace

absl::Status ValidateMonitorExperimentConfig(
    const MonitorExperimentConfig& config) {
  RETURN_IF_ERROR(CheckPositive(config.runs, "runs"));
  if (config.batches < 0) {
    return absl::InvalidArgumentError("batches must be >= 0");
  }
  RETURN_IF_ERROR(CheckPositive(config.batch_size, "batch size"));
  if (config.change_batch < 0) {
    return absl::InvalidArgumentError("change batch must be >= 0");
  }
  const double after = config.threshold + config.shift;
  if (config.losses_path.empty() && !(after >= 0.0 && after <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "threshold + shift must lie in [0, 1], got %g", after));
  }
  RETURN_IF_ERROR(CheckThreads(config.threads));
  RETURN_IF_ERROR(CheckBudgets({config.renyi_alpha}, config.epsilons,
                               config.mechanisms));
  ASSIGN_OR_RETURN(const RenyiBudget budget,
                   RenyiBudget::Create(config.renyi_alpha,
                                       config.epsilons.front()));
  return ValidateMonitorConfig(
      ToMonitorConfig(config, budget, MechanismKind::kGaussian));
}

namespace {

struct MonitorTrace {
  bool defined = false;
  std::vector<double> log_e;
  std::optional<int64_t> alarm_batch;
};

struct MonitorJobOutput {
  MonitorTrace baseline;
  std::vector<MonitorTrace> combos;
};

std::string Median(std::vector<int64_t> values) {
  if (values.empty()) return kNotAvailable;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return Fmt(values[mid]);
  return Fmt(0.5 * static_cast<double>(values[mid - 1] + values[mid]));
}

}  // namespace

absl::StatusOr<ExperimentResult> RunMonitorExperiment(
    const MonitorExperimentConfig& config, uint64_t seed) {
  RETURN_IF_ERROR(ValidateMonitorExperimentConfig(config));
  const bool user_data = !config.losses_path.empty();
  std::vector<double> losses;
  if (user_data) {
    ASSIGN_OR_RETURN(losses, ReadNumericColumn(config.losses_path, "loss"));
  }
  const int runs = user_data ? 1 : config.runs;
  const int64_t length =
      user_data ? static_cast<int64_t>(losses.size())
                : static_cast<int64_t>(config.batches) * config.batch_size;

  struct Combo {
    double epsilon;
    MechanismKind kind;
    size_t ei;
  };
  std::vector<Combo> combos;
  for (size_t ei = 0; ei < config.epsilons.size(); ++ei) {
    for (MechanismKind kind : config.mechanisms) {
      combos.push_back({config.epsilons[ei], kind, ei});
    }
  }
  auto make_config = [&](double epsilon,
                         MechanismKind kind) -> absl::StatusOr<MonitorConfig> {
    ASSIGN_OR_RETURN(const RenyiBudget budget,
                     RenyiBudget::Create(config.renyi_alpha, epsilon));
    return ToMonitorConfig(config, budget, kind);
  };
  auto trace = [&](const MonitorConfig& mc, absl::Span<const double> stream,
                   RandomStream& rng) -> absl::StatusOr<MonitorTrace> {
    MonitorTrace t;
    auto state = MonitorState::Create(mc);
    if (!state.ok()) {
      if (IsUndefined(state.status())) return t;
      return state.status();
    }
    ASSIGN_OR_RETURN(MonitorState done,
                     Ingest(*std::move(state), stream, mc, rng));
    t.defined = true;
    for (const BatchRecord& record : done.history()) {
      t.log_e.push_back(record.cumulative_log_e);
    }
    t.alarm_batch = done.alarm_batch();
    return t;
  };

  auto run = [&](int r) -> absl::StatusOr<MonitorJobOutput> {
    std::vector<double> stream;
    if (user_data) {
      stream = losses;
    } else {
      RandomStream rng = RandomStream::Derive(
          seed, {kDataStream, static_cast<uint64_t>(r)});
      const ChangepointSpec spec{
          config.threshold, config.threshold + config.shift,
          static_cast<int64_t>(config.change_batch) * config.batch_size};
      ASSIGN_OR_RETURN(stream, Generate(SyntheticSpec{spec, length}, rng));
    }
    MonitorJobOutput out;
    ASSIGN_OR_RETURN(const MonitorConfig identity,
                     make_config(config.epsilons.front(),
                                 MechanismKind::kIdentity));
    RandomStream unused(0);
    ASSIGN_OR_RETURN(out.baseline, trace(identity, stream, unused));
    for (const Combo& combo : combos) {
      ASSIGN_OR_RETURN(const MonitorConfig mc,
                       make_config(combo.epsilon, combo.kind));
      RandomStream rng = RandomStream::Derive(
          seed, {kNoiseStream, static_cast<uint64_t>(r),
                 static_cast<uint64_t>(combo.ei), Tag(combo.kind)});
      ASSIGN_OR_RETURN(MonitorTrace t, trace(mc, stream, rng));
      out.combos.push_back(std::move(t));
    }
    return out;
  };
  const auto outcomes = ParallelMap(runs, run, config.threads);
  RETURN_IF_ERROR(FirstError(outcomes));

  CsvTable batches({
      {"run", "run index"},
      {"renyi_alpha", "Renyi order of the per-batch budget"},
      {"epsilon", "per-batch Renyi epsilon"},
      {"mechanism", "gaussian, laplace or identity"},
      {"batch_index", "0-based batch index"},
      {"private_log_e", "cumulative log of the private e-process"},
      {"nonprivate_log_e", "cumulative log of the non-private e-process"},
      {"alarmed", "1 once the private e-process has crossed 1/alpha"},
  });
  CsvTable trajectory({
      {"batch_index", "0-based batch index"},
      {"epsilon", "per-batch Renyi epsilon (N/A when non-private)"},
      {"mechanism", "gaussian, laplace, identity or nonprivate"},
      {"mean_log_e", "cumulative log e-value averaged over runs"},
  });
  CsvTable summary({
      {"renyi_alpha", "Renyi order of the per-batch budget"},
      {"epsilon", "per-batch Renyi epsilon (N/A when non-private)"},
      {"mechanism", "gaussian, laplace, identity or nonprivate"},
      {"runs", "number of runs"},
      {"defined", "1 if the mechanism could be calibrated"},
      {"alarm_rate", "fraction of runs that ever alarmed"},
      {"prechange_alarm_rate",
       "fraction of runs that alarmed before the change batch"},
      {"median_alarm_batch", "median 0-based alarm batch among alarmed runs"},
      {"within_10_of_nonprivate",
       "among runs where the non-private monitor alarmed, the fraction where "
       "this monitor alarmed at most 10 batches later"},
  });

  ExperimentResult result;
  auto summarize = [&](const std::string& epsilon, const std::string& name,
                       auto get) -> absl::Status {
    const MonitorTrace& first = get(*outcomes[0]);
    if (!first.defined) {
      return summary.AddRow({Fmt(config.renyi_alpha), epsilon, name,
                             Fmt(int64_t{runs}), "0", kNotAvailable,
                             kNotAvailable, kNotAvailable, kNotAvailable});
    }
    int64_t alarms = 0, early = 0, baseline_alarms = 0, close = 0;
    std::vector<int64_t> alarm_batches;
    std::vector<double> mean(first.log_e.size(), 0.0);
    for (const auto& outcome : outcomes) {
      const MonitorTrace& t = get(*outcome);
      for (size_t b = 0; b < t.log_e.size() && b < mean.size(); ++b) {
        mean[b] += t.log_e[b] / runs;
      }
      if (t.alarm_batch.has_value()) {
        ++alarms;
        alarm_batches.push_back(*t.alarm_batch);
        if (*t.alarm_batch < config.change_batch) ++early;
      }
      const auto& base = outcome->baseline.alarm_batch;
      if (base.has_value()) {
        ++baseline_alarms;
        if (t.alarm_batch.has_value() && *t.alarm_batch <= *base + 10) ++close;
      }
    }
    for (size_t b = 0; b < mean.size(); ++b) {
      RETURN_IF_ERROR(trajectory.AddRow(
          {Fmt(static_cast<int64_t>(b)), epsilon, name, Fmt(mean[b])}));
    }
    return summary.AddRow(
        {Fmt(config.renyi_alpha), epsilon, name, Fmt(int64_t{runs}), "1",
         Rate(alarms, runs),
         user_data ? std::string(kNotAvailable) : Rate(early, runs),
         Median(alarm_batches),
         name == kNonPrivate ? std::string(kNotAvailable)
                             : Rate(close, baseline_alarms)});
  };

  if (length > 0) {
    for (int r = 0; r < runs; ++r) {
      const MonitorJobOutput& out = *outcomes[r];
      for (size_t c = 0; c < combos.size(); ++c) {
        const MonitorTrace& t = out.combos[c];
        for (size_t b = 0; b < t.log_e.size(); ++b) {
          const bool alarmed =
              t.alarm_batch.has_value() && static_cast<int64_t>(b) >= *t.alarm_batch;
          RETURN_IF_ERROR(batches.AddRow(
              {Fmt(int64_t{r}), Fmt(config.renyi_alpha),
               Fmt(combos[c].epsilon), MechanismName(combos[c].kind),
               Fmt(static_cast<int64_t>(b)), Fmt(t.log_e[b]),
               Fmt(out.baseline.log_e[b]), alarmed ? "1" : "0"}));
        }
      }
    }
    RETURN_IF_ERROR(summarize(kNotAvailable, kNonPrivate,
                              [](const MonitorJobOutput& o)
                                  -> const MonitorTrace& { return o.baseline; }));
    for (size_t c = 0; c < combos.size(); ++c) {
      if (!outcomes[0]->combos[c].defined) {
        result.undefined.push_back(UndefinedNote(
            config.renyi_alpha, combos[c].epsilon, combos[c].kind));
      }
      RETURN_IF_ERROR(summarize(
          Fmt(combos[c].epsilon), MechanismName(combos[c].kind),
          [c](const MonitorJobOutput& o) -> const MonitorTrace& {
            return o.combos[c];
          }));
    }
  }
  result.tables.emplace_back("monitor_batches.csv", std::move(batches));
  result.tables.emplace_back("monitor_trajectory.csv", std::move(trajectory));
  result.tables.emplace_back("monitor_summary.csv", std::move(summary));
  result.plots.push_back(PlotFile{
      "monitor_trajectory.csv", "monitor_log_e.svg",
      PlotSpec{"Mean cumulative log e-value per batch", "batch_index",
               "mean_log_e", {"mechanism", "epsilon"}, false}});
  return result;
}

// ---------------------------------------------------------------------------
// Conformal prediction.

absl::Status ValidateConformalExperimentConfig(
    const ConformalExperimentConfig& config) {
  if (config.calibration_path.empty() != config.candidates_path.empty()) {
    return absl::InvalidArgumentError(
        "calibration and candidate files must be given together");
  }
  RETURN_IF_ERROR(CheckPositive(config.reps, "reps"));
  RETURN_IF_ERROR(CheckPositive(config.n, "n"));
  RETURN_IF_ERROR(CheckPositive(config.bins, "bins"));
  RETURN_IF_ERROR(CheckPositive(config.test_points, "test points"));
  RETURN_IF_ERROR(CheckLevel(config.alpha, "alpha"));
  RETURN_IF_ERROR(CheckThreads(config.threads));
  if (config.renyi_alphas.empty()) {
    return absl::InvalidArgumentError("at least one Renyi order is required");
  }
  RETURN_IF_ERROR(ValidateBetaScoreModel(config.model));
  return CheckBudgets(config.renyi_alphas, config.epsilons,
                      config.mechanisms);
}

namespace {

struct LabeledCandidates {
  std::string id;
  std::vector<Candidate> candidates;
  int true_index = -1;  // -1 when unknown
};

struct SetStats {
  bool defined = false;
  double size = 0.0;
  double coverage = 0.0;
  double empty = 0.0;
  std::vector<PredictionSet> sets;
};

absl::StatusOr<SetStats> Evaluate(absl::Span<const double> level_log,
                                  const ScoreQuantizer& quantizer,
                                  const std::vector<LabeledCandidates>& points,
                                  double alpha) {
  SetStats stats;
  stats.defined = true;
  for (const LabeledCandidates& point : points) {
    ASSIGN_OR_RETURN(PredictionSet set,
                     PredictSetFromLogValues(level_log, quantizer,
                                             point.candidates, alpha, true));
    stats.size += static_cast<double>(set.included.size());
    stats.empty += set.was_empty ? 1.0 : 0.0;
    if (point.true_index >= 0 &&
        std::find(set.included.begin(), set.included.end(),
                  point.true_index) != set.included.end()) {
      stats.coverage += 1.0;
    }
    stats.sets.push_back(std::move(set));
  }
  const double m = static_cast<double>(points.size());
  stats.size /= m;
  stats.coverage /= m;
  stats.empty /= m;
  return stats;
}

absl::StatusOr<std::vector<LabeledCandidates>> ReadCandidates(
    const std::string& path) {
  ASSIGN_OR_RETURN(const CsvTable table, ReadCsv(path));
  ASSIGN_OR_RETURN(const int id_col, table.ColumnIndex("id"));
  ASSIGN_OR_RETURN(const int label_col, table.ColumnIndex("label"));
  ASSIGN_OR_RETURN(const int score_col, table.ColumnIndex("score"));
  std::vector<LabeledCandidates> points;
  std::map<std::string, size_t> index;
  for (size_t r = 0; r < table.rows().size(); ++r) {
    const Row& row = table.rows()[r];
    auto score = ParseDouble(row[score_col]);
    if (!score.ok()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s row %d: %s", path, r + 1, score.status().message()));
    }
    auto [it, inserted] = index.emplace(row[id_col], points.size());
    if (inserted) points.push_back(LabeledCandidates{row[id_col], {}, -1});
    points[it->second].candidates.push_back(Candidate{row[label_col], *score});
  }
  if (points.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, " contains no candidates"));
  }
  return points;
}

struct ConformalJobOutput {
  SetStats baseline;
  std::vector<SetStats> combos;
};

}  // namespace

absl::StatusOr<ExperimentResult> RunConformalExperiment(
    const ConformalExperimentConfig& config, uint64_t seed) {
  RETURN_IF_ERROR(ValidateConformalExperimentConfig(config));
  const BetaScoreModel& model = config.model;
  ASSIGN_OR_RETURN(const ScoreQuantizer quantizer,
                   ScoreQuantizer::Create(config.bins, model.lo, model.hi));
  const bool user_data = !config.calibration_path.empty();
  std::vector<double> user_scores;
  std::vector<LabeledCandidates> user_points;
  std::vector<double> weights;
  if (user_data) {
    ASSIGN_OR_RETURN(user_scores,
                     ReadNumericColumn(config.calibration_path, "score"));
    ASSIGN_OR_RETURN(user_points, ReadCandidates(config.candidates_path));
  } else {
    ASSIGN_OR_RETURN(weights, ModelBinWeights(model, quantizer, true));
  }
  const int reps = user_data ? 1 : config.reps;

  struct Combo {
    double renyi_alpha;
    double epsilon;
    MechanismKind kind;
    size_t ai;
    size_t ei;
  };
  std::vector<Combo> combos;
  for (size_t ai = 0; ai < config.renyi_alphas.size(); ++ai) {
    for (size_t ei = 0; ei < config.epsilons.size(); ++ei) {
      for (MechanismKind kind : config.mechanisms) {
        combos.push_back({config.renyi_alphas[ai], config.epsilons[ei], kind,
                          ai, ei});
      }
    }
  }

  auto run = [&](int rep) -> absl::StatusOr<ConformalJobOutput> {
    const uint64_t r = static_cast<uint64_t>(rep);
    std::optional<CalibrationScores> calib;
    std::vector<LabeledCandidates> points;
    if (user_data) {
      ASSIGN_OR_RETURN(calib, CalibrationScores::Create(quantizer, user_scores));
      points = user_points;
    } else {
      RandomStream data_rng = RandomStream::Derive(seed, {kDataStream, r});
      ASSIGN_OR_RETURN(
          const std::vector<double> bins,
          Generate(SyntheticSpec{ScoreMixtureSpec{weights}, config.n},
                   data_rng));
      std::vector<double> values;
      values.reserve(bins.size());
      for (double b : bins) values.push_back(quantizer.center(static_cast<int>(b)));
      ASSIGN_OR_RETURN(calib, CalibrationScores::FromValues(std::move(values)));
      RandomStream test_rng = RandomStream::Derive(seed, {kTestStream, r});
      for (int t = 0; t < config.test_points; ++t) {
        const auto [truth, other] = SampleScorePair(model, test_rng);
        points.push_back(LabeledCandidates{
            Fmt(int64_t{t}), {Candidate{"1", truth}, Candidate{"0", other}}, 0});
      }
    }
    ConformalJobOutput out;
    ASSIGN_OR_RETURN(const RenyiBudget reference,
                     RenyiBudget::Create(config.renyi_alphas.front(),
                                         config.epsilons.front()));
    RandomStream unused(0);
    ASSIGN_OR_RETURN(const PrivateLevelEValues exact,
                     PrivatizeLevels(*calib, quantizer, reference,
                                     MechanismKind::kIdentity, unused));
    ASSIGN_OR_RETURN(out.baseline, Evaluate(exact.non_private_log, quantizer,
                                            points, config.alpha));
    for (const Combo& combo : combos) {
      ASSIGN_OR_RETURN(const RenyiBudget budget,
                       RenyiBudget::Create(combo.renyi_alpha, combo.epsilon));
      RandomStream rng = RandomStream::Derive(
          seed, {kNoiseStream, r, static_cast<uint64_t>(combo.ai),
                 static_cast<uint64_t>(combo.ei), Tag(combo.kind)});
      auto levels = PrivatizeLevels(*calib, quantizer, budget, combo.kind, rng);
      if (!levels.ok()) {
        if (!IsUndefined(levels.status())) return levels.status();
        out.combos.push_back(SetStats{});
        continue;
      }
      std::vector<double> level_log;
      level_log.reserve(levels->levels.size());
      for (const PrivateEValue& e : levels->levels) {
        level_log.push_back(e.log_value());
      }
      ASSIGN_OR_RETURN(SetStats stats,
                       Evaluate(level_log, quantizer, points, config.alpha));
      out.combos.push_back(std::move(stats));
    }
    return out;
  };
  const auto outcomes = ParallelMap(reps, run, config.threads);
  RETURN_IF_ERROR(FirstError(outcomes));

  const std::vector<CsvColumn> rep_columns = {
      {"rep", "repetition index"},
      {"renyi_alpha", "Renyi order of the budget (N/A when non-private)"},
      {"epsilon", "total Renyi epsilon over all levels (N/A when non-private)"},
      {"mechanism", "gaussian, laplace, identity or nonprivate"},
      {"status", "ok, or undefined when the mechanism cannot be calibrated"},
      {"avg_set_size", "mean prediction set size over test points"},
      {"coverage", "fraction of test points whose true label is included"},
      {"empty_rate", "fraction of test points whose set was empty before the "
                     "singleton fallback"},
  };
  CsvTable rep_table(rep_columns);
  CsvTable summary({
      {"renyi_alpha", "Renyi order of the budget (N/A when non-private)"},
      {"epsilon", "total Renyi epsilon over all levels (N/A when non-private)"},
      {"mechanism", "gaussian, laplace, identity or nonprivate"},
      {"defined_reps", "repetitions where the mechanism was defined"},
      {"avg_set_size", "mean prediction set size"},
      {"coverage", "marginal coverage of the true label (N/A when unknown)"},
      {"coverage_se", "binomial standard error of the coverage"},
      {"empty_rate", "fraction of empty sets before the singleton fallback"},
  });
  CsvTable sizes({
      {"epsilon", "total Renyi epsilon over all levels"},
      {"renyi_alpha", "Renyi order of the budget"},
      {"mechanism", "gaussian, laplace, identity or nonprivate"},
      {"avg_set_size", "mean prediction set size (N/A when undefined)"},
  });

  struct Totals {
    int64_t defined = 0;
    double size = 0.0;
    double coverage = 0.0;
    double empty = 0.0;
  };
  auto add = [&](Totals& totals, int rep, const std::string& ra,
                 const std::string& eps, const std::string& name,
                 const SetStats& stats) -> absl::Status {
    if (!stats.defined) {
      return rep_table.AddRow({Fmt(int64_t{rep}), ra, eps, name, "undefined",
                               kNotAvailable, kNotAvailable, kNotAvailable});
    }
    ++totals.defined;
    totals.size += stats.size;
    totals.coverage += stats.coverage;
    totals.empty += stats.empty;
    return rep_table.AddRow(
        {Fmt(int64_t{rep}), ra, eps, name, "ok", Fmt(stats.size),
         user_data ? std::string(kNotAvailable) : Fmt(stats.coverage),
         Fmt(stats.empty)});
  };
  auto summarize = [&](const std::string& ra, const std::string& eps,
                       const std::string& name,
                       const Totals& totals) -> absl::Status {
    if (totals.defined == 0) {
      return summary.AddRow({ra, eps, name, "0", kNotAvailable, kNotAvailable,
                             kNotAvailable, kNotAvailable});
    }
    const double d = static_cast<double>(totals.defined);
    const double coverage = totals.coverage / d;
    const double trials = d * (user_data ? 1 : config.test_points);
    const double se = std::sqrt(coverage * (1.0 - coverage) / trials);
    return summary.AddRow(
        {ra, eps, name, Fmt(totals.defined), Fmt(totals.size / d),
         user_data ? std::string(kNotAvailable) : Fmt(coverage),
         user_data ? std::string(kNotAvailable) : Fmt(se),
         Fmt(totals.empty / d)});
  };

  Totals baseline;
  std::vector<Totals> totals(combos.size());
  for (int rep = 0; rep < reps; ++rep) {
    const ConformalJobOutput& out = *outcomes[rep];
    RETURN_IF_ERROR(add(baseline, rep, kNotAvailable, kNotAvailable,
                        kNonPrivate, out.baseline));
    for (size_t c = 0; c < combos.size(); ++c) {
      RETURN_IF_ERROR(add(totals[c], rep, Fmt(combos[c].renyi_alpha),
                          Fmt(combos[c].epsilon),
                          MechanismName(combos[c].kind), out.combos[c]));
    }
  }
  RETURN_IF_ERROR(
      summarize(kNotAvailable, kNotAvailable, kNonPrivate, baseline));
  ExperimentResult result;
  for (size_t c = 0; c < combos.size(); ++c) {
    RETURN_IF_ERROR(summarize(Fmt(combos[c].renyi_alpha),
                              Fmt(combos[c].epsilon),
                              MechanismName(combos[c].kind), totals[c]));
    if (totals[c].defined < reps) {
      result.undefined.push_back(UndefinedNote(
          combos[c].renyi_alpha, combos[c].epsilon, combos[c].kind));
    }
  }
  // The non-private size is repeated at every epsilon so it plots as a
  // reference line.
  const double baseline_size = baseline.size / baseline.defined;
  for (double ra : config.renyi_alphas) {
    for (double eps : config.epsilons) {
      RETURN_IF_ERROR(sizes.AddRow(
          {Fmt(eps), Fmt(ra), kNonPrivate, Fmt(baseline_size)}));
    }
  }
  for (size_t c = 0; c < combos.size(); ++c) {
    RETURN_IF_ERROR(sizes.AddRow(
        {Fmt(combos[c].epsilon), Fmt(combos[c].renyi_alpha),
         MechanismName(combos[c].kind),
         totals[c].defined == 0
             ? std::string(kNotAvailable)
             : Fmt(totals[c].size / static_cast<double>(totals[c].defined))}));
  }

  result.tables.emplace_back("conformal_reps.csv", std::move(rep_table));
  result.tables.emplace_back("conformal_summary.csv", std::move(summary));
  result.tables.emplace_back("conformal_sizes.csv", std::move(sizes));
  if (user_data) {
    const ConformalJobOutput& out = *outcomes[0];
    auto predictions = [&](const SetStats& stats) -> absl::StatusOr<CsvTable> {
      CsvTable table({{"id", "test point identifier"},
                      {"label", "candidate label"},
                      {"included", "1 if the label is in the prediction set"}});
      for (size_t i = 0; i < user_points.size(); ++i) {
        const LabeledCandidates& point = user_points[i];
        for (size_t k = 0; k < point.candidates.size(); ++k) {
          const auto& inc = stats.sets[i].included;
          const bool in = std::find(inc.begin(), inc.end(),
                                    static_cast<int>(k)) != inc.end();
          RETURN_IF_ERROR(table.AddRow(
              {point.id, point.candidates[k].label, in ? "1" : "0"}));
        }
      }
      return table;
    };
    ASSIGN_OR_RETURN(CsvTable base_table, predictions(out.baseline));
    result.tables.emplace_back("conformal_predictions_nonprivate.csv",
                               std::move(base_table));
    for (size_t c = 0; c < combos.size(); ++c) {
      if (!out.combos[c].defined) continue;
      ASSIGN_OR_RETURN(CsvTable table, predictions(out.combos[c]));
      result.tables.emplace_back(
          absl::StrFormat("conformal_predictions_%s_ra%s_eps%s.csv",
                          MechanismName(combos[c].kind),
                          Fmt(combos[c].renyi_alpha), Fmt(combos[c].epsilon)),
          std::move(table));
    }
  }
  result.plots.push_back(PlotFile{
      "conformal_sizes.csv", "conformal_sizes.svg",
      PlotSpec{"Average prediction set size vs epsilon", "epsilon",
               "avg_set_size", {"mechanism", "renyi_alpha"}, true}});
  return result;
}

}  // namespace evdp::harness
