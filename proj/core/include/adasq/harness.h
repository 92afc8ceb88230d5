// Copyright 2026 The adasq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded Monte Carlo experiments over the analyst/mechanism interaction, and
// their CSV / JSON reports.

#ifndef ADASQ_HARNESS_H_
#define ADASQ_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adasq/stability.h"

namespace adasq {

struct MechanismConfig {
  // calibrated | empirical | fixed_gaussian | split
  std::string kind = "calibrated";
  // Calibrated only. Both set selects explicit mode, both unset selects
  // theorem mode.
  std::optional<double> t;
  std::optional<double> T;
  // fixed_gaussian only.
  double sd = 0.0;
};

struct AnalystConfig {
  // scripted | random_queries | correlation_attack | low_variance
  std::string kind = "random_queries";
  // Number of data attributes the analyst works with. Defaults to truth.d.
  std::size_t d = 0;
  // correlation_attack: selection threshold on |2 v - 1|. Defaults to
  // 2 / sqrt(n).
  std::optional<double> threshold;
  // low_variance: assumed attribute bias. Defaults to truth.p.
  std::optional<double> p0;
  // scripted: coordinates read, in order.
  std::vector<std::size_t> coords;
};

struct TruthConfig {
  // uniform_bits | bernoulli_bits
  std::string kind = "uniform_bits";
  std::size_t d = 0;
  double p = 0.5;
};

struct ExperimentConfig {
  std::size_t n = 0;
  std::size_t k = 0;
  MechanismConfig mechanism;
  AnalystConfig analyst;
  TruthConfig truth;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  // Execution only: never part of the report.
  std::size_t threads = 1;
};

// Parses a JSON config. Unknown keys and wrong types raise ConfigError.
ExperimentConfig ConfigFromJson(const std::string& text);
// Compact JSON echo of the experiment-defining fields (threads excluded).
std::string ConfigToJson(const ExperimentConfig& config);

// Checks consistency and fills defaults. Throws ConfigError (or
// RegimeError for theorem mode with n or k below 20).
ExperimentConfig ResolveConfig(ExperimentConfig config);

struct QueryRecord {
  std::size_t j = 0;
  double answer = 0.0;
  double true_mean = 0.0;
  double true_sd = 0.0;
  double raw_error = 0.0;
  double scaled_error = 0.0;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  // 0 for an empty transcript.
  double max_scaled_error = 0.0;
  std::optional<std::size_t> monitor_index;
  std::optional<double> final_scaled_error;
  // Ledger total; unset for mechanisms without finite accounting.
  std::optional<double> epsilon;
  std::vector<QueryRecord> queries;
};

struct QueryQuantiles {
  std::size_t j = 0;
  std::size_t count = 0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
};

struct ExperimentSummary {
  std::optional<double> mean_max_scaled_error;
  std::optional<double> se_max_scaled_error;
  std::optional<double> mean_final_scaled_error;
  std::optional<double> se_final_scaled_error;
  std::optional<double> mean_epsilon;
  std::optional<double> max_epsilon;
  std::vector<QueryQuantiles> per_query;
};

struct ExperimentReport {
  ExperimentConfig config;  // resolved
  // theorem | explicit | baseline
  std::string mode;
  double tau = 0.0;
  std::optional<double> t;
  std::optional<double> T;
  std::optional<double> epsilon_theory;
  bool in_stability_regime = false;
  // k max(t, T/t) / n^2, set in the stability regime.
  std::optional<double> ledger_cap;
  bool ledger_within_cap = true;
  std::optional<BoundReport> bounds;
  std::vector<TrialRecord> trials;
  ExperimentSummary summary;
};

// Runs config.trials independent trials. Trial i uses seed
// DeriveSeed(config.seed, i); the report does not depend on config.threads.
ExperimentReport RunExperiment(const ExperimentConfig& config);

// Linear-interpolation quantile of unsorted data, q in [0, 1].
double Quantile(std::vector<double> data, double q);

std::string ReportToJson(const ExperimentReport& report);
ExperimentReport ReportFromJson(const std::string& text);
// trial,seed,max_scaled_error,epsilon
std::string TrialsCsv(const ExperimentReport& report);
// trial,j,raw_error,true_sd,scaled_error
std::string QueriesCsv(const ExperimentReport& report);

enum class ReportFormat { kCsv, kJson };

ReportFormat ParseReportFormat(const std::string& name);

// Writes trials.csv and queries.csv, or report.json, under `dir` (created
// if missing). Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> EmitReport(const ExperimentReport& report,
                                              ReportFormat format,
                                              const std::filesystem::path& dir);

std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace adasq

#endif  // ADASQ_HARNESS_H_
