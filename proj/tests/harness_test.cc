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

#include "adasq/harness.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "adasq/analysts.h"
#include "adasq/errors.h"
#include "adasq/mechanisms.h"
#include "adasq/stability.h"

namespace adasq {
namespace {

namespace fs = std::filesystem;

ExperimentConfig Scripted(std::size_t n, std::size_t k, std::size_t trials) {
  ExperimentConfig c;
  c.n = n;
  c.k = k;
  c.mechanism.kind = "empirical";
  c.analyst.kind = "scripted";
  for (std::size_t j = 0; j < k; ++j) c.analyst.coords.push_back(j % 4);
  c.truth.d = 4;
  c.trials = trials;
  c.seed = 99;
  return c;
}

ExperimentConfig TheoremRandom(std::size_t trials) {
  ExperimentConfig c;
  c.n = 100;
  c.k = 20;
  c.truth.d = 10;
  c.trials = trials;
  c.seed = 5;
  return c;
}

std::size_t CountLines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path ScratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("adasq_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(RunExperimentTest, ZeroQueries) {
  ExperimentConfig c;
  c.n = 20;
  c.k = 0;
  c.mechanism.t = 1.0;
  c.mechanism.T = 1.0;
  c.analyst.kind = "scripted";
  c.truth.d = 3;
  const ExperimentReport r = RunExperiment(c);
  EXPECT_EQ(r.mode, "explicit");
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_TRUE(r.trials[0].queries.empty());
  EXPECT_EQ(r.trials[0].max_scaled_error, 0.0);
  ASSERT_TRUE(r.trials[0].epsilon.has_value());
  EXPECT_EQ(*r.trials[0].epsilon, 0.0);
  EXPECT_EQ(r.epsilon_theory.value_or(-1), 0.0);
}

TEST(RunExperimentTest, EmpiricalScriptedIsReproducible) {
  const ExperimentConfig c = Scripted(500, 6, 5);
  const ExperimentReport a = RunExperiment(c), b = RunExperiment(c);
  EXPECT_EQ(a.mode, "baseline");
  ASSERT_TRUE(a.summary.mean_max_scaled_error.has_value());
  EXPECT_TRUE(std::isfinite(*a.summary.mean_max_scaled_error));
  EXPECT_EQ(ReportToJson(a), ReportToJson(b));
  ExperimentConfig other = c;
  other.seed = 100;
  EXPECT_NE(ReportToJson(a), ReportToJson(RunExperiment(other)));
}

TEST(RunExperimentTest, EmpiricalAnswersAreSampleMeans) {
  const ExperimentConfig c = Scripted(50, 4, 3);
  const ExperimentReport r = RunExperiment(c);
  for (const TrialRecord& trial : r.trials) {
    for (const QueryRecord& q : trial.queries) {
      // Bits: a sample mean over 50 records is a multiple of 1/50.
      EXPECT_NEAR(q.answer * 50, std::round(q.answer * 50), 1e-9);
      EXPECT_DOUBLE_EQ(q.true_mean, 0.5);
      EXPECT_DOUBLE_EQ(q.raw_error, q.answer - q.true_mean);
    }
  }
}

TEST(RunExperimentTest, TheoremModeBudget) {
  const ExperimentReport r = RunExperiment(TheoremRandom(20));
  EXPECT_EQ(r.mode, "theorem");
  ASSERT_TRUE(r.epsilon_theory.has_value());
  EXPECT_NEAR(r.tau * r.tau, *r.epsilon_theory, 1e-12);
  EXPECT_NEAR(*r.epsilon_theory, 0.121472, 1e-6);
  EXPECT_TRUE(r.in_stability_regime);
  EXPECT_TRUE(r.ledger_within_cap);
  ASSERT_TRUE(r.bounds.has_value());
  for (const TrialRecord& t : r.trials) {
    ASSERT_TRUE(t.epsilon.has_value());
    EXPECT_LE(*t.epsilon, *r.ledger_cap);
    EXPECT_EQ(t.queries.size(), 20u);
    double worst = 0.0;
    for (const QueryRecord& q : t.queries) worst = std::max(worst, q.scaled_error);
    EXPECT_EQ(t.max_scaled_error, worst);
  }
}

TEST(RunExperimentTest, LedgerIsSumOfExactAlkl) {
  ExperimentConfig c = Scripted(40, 5, 3);
  c.mechanism.kind = "calibrated";
  c.mechanism.t = 8.0;
  c.mechanism.T = 30.0;
  const ExperimentReport r = RunExperiment(c);
  const BernoulliBitsTruth truth(4, 0.5);
  for (const TrialRecord& t : r.trials) {
    // The data stream is stream 0 under the trial seed.
    std::mt19937_64 rng(DeriveSeed(t.seed, 0));
    const Dataset data = truth.SampleDataset(40, rng);
    double total = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      total += AlklOneAnswerExact(data, CoordinateQuery(j % 4), 8.0, 30.0);
    }
    EXPECT_NEAR(*t.epsilon, total, 1e-15);
    EXPECT_LE(*t.epsilon, 5 * AlklBoundFormula(40, 8.0, 30.0));
  }
}

TEST(RunExperimentTest, ParallelMatchesSerial) {
  ExperimentConfig c = TheoremRandom(24);
  const std::string serial = ReportToJson(RunExperiment(c));
  c.threads = 4;
  EXPECT_EQ(ReportToJson(RunExperiment(c)), serial);
  EXPECT_EQ(TrialsCsv(RunExperiment(c)), TrialsCsv(RunExperiment(TheoremRandom(24))));
}

TEST(RunExperimentTest, ConfigErrorsBeforeTrials) {
  ExperimentConfig c = TheoremRandom(1);
  c.n = 19;
  EXPECT_THROW(RunExperiment(c), RegimeError);
  c = TheoremRandom(1);
  c.mechanism.t = 2.0;  // T missing
  EXPECT_THROW(RunExperiment(c), ConfigError);
  c = TheoremRandom(1);
  c.analyst.kind = "psychic";
  EXPECT_THROW(RunExperiment(c), ConfigError);
  c = TheoremRandom(1);
  c.truth.kind = "gaussian";
  EXPECT_THROW(RunExperiment(c), ConfigError);
  c = Scripted(30, 3, 1);
  c.analyst.coords = {0, 9, 1};
  EXPECT_THROW(RunExperiment(c), ConfigError);
  c = Scripted(30, 3, 1);
  c.mechanism.kind = "split";
  c.k = 40;
  c.analyst.coords.assign(40, 0);
  EXPECT_THROW(RunExperiment(c), ConfigError);
}

TEST(ConfigTest, JsonRoundTripAndStrictKeys) {
  const ExperimentConfig c = ConfigFromJson(
      R"({"n": 20, "k": 5, "mechanism": {"kind": "calibrated", "t": 1.0, "T": 2.0},
          "analyst": {"kind": "scripted", "coords": [0, 1]},
          "truth": {"kind": "bernoulli_bits", "d": 5, "p": 0.25},
          "trials": 3, "seed": 18446744073709551615})");
  EXPECT_EQ(c.n, 20u);
  EXPECT_EQ(c.mechanism.T.value_or(0), 2.0);
  EXPECT_EQ(c.truth.p, 0.25);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_EQ(ConfigToJson(ConfigFromJson(ConfigToJson(c))), ConfigToJson(c));
  EXPECT_THROW(ConfigFromJson(R"({"n": 20, "k": 5, "colour": 1})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"n": 20, "k": 5, "mechanism": {"tt": 1}})"),
               ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"n": -3, "k": 5})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"n": 2.5, "k": 5})"), ConfigError);
  EXPECT_THROW(ConfigFromJson("{not json"), ConfigError);
}

TEST(ReportTest, CsvRowCounts) {
  const ExperimentReport r = RunExperiment(Scripted(100, 3, 2));
  const std::string trials = TrialsCsv(r), queries = QueriesCsv(r);
  // Two comment lines, a column header, then the data rows.
  EXPECT_EQ(CountLines(trials), 3u + 2u);
  EXPECT_EQ(CountLines(queries), 3u + 2u * 3u);
  EXPECT_EQ(trials.rfind("# config: ", 0), 0u);
  EXPECT_NE(trials.find("\ntrial,seed,max_scaled_error,epsilon\n"), std::string::npos);
  EXPECT_NE(queries.find("\ntrial,j,raw_error,true_sd,scaled_error\n"),
            std::string::npos);

  ExperimentReport empty = r;
  empty.trials.clear();
  EXPECT_EQ(CountLines(TrialsCsv(empty)), 3u);
  EXPECT_EQ(CountLines(QueriesCsv(empty)), 3u);
}

TEST(ReportTest, JsonRoundTripIsByteIdentical) {
  for (const ExperimentConfig& c :
       {Scripted(100, 3, 2), TheoremRandom(4)}) {
    const std::string first = ReportToJson(RunExperiment(c));
    EXPECT_EQ(ReportToJson(ReportFromJson(first)), first);
  }
}

TEST(ReportTest, EmitWritesFilesAndReportsPaths) {
  const ExperimentReport r = RunExperiment(Scripted(100, 2, 2));
  const fs::path dir = ScratchDir("emit");
  const auto csv = EmitReport(r, ReportFormat::kCsv, dir / "nested");
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(ReadTextFile(csv[0]), TrialsCsv(r));
  EXPECT_EQ(ReadTextFile(csv[1]), QueriesCsv(r));
  const auto json = EmitReport(r, ReportFormat::kJson, dir);
  ASSERT_EQ(json.size(), 1u);
  EXPECT_EQ(ReadTextFile(json[0]), ReportToJson(r));

  // A regular file where the output directory should be.
  const fs::path blocker = dir / "blocker";
  EmitReport(r, ReportFormat::kJson, dir);
  { std::ofstream(blocker) << "x"; }
  try {
    EmitReport(r, ReportFormat::kCsv, blocker);
    ADD_FAILURE() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("blocker"), std::string::npos);
  }
  EXPECT_THROW(ReadTextFile(dir / "missing.json"), IoError);
  EXPECT_THROW(ParseReportFormat("xml"), ConfigError);
  EXPECT_EQ(ParseReportFormat("csv"), ReportFormat::kCsv);
  fs::remove_all(dir);
}

TEST(QuantileTest, LinearInterpolation) {
  EXPECT_EQ(Quantile({3.0}, 0.9), 3.0);
  EXPECT_EQ(Quantile({4.0, 1.0, 3.0, 2.0}, 0.0), 1.0);
  EXPECT_EQ(Quantile({4.0, 1.0, 3.0, 2.0}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(Quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile({0.0, 10.0}, 0.9), 9.0);
}

}  // namespace
}  // namespace adasq
