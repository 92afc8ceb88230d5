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

// adasq: run seeded adaptive-query experiments, the exact discrete oracle
// sweep, or print bound calculator values.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "adasq/errors.h"
#include "adasq/harness.h"
#include "adasq/mechanisms.h"
#include "adasq/oracle.h"
#include "adasq/stability.h"

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::string out = "adasq_out";
  std::string format = "json";
  std::optional<std::size_t> threads;
};

struct VerifyArgs {
  std::size_t mechanisms = 100;
  std::size_t trials = 3;
  std::uint64_t seed = 1;
};

struct BoundsArgs {
  std::size_t n = 0;
  std::size_t k = 0;
  std::optional<double> t;
  std::optional<double> T;
  std::optional<double> epsilon;
  std::optional<double> tau;
  double delta = 0.05;
  double lambda = 1.0;
  std::optional<double> emp_mean;
};

void PrintValue(const std::string& name, double value) {
  std::cout << std::left << std::setw(28) << name << std::setprecision(10)
            << value << "\n";
}

int Run(const RunArgs& args) {
  adasq::ExperimentConfig config =
      adasq::ConfigFromJson(adasq::ReadTextFile(args.config));
  if (args.trials) config.trials = *args.trials;
  if (args.seed) config.seed = *args.seed;
  if (args.threads) config.threads = *args.threads;
  const adasq::ReportFormat format = adasq::ParseReportFormat(args.format);
  const adasq::ExperimentReport report = adasq::RunExperiment(config);
  for (const auto& path : adasq::EmitReport(report, format, args.out)) {
    std::cout << "wrote " << path.string() << "\n";
  }
  const auto& s = report.summary;
  std::cout << "mode " << report.mode << ", tau " << report.tau << ", trials "
            << report.trials.size() << "\n";
  if (s.mean_max_scaled_error) {
    std::cout << "mean max scaled error " << *s.mean_max_scaled_error;
    if (s.se_max_scaled_error) std::cout << " +- " << *s.se_max_scaled_error;
    std::cout << "\n";
  }
  if (s.max_epsilon) std::cout << "max ledger epsilon " << *s.max_epsilon << "\n";
  if (!report.ledger_within_cap) {
    std::cout << "ledger exceeded the per-answer cap\n";
    return 1;
  }
  return 0;
}

int Verify(const VerifyArgs& args) {
  const adasq::SweepReport sweep =
      adasq::RunOracleSweep(args.mechanisms, args.trials, args.seed);
  std::cout << "mechanisms " << sweep.mechanisms << ", priors "
            << sweep.priors << ", events " << sweep.events_checked
            << ", violations " << sweep.violations.size() << "\n";
  for (const std::string& v : sweep.violations) std::cout << "  " << v << "\n";
  return sweep.ok() ? 0 : 1;
}

int Bounds(const BoundsArgs& args) {
  if (args.t.has_value() != args.T.has_value()) {
    throw adasq::ConfigError("--t and --T go together");
  }
  double t = 0.0, T = 0.0;
  if (args.t) {
    t = *args.t;
    T = *args.T;
    adasq::CalibrationParams{t, T, args.n, args.k}.Validate();
  } else {
    const adasq::TheoremParams tp = adasq::ParamsFromMainTheorem(args.n, args.k);
    t = tp.params.t;
    T = tp.params.T;
  }
  const double n = static_cast<double>(args.n);
  const double per_answer = adasq::AlklBoundFormula(args.n, t, T);
  const bool regime = adasq::InStabilityRegime(args.n, t, T);
  const double eps = args.epsilon.value_or(
      args.t ? static_cast<double>(args.k) * per_answer
             : static_cast<double>(args.k) * t / (n * n));
  const double tau = args.tau.value_or(args.t ? std::sqrt(eps)
                                              : adasq::ReferenceTau(args.n, args.k));
  PrintValue("n", n);
  PrintValue("k", static_cast<double>(args.k));
  PrintValue("t", t);
  PrintValue("T", T);
  PrintValue("per_answer_alkl_bound", per_answer);
  std::cout << std::left << std::setw(28) << "in_stability_regime"
            << (regime ? "true" : "false") << "\n";
  if (regime) PrintValue("per_answer_cap", std::max(t, T / t) / (n * n));
  PrintValue("epsilon", eps);
  PrintValue("tau", tau);
  const adasq::BoundReport b = adasq::MakeBoundReport(eps, args.n, args.k, tau);
  PrintValue("mi_bound", b.mi_bound);
  PrintValue("gen_expectation", b.gen_expectation);
  PrintValue("emp_variance_factor", b.emp_variance_factor);
  PrintValue("event_prob(delta)", adasq::EventProbBound(b.mi_bound, args.delta));
  if (args.emp_mean) {
    PrintValue("pac_bayes", adasq::PacBayesBound(*args.emp_mean, b.mi_bound,
                                                 args.n, args.lambda));
  }
  for (const adasq::TailLevel& level : b.tail) {
    std::ostringstream name;
    name << "tail(beta=" << level.beta << ")";
    PrintValue(name.str(), level.probability_bound);
  }
  PrintValue("gauss_max", b.gauss_max);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive statistical queries: experiments, oracle, bounds"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a seeded experiment");
  run_cmd->add_option("--config", run.config, "JSON experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--trials", run.trials, "Override the trial count");
  run_cmd->add_option("--seed", run.seed, "Override the base seed");
  run_cmd->add_option("--out", run.out, "Output directory")
      ->capture_default_str();
  run_cmd->add_option("--format", run.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  run_cmd->add_option("--threads", run.threads, "Worker threads");

  VerifyArgs verify;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Exact oracle sweep on tiny mechanisms");
  verify_cmd->add_option("--mechanisms", verify.mechanisms,
                         "Random kernels in the sweep")
      ->capture_default_str();
  verify_cmd->add_option("--trials", verify.trials, "Priors per mechanism")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed)->capture_default_str();

  BoundsArgs bounds;
  CLI::App* bounds_cmd =
      app.add_subcommand("bounds", "Print every bound calculator value");
  bounds_cmd->add_option("--n", bounds.n)->required();
  bounds_cmd->add_option("--k", bounds.k)->required();
  bounds_cmd->add_option("--t", bounds.t, "Explicit t (with --T)");
  bounds_cmd->add_option("--T", bounds.T, "Explicit T (with --t)");
  bounds_cmd->add_option("--epsilon", bounds.epsilon, "Override epsilon");
  bounds_cmd->add_option("--tau", bounds.tau, "Override tau");
  bounds_cmd->add_option("--delta", bounds.delta)->capture_default_str();
  bounds_cmd->add_option("--lambda", bounds.lambda)->capture_default_str();
  bounds_cmd->add_option("--emp-mean", bounds.emp_mean,
                         "Empirical mean for the PAC-Bayes bound");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return Run(run);
    if (*verify_cmd) return Verify(verify);
    return Bounds(bounds);
  } catch (const adasq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
