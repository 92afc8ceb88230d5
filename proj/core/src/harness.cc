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

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <system_error>
#include <thread>
#include <utility>

#include "adasq/analysts.h"
#include "adasq/core.h"
#include "adasq/errors.h"
#include "adasq/mechanisms.h"
#include "json.hpp"

namespace adasq {
namespace {

using Json = nlohmann::ordered_json;

// Stream ids under a trial seed.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kAnalystStream = 1;
constexpr std::uint64_t kMechanismStream = 2;

// Relative slack for the ledger-vs-cap comparison (running float sums).
constexpr double kCapSlack = 1e-12;

const std::set<std::string> kMechanismKinds = {"calibrated", "empirical",
                                               "fixed_gaussian", "split"};
const std::set<std::string> kAnalystKinds = {
    "scripted", "random_queries", "correlation_attack", "low_variance"};
const std::set<std::string> kTruthKinds = {"uniform_bits", "bernoulli_bits"};

// ---- JSON reading helpers ----

void RejectUnknownKeys(const Json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

const Json& RequireObject(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  return j;
}

std::size_t ReadCount(const Json& j, const std::string& key) {
  if (!j.is_number_unsigned()) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::uint64_t ReadU64(const Json& j, const std::string& key) {
  if (!j.is_number_unsigned()) {
    throw ConfigError("'" + key + "' must be an unsigned 64-bit integer");
  }
  return j.get<std::uint64_t>();
}

double ReadNumber(const Json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

std::string ReadString(const Json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
  return j.get<std::string>();
}

Json Number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json Optional(const std::optional<double>& x) {
  return x ? Number(*x) : Json(nullptr);
}

std::optional<double> ReadOptional(const Json& obj, const char* key) {
  const Json& j = obj.at(key);
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

// ---- config ----

Json ConfigJson(const ExperimentConfig& c) {
  Json mech = {{"kind", c.mechanism.kind}};
  if (c.mechanism.t) mech["t"] = *c.mechanism.t;
  if (c.mechanism.T) mech["T"] = *c.mechanism.T;
  if (c.mechanism.kind == "fixed_gaussian") mech["sd"] = c.mechanism.sd;
  Json analyst = {{"kind", c.analyst.kind}, {"d", c.analyst.d}};
  if (c.analyst.threshold) analyst["threshold"] = *c.analyst.threshold;
  if (c.analyst.p0) analyst["p0"] = *c.analyst.p0;
  if (c.analyst.kind == "scripted") analyst["coords"] = c.analyst.coords;
  Json truth = {{"kind", c.truth.kind}, {"d", c.truth.d}, {"p", c.truth.p}};
  return Json{{"n", c.n},         {"k", c.k},
              {"mechanism", mech}, {"analyst", analyst},
              {"truth", truth},   {"trials", c.trials},
              {"seed", c.seed}};
}

ExperimentConfig ConfigFromJsonValue(const Json& root) {
  RequireObject(root, "config");
  RejectUnknownKeys(root,
                    {"n", "k", "mechanism", "analyst", "truth", "trials",
                     "seed", "threads"},
                    "config");
  ExperimentConfig c;
  if (!root.contains("n") || !root.contains("k")) {
    throw ConfigError("config needs 'n' and 'k'");
  }
  c.n = ReadCount(root["n"], "n");
  c.k = ReadCount(root["k"], "k");
  if (root.contains("trials")) c.trials = ReadCount(root["trials"], "trials");
  if (root.contains("seed")) c.seed = ReadU64(root["seed"], "seed");
  if (root.contains("threads")) {
    c.threads = ReadCount(root["threads"], "threads");
  }
  if (root.contains("mechanism")) {
    const Json& m = RequireObject(root["mechanism"], "mechanism");
    RejectUnknownKeys(m, {"kind", "t", "T", "sd"}, "mechanism");
    if (m.contains("kind")) c.mechanism.kind = ReadString(m["kind"], "kind");
    if (m.contains("t")) c.mechanism.t = ReadNumber(m["t"], "t");
    if (m.contains("T")) c.mechanism.T = ReadNumber(m["T"], "T");
    if (m.contains("sd")) c.mechanism.sd = ReadNumber(m["sd"], "sd");
  }
  if (root.contains("analyst")) {
    const Json& a = RequireObject(root["analyst"], "analyst");
    RejectUnknownKeys(a, {"kind", "d", "threshold", "p0", "coords"},
                      "analyst");
    if (a.contains("kind")) c.analyst.kind = ReadString(a["kind"], "kind");
    if (a.contains("d")) c.analyst.d = ReadCount(a["d"], "analyst.d");
    if (a.contains("threshold")) {
      c.analyst.threshold = ReadNumber(a["threshold"], "threshold");
    }
    if (a.contains("p0")) c.analyst.p0 = ReadNumber(a["p0"], "p0");
    if (a.contains("coords")) {
      if (!a["coords"].is_array()) throw ConfigError("'coords' must be a list");
      for (const Json& v : a["coords"]) {
        c.analyst.coords.push_back(ReadCount(v, "coords"));
      }
    }
  }
  if (root.contains("truth")) {
    const Json& t = RequireObject(root["truth"], "truth");
    RejectUnknownKeys(t, {"kind", "d", "p"}, "truth");
    if (t.contains("kind")) c.truth.kind = ReadString(t["kind"], "kind");
    if (t.contains("d")) c.truth.d = ReadCount(t["d"], "truth.d");
    if (t.contains("p")) c.truth.p = ReadNumber(t["p"], "p");
  }
  return c;
}

// ---- report pieces ----

Json BoundsJson(const BoundReport& b) {
  Json tail = Json::array();
  for (const TailLevel& level : b.tail) {
    tail.push_back({{"beta", Number(level.beta)},
                    {"scaled_level", Number(level.scaled_level)},
                    {"probability_bound", Number(level.probability_bound)}});
  }
  return Json{{"mi_bound", Number(b.mi_bound)},
              {"gen_expectation", Number(b.gen_expectation)},
              {"emp_variance_factor", Number(b.emp_variance_factor)},
              {"tail", tail},
              {"gauss_max", Number(b.gauss_max)}};
}

BoundReport BoundsFromJson(const Json& j) {
  BoundReport b;
  b.mi_bound = j.at("mi_bound").get<double>();
  b.gen_expectation = j.at("gen_expectation").get<double>();
  b.emp_variance_factor = j.at("emp_variance_factor").get<double>();
  for (const Json& level : j.at("tail")) {
    b.tail.push_back({level.at("beta").get<double>(),
                      level.at("scaled_level").get<double>(),
                      level.at("probability_bound").get<double>()});
  }
  b.gauss_max = j.at("gauss_max").get<double>();
  return b;
}

std::string FormatDouble(double x) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

std::string CsvHeader(const ExperimentReport& report) {
  return "# config: " + ConfigToJson(report.config) + "\n# seed: " +
         std::to_string(report.config.seed) + "\n";
}

// ---- running one trial ----

struct Plan {
  ExperimentConfig config;
  std::string mode;
  double tau = 0.0;
  std::optional<CalibrationParams> params;
  std::shared_ptr<const BernoulliBitsTruth> truth;
};

std::unique_ptr<Analyst> MakeAnalyst(const ExperimentConfig& c,
                                     std::uint64_t seed) {
  const AnalystConfig& a = c.analyst;
  if (a.kind == "scripted") {
    std::vector<StatisticalQuery> queries;
    for (std::size_t coord : a.coords) queries.push_back(CoordinateQuery(coord));
    return std::make_unique<ScriptedAnalyst>(std::move(queries));
  }
  if (a.kind == "random_queries") {
    return std::make_unique<RandomQueryAnalyst>(a.d, seed);
  }
  if (a.kind == "correlation_attack") {
    return std::make_unique<CorrelationAttackAnalyst>(a.d, *a.threshold, seed);
  }
  return std::make_unique<LowVarianceAnalyst>(a.d, *a.p0, seed);
}

std::unique_ptr<Mechanism> MakeMechanism(const Plan& plan, Dataset dataset,
                                         std::uint64_t seed) {
  const ExperimentConfig& c = plan.config;
  const std::string& kind = c.mechanism.kind;
  if (kind == "calibrated") {
    return std::make_unique<CalibratedGaussianMechanism>(
        std::move(dataset), *plan.params, SeededNormalSource(seed));
  }
  if (kind == "empirical") {
    return std::make_unique<BaselineMechanism>(std::move(dataset), c.k,
                                               EmpiricalMean{});
  }
  if (kind == "fixed_gaussian") {
    return std::make_unique<BaselineMechanism>(
        std::move(dataset), c.k, FixedGaussian{c.mechanism.sd},
        SeededNormalSource(seed));
  }
  return std::make_unique<BaselineMechanism>(std::move(dataset), c.k,
                                             SampleSplit{});
}

TrialRecord RunTrial(const Plan& plan, std::size_t index) {
  const ExperimentConfig& c = plan.config;
  TrialRecord record;
  record.trial = index;
  record.seed = DeriveSeed(c.seed, index);
  std::mt19937_64 data_rng(DeriveSeed(record.seed, kDataStream));
  Dataset dataset = plan.truth->SampleDataset(c.n, data_rng);
  const TranscriptSeeds seeds{DeriveSeed(record.seed, kAnalystStream),
                              DeriveSeed(record.seed, kMechanismStream)};
  auto analyst = MakeAnalyst(c, seeds.analyst);
  auto mechanism = MakeMechanism(plan, std::move(dataset), seeds.mechanism);
  const Transcript transcript = RunInteraction(*analyst, *mechanism, c.k, seeds);
  if (transcript.error) {
    throw ProtocolError("trial " + std::to_string(index) + ": " +
                        *transcript.error);
  }
  for (std::size_t j = 0; j < transcript.size(); ++j) {
    const StatisticalQuery& q = transcript.queries[j];
    QueryRecord qr;
    qr.j = j;
    qr.answer = transcript.answers[j];
    qr.true_mean = plan.truth->TrueMean(q);
    qr.true_sd = plan.truth->TrueSd(q);
    const ScaledError e =
        ComputeScaledError(qr.answer, qr.true_mean, qr.true_sd, plan.tau);
    qr.raw_error = e.raw_error;
    qr.scaled_error = e.scaled;
    record.max_scaled_error = std::max(record.max_scaled_error, e.scaled);
    record.queries.push_back(qr);
  }
  if (!record.queries.empty()) {
    record.final_scaled_error = record.queries.back().scaled_error;
    record.monitor_index = MonitorSelect(transcript, *plan.truth, plan.tau).index;
  }
  if (const StabilityLedger* ledger = mechanism->ledger()) {
    record.epsilon = ledger->epsilon_total();
  }
  return record;
}

std::pair<std::optional<double>, std::optional<double>> MeanAndStdError(
    const std::vector<double>& xs) {
  if (xs.empty()) return {std::nullopt, std::nullopt};
  const LeaveOneOut mv = MeanAndVariance(xs);
  if (xs.size() < 2) return {mv.mean, std::nullopt};
  const double n = static_cast<double>(xs.size());
  // MeanAndVariance returns the 1/n variance; switch to the unbiased one.
  const double var = mv.variance * n / (n - 1.0);
  return {mv.mean, std::sqrt(var / n)};
}

ExperimentSummary Summarize(const std::vector<TrialRecord>& trials) {
  ExperimentSummary s;
  std::vector<double> maxes, finals, eps;
  std::vector<std::vector<double>> by_query;
  for (const TrialRecord& t : trials) {
    maxes.push_back(t.max_scaled_error);
    if (t.final_scaled_error) finals.push_back(*t.final_scaled_error);
    if (t.epsilon) eps.push_back(*t.epsilon);
    if (by_query.size() < t.queries.size()) by_query.resize(t.queries.size());
    for (const QueryRecord& q : t.queries) by_query[q.j].push_back(q.scaled_error);
  }
  std::tie(s.mean_max_scaled_error, s.se_max_scaled_error) =
      MeanAndStdError(maxes);
  std::tie(s.mean_final_scaled_error, s.se_final_scaled_error) =
      MeanAndStdError(finals);
  if (!eps.empty()) {
    s.mean_epsilon = MeanAndVariance(eps).mean;
    s.max_epsilon = *std::max_element(eps.begin(), eps.end());
  }
  for (std::size_t j = 0; j < by_query.size(); ++j) {
    QueryQuantiles q;
    q.j = j;
    q.count = by_query[j].size();
    q.q50 = Quantile(by_query[j], 0.5);
    q.q90 = Quantile(by_query[j], 0.9);
    q.q99 = Quantile(by_query[j], 0.99);
    q.max = *std::max_element(by_query[j].begin(), by_query[j].end());
    s.per_query.push_back(q);
  }
  return s;
}

}  // namespace

ExperimentConfig ConfigFromJson(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigFromJsonValue(root);
}

std::string ConfigToJson(const ExperimentConfig& config) {
  return ConfigJson(config).dump();
}

ExperimentConfig ResolveConfig(ExperimentConfig c) {
  if (c.n < 2) throw ConfigError("n must be at least 2");
  if (c.threads == 0) throw ConfigError("threads must be at least 1");
  if (!kMechanismKinds.count(c.mechanism.kind)) {
    throw ConfigError("unknown mechanism kind '" + c.mechanism.kind + "'");
  }
  if (!kAnalystKinds.count(c.analyst.kind)) {
    throw ConfigError("unknown analyst kind '" + c.analyst.kind + "'");
  }
  if (!kTruthKinds.count(c.truth.kind)) {
    throw ConfigError("unknown truth kind '" + c.truth.kind + "'");
  }

  MechanismConfig& m = c.mechanism;
  if (m.kind == "calibrated") {
    if (m.t.has_value() != m.T.has_value()) {
      throw ConfigError("explicit calibration needs both 't' and 'T'");
    }
    if (m.t) {
      CalibrationParams{*m.t, *m.T, c.n, c.k}.Validate();
    } else {
      ParamsFromMainTheorem(c.n, c.k);  // throws RegimeError below 20
    }
  } else if (m.t || m.T) {
    throw ConfigError("'t' and 'T' apply to the calibrated mechanism only");
  }
  if (m.kind == "fixed_gaussian" && !(m.sd >= 0.0 && std::isfinite(m.sd))) {
    throw ConfigError("fixed_gaussian needs a finite sd >= 0");
  }
  if (m.kind == "split" && c.n < c.k) {
    throw ConfigError("sample splitting needs n >= k, got n = " +
                      std::to_string(c.n) + ", k = " + std::to_string(c.k));
  }

  TruthConfig& truth = c.truth;
  if (truth.d == 0) truth.d = c.analyst.d;
  if (truth.d == 0) throw ConfigError("truth.d must be at least 1");
  if (truth.kind == "uniform_bits" && truth.p != 0.5) {
    throw ConfigError("uniform_bits has p = 0.5");
  }
  if (!(truth.p > 0.0 && truth.p < 1.0)) {
    throw ConfigError("truth.p must lie in (0, 1)");
  }

  AnalystConfig& a = c.analyst;
  if (a.d == 0) a.d = truth.d;
  if (a.d > truth.d) {
    throw ConfigError("analyst.d = " + std::to_string(a.d) +
                      " exceeds truth.d = " + std::to_string(truth.d));
  }
  if (a.kind != "correlation_attack" && a.threshold) {
    throw ConfigError("'threshold' applies to correlation_attack only");
  }
  if (a.kind != "low_variance" && a.p0) {
    throw ConfigError("'p0' applies to low_variance only");
  }
  if (a.kind != "scripted" && !a.coords.empty()) {
    throw ConfigError("'coords' applies to scripted only");
  }
  if (a.kind == "correlation_attack") {
    if (a.d != truth.d) {
      throw ConfigError("correlation_attack reads every attribute: analyst.d "
                        "must equal truth.d");
    }
    if (truth.kind != "uniform_bits") {
      throw ConfigError("correlation_attack needs the uniform_bits truth");
    }
    if (!a.threshold) a.threshold = 2.0 / std::sqrt(static_cast<double>(c.n));
    if (!(*a.threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  }
  if (a.kind == "low_variance") {
    if (!a.p0) a.p0 = truth.p;
    if (!(*a.p0 > 0.0 && *a.p0 < 1.0)) throw ConfigError("p0 in (0, 1)");
  }
  if (a.kind == "scripted") {
    for (std::size_t coord : a.coords) {
      if (coord > truth.d) {
        throw ConfigError("scripted coordinate " + std::to_string(coord) +
                          " outside the record of length " +
                          std::to_string(truth.d + 1));
      }
    }
  }
  return c;
}

double Quantile(std::vector<double> data, double q) {
  if (data.empty()) throw PreconditionError("quantile of empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile level in [0, 1]");
  std::sort(data.begin(), data.end());
  const double pos = q * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return data[lo] + frac * (data[hi] - data[lo]);
}

ExperimentReport RunExperiment(const ExperimentConfig& raw) {
  Plan plan;
  plan.config = ResolveConfig(raw);
  const ExperimentConfig& c = plan.config;
  const double n = static_cast<double>(c.n);
  const double k = static_cast<double>(c.k);

  ExperimentReport report;
  report.config = c;
  if (c.mechanism.kind == "calibrated") {
    if (c.mechanism.t) {
      plan.mode = "explicit";
      plan.params = CalibrationParams{*c.mechanism.t, *c.mechanism.T, c.n, c.k};
      report.epsilon_theory =
          k * AlklBoundFormula(c.n, plan.params->t, plan.params->T);
      plan.tau = std::sqrt(*report.epsilon_theory);
    } else {
      plan.mode = "theorem";
      const TheoremParams tp = ParamsFromMainTheorem(c.n, c.k);
      plan.params = tp.params;
      plan.tau = tp.tau;
      report.epsilon_theory = k * tp.params.t / (n * n);
    }
    report.t = plan.params->t;
    report.T = plan.params->T;
    report.in_stability_regime = plan.params->in_stability_regime();
    if (report.in_stability_regime) {
      const double t = plan.params->t;
      report.ledger_cap = k * std::max(t, plan.params->T / t) / (n * n);
    }
  } else {
    plan.mode = "baseline";
    plan.tau = c.k > 0 ? ReferenceTau(c.n, c.k) : 0.0;
  }
  report.mode = plan.mode;
  report.tau = plan.tau;
  plan.truth = std::make_shared<BernoulliBitsTruth>(c.truth.d, c.truth.p);

  std::vector<TrialRecord> trials(c.trials);
  std::vector<std::exception_ptr> failures(c.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < c.trials; i = next++) {
      try {
        trials[i] = RunTrial(plan, i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(c.threads, std::max<std::size_t>(c.trials, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  report.trials = std::move(trials);
  report.summary = Summarize(report.trials);
  if (report.ledger_cap) {
    for (const TrialRecord& t : report.trials) {
      if (t.epsilon && *t.epsilon > *report.ledger_cap * (1.0 + kCapSlack)) {
        report.ledger_within_cap = false;
      }
    }
  }
  std::optional<double> bound_eps = report.epsilon_theory;
  if (!bound_eps && c.mechanism.kind == "fixed_gaussian") {
    bound_eps = report.summary.max_epsilon;
  }
  if (bound_eps && report.tau > 0.0) {
    report.bounds = MakeBoundReport(*bound_eps, c.n, c.k, report.tau);
  }
  return report;
}

std::string ReportToJson(const ExperimentReport& r) {
  Json trials = Json::array();
  for (const TrialRecord& t : r.trials) {
    Json queries = Json::array();
    for (const QueryRecord& q : t.queries) {
      queries.push_back({{"j", q.j},
                         {"answer", Number(q.answer)},
                         {"true_mean", Number(q.true_mean)},
                         {"true_sd", Number(q.true_sd)},
                         {"raw_error", Number(q.raw_error)},
                         {"scaled_error", Number(q.scaled_error)}});
    }
    trials.push_back(
        {{"trial", t.trial},
         {"seed", t.seed},
         {"max_scaled_error", Number(t.max_scaled_error)},
         {"monitor_index",
          t.monitor_index ? Json(*t.monitor_index) : Json(nullptr)},
         {"final_scaled_error", Optional(t.final_scaled_error)},
         {"epsilon", Optional(t.epsilon)},
         {"queries", queries}});
  }
  Json per_query = Json::array();
  for (const QueryQuantiles& q : r.summary.per_query) {
    per_query.push_back({{"j", q.j},
                         {"count", q.count},
                         {"q50", Number(q.q50)},
                         {"q90", Number(q.q90)},
                         {"q99", Number(q.q99)},
                         {"max", Number(q.max)}});
  }
  const ExperimentSummary& s = r.summary;
  Json summary = {{"trials", r.trials.size()},
                  {"mean_max_scaled_error", Optional(s.mean_max_scaled_error)},
                  {"se_max_scaled_error", Optional(s.se_max_scaled_error)},
                  {"mean_final_scaled_error",
                   Optional(s.mean_final_scaled_error)},
                  {"se_final_scaled_error", Optional(s.se_final_scaled_error)},
                  {"mean_epsilon", Optional(s.mean_epsilon)},
                  {"max_epsilon", Optional(s.max_epsilon)},
                  {"per_query", per_query}};
  Json root = {
      {"config", ConfigJson(r.config)},
      {"seed", r.config.seed},
      {"mode", r.mode},
      {"tau", Number(r.tau)},
      {"t", Optional(r.t)},
      {"T", Optional(r.T)},
      {"epsilon_theory", Optional(r.epsilon_theory)},
      {"in_stability_regime", r.in_stability_regime},
      {"ledger_cap", Optional(r.ledger_cap)},
      {"ledger_within_cap", r.ledger_within_cap},
      {"bounds", r.bounds ? BoundsJson(*r.bounds) : Json(nullptr)},
      {"summary", summary},
      {"trials", trials}};
  return root.dump(2) + "\n";
}

ExperimentReport ReportFromJson(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    ExperimentReport r;
    r.config = ConfigFromJsonValue(root.at("config"));
    r.mode = root.at("mode").get<std::string>();
    r.tau = root.at("tau").get<double>();
    r.t = ReadOptional(root, "t");
    r.T = ReadOptional(root, "T");
    r.epsilon_theory = ReadOptional(root, "epsilon_theory");
    r.in_stability_regime = root.at("in_stability_regime").get<bool>();
    r.ledger_cap = ReadOptional(root, "ledger_cap");
    r.ledger_within_cap = root.at("ledger_within_cap").get<bool>();
    if (!root.at("bounds").is_null()) r.bounds = BoundsFromJson(root["bounds"]);
    const Json& s = root.at("summary");
    r.summary.mean_max_scaled_error = ReadOptional(s, "mean_max_scaled_error");
    r.summary.se_max_scaled_error = ReadOptional(s, "se_max_scaled_error");
    r.summary.mean_final_scaled_error =
        ReadOptional(s, "mean_final_scaled_error");
    r.summary.se_final_scaled_error = ReadOptional(s, "se_final_scaled_error");
    r.summary.mean_epsilon = ReadOptional(s, "mean_epsilon");
    r.summary.max_epsilon = ReadOptional(s, "max_epsilon");
    for (const Json& q : s.at("per_query")) {
      r.summary.per_query.push_back(
          {q.at("j").get<std::size_t>(), q.at("count").get<std::size_t>(),
           q.at("q50").get<double>(), q.at("q90").get<double>(),
           q.at("q99").get<double>(), q.at("max").get<double>()});
    }
    for (const Json& t : root.at("trials")) {
      TrialRecord tr;
      tr.trial = t.at("trial").get<std::size_t>();
      tr.seed = t.at("seed").get<std::uint64_t>();
      tr.max_scaled_error = t.at("max_scaled_error").get<double>();
      if (!t.at("monitor_index").is_null()) {
        tr.monitor_index = t["monitor_index"].get<std::size_t>();
      }
      tr.final_scaled_error = ReadOptional(t, "final_scaled_error");
      tr.epsilon = ReadOptional(t, "epsilon");
      for (const Json& q : t.at("queries")) {
        tr.queries.push_back(
            {q.at("j").get<std::size_t>(), q.at("answer").get<double>(),
             q.at("true_mean").get<double>(), q.at("true_sd").get<double>(),
             q.at("raw_error").get<double>(),
             q.at("scaled_error").get<double>()});
      }
      r.trials.push_back(std::move(tr));
    }
    return r;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string TrialsCsv(const ExperimentReport& report) {
  std::string out = CsvHeader(report);
  out += "trial,seed,max_scaled_error,epsilon\n";
  for (const TrialRecord& t : report.trials) {
    out += std::to_string(t.trial) + "," + std::to_string(t.seed) + "," +
           FormatDouble(t.max_scaled_error) + "," +
           (t.epsilon ? FormatDouble(*t.epsilon) : std::string()) + "\n";
  }
  return out;
}

std::string QueriesCsv(const ExperimentReport& report) {
  std::string out = CsvHeader(report);
  out += "trial,j,raw_error,true_sd,scaled_error\n";
  for (const TrialRecord& t : report.trials) {
    for (const QueryRecord& q : t.queries) {
      out += std::to_string(t.trial) + "," + std::to_string(q.j) + "," +
             FormatDouble(q.raw_error) + "," + FormatDouble(q.true_sd) + "," +
             FormatDouble(q.scaled_error) + "\n";
    }
  }
  return out;
}

ReportFormat ParseReportFormat(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw ConfigError("unknown report format '" + name + "' (csv or json)");
}

namespace {

void WriteTextFile(const std::filesystem::path& path,
                   const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> EmitReport(
    const ExperimentReport& report, ReportFormat format,
    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::kJson) {
    written.push_back(dir / "report.json");
    WriteTextFile(written.back(), ReportToJson(report));
  } else {
    written.push_back(dir / "trials.csv");
    WriteTextFile(written.back(), TrialsCsv(report));
    written.push_back(dir / "queries.csv");
    WriteTextFile(written.back(), QueriesCsv(report));
  }
  return written;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return buffer.str();
}

}  // namespace adasq
