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

#include "adasq/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <utility>

#include "adasq/divergence.h"
#include "adasq/errors.h"

namespace adasq {

void CalibrationParams::Validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("t must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("T must be > 0");
}

TheoremParams ParamsFromMainTheorem(std::size_t n, std::size_t k) {
  if (n < 20) {
    throw RegimeError("accuracy guarantee needs n >= 20, got n = " +
                      std::to_string(n));
  }
  if (k < 20) {
    throw RegimeError("accuracy guarantee needs k >= 20, got k = " +
                      std::to_string(k));
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double log2k = std::log(2.0 * kd);
  TheoremParams out;
  out.params.n = n;
  out.params.k = k;
  out.params.T = nd * nd / kd;
  out.params.t = nd * std::sqrt(2.0 * log2k / kd);
  out.tau = ReferenceTau(n, k);
  return out;
}

double ReferenceTau(std::size_t n, std::size_t k) {
  if (n < 1 || k < 1) throw ParameterError("tau needs n, k >= 1");
  const double kd = static_cast<double>(k);
  return std::sqrt(std::sqrt(2.0 * kd * std::log(2.0 * kd)) /
                   static_cast<double>(n));
}

NormalSource SeededNormalSource(std::uint64_t seed) {
  struct State {
    std::mt19937_64 engine;
    std::normal_distribution<double> normal{0.0, 1.0};
  };
  auto state = std::make_shared<State>();
  state->engine.seed(seed);
  return [state] { return state->normal(state->engine); };
}

NormalSource ZeroNoiseSource() {
  return [] { return 0.0; };
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Mechanism::Mechanism(Dataset dataset, std::size_t budget)
    : dataset_(std::move(dataset)), budget_(budget) {}

void Mechanism::RequireBudget() const {
  if (answered_ >= budget_) {
    throw BudgetError(name() + " mechanism exhausted its budget of " +
                      std::to_string(budget_) + " queries");
  }
}

CalibratedGaussianMechanism::CalibratedGaussianMechanism(
    Dataset dataset, CalibrationParams params, NormalSource noise)
    : Mechanism(std::move(dataset), params.k),
      params_(params),
      noise_(std::move(noise)),
      ledger_(this->dataset().size()) {
  params_.Validate();
  if (params_.n != this->dataset().size()) {
    throw PreconditionError("calibration n = " + std::to_string(params_.n) +
                            " does not match dataset size " +
                            std::to_string(this->dataset().size()));
  }
  if (!noise_) throw PreconditionError("calibrated mechanism needs a noise source");
  cap_ = AlklBoundFormula(params_.n, params_.t, params_.T);
}

double CalibratedGaussianMechanism::Answer(const StatisticalQuery& query) {
  RequireBudget();
  const QueryStats stats = EvaluateQueryStats(dataset(), query);
  const double variance =
      CalibratedNoiseVariance(stats.variance, params_.t, params_.T);
  const double xi = noise_();
  ledger_.Append(AlklOneAnswerExact(stats, params_.t, params_.T), cap_);
  noise_draws_.push_back(xi);
  noise_variances_.push_back(variance);
  MarkAnswered();
  return stats.mean + xi * std::sqrt(variance);
}

BaselineMechanism::BaselineMechanism(Dataset dataset, std::size_t budget,
                                     BaselineKind kind, NormalSource noise)
    : Mechanism(std::move(dataset), budget),
      kind_(kind),
      noise_(std::move(noise)),
      ledger_(this->dataset().size()) {
  if (std::holds_alternative<SampleSplit>(kind_) &&
      this->dataset().size() < budget) {
    throw ConfigError("sample splitting needs n >= k (n = " +
                      std::to_string(this->dataset().size()) +
                      ", k = " + std::to_string(budget) + ")");
  }
  if (const auto* fixed = std::get_if<FixedGaussian>(&kind_)) {
    if (!(fixed->sd >= 0.0)) throw ParameterError("noise sd must be >= 0");
    if (fixed->sd > 0.0 && !noise_) {
      throw PreconditionError("fixed Gaussian mechanism needs a noise source");
    }
  }
}

std::string BaselineMechanism::name() const {
  if (std::holds_alternative<EmpiricalMean>(kind_)) return "empirical";
  if (std::holds_alternative<FixedGaussian>(kind_)) return "fixed_gaussian";
  return "split";
}

const StabilityLedger* BaselineMechanism::ledger() const {
  const auto* fixed = std::get_if<FixedGaussian>(&kind_);
  return fixed != nullptr && fixed->sd > 0.0 ? &ledger_ : nullptr;
}

double BaselineMechanism::Answer(const StatisticalQuery& query) {
  RequireBudget();
  double answer = 0.0;
  if (std::holds_alternative<SampleSplit>(kind_)) {
    const std::size_t n = dataset().size();
    const std::size_t j = answered();
    const std::size_t begin = j * n / budget();
    const std::size_t end = (j + 1) * n / budget();
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = query(dataset()[i]);
      if (!(v >= 0.0 && v <= 1.0)) throw QueryRangeError(query.id(), i, v);
      sum += v;
    }
    answer = sum / static_cast<double>(end - begin);
  } else {
    const QueryStats stats = EvaluateQueryStats(dataset(), query);
    answer = stats.mean;
    if (const auto* fixed = std::get_if<FixedGaussian>(&kind_);
        fixed != nullptr && fixed->sd > 0.0) {
      const double variance = fixed->sd * fixed->sd;
      const GaussianSpec full(stats.mean, variance);
      double total = 0.0;
      for (std::size_t i = 0; i < stats.n(); ++i) {
        total += KlGaussian(full, GaussianSpec(stats.loo_means[i], variance));
      }
      ledger_.Append(total / static_cast<double>(stats.n()));
      answer += fixed->sd * noise_();
    }
  }
  MarkAnswered();
  return answer;
}

Transcript RunInteraction(Analyst& analyst, Mechanism& mechanism,
                          std::size_t k, TranscriptSeeds seeds) {
  if (mechanism.remaining() < k) {
    throw BudgetError("mechanism can answer " +
                      std::to_string(mechanism.remaining()) +
                      " more queries, interaction needs " + std::to_string(k));
  }
  Transcript transcript;
  transcript.seeds = seeds;
  for (std::size_t j = 0; j < k && analyst.HasNext(j); ++j) {
    try {
      StatisticalQuery query = analyst.NextQuery(transcript.answers);
      const double answer = mechanism.Answer(query);
      transcript.queries.push_back(std::move(query));
      transcript.answers.push_back(answer);
    } catch (const QueryRangeError& e) {
      transcript.error = std::string("invalid query at round ") +
                         std::to_string(j) + ": " + e.what();
      break;
    } catch (const ProtocolError& e) {
      transcript.error = std::string("protocol error at round ") +
                         std::to_string(j) + ": " + e.what();
      break;
    }
  }
  return transcript;
}

Transcript ClampAnswers(Transcript transcript) {
  for (double& v : transcript.answers) v = std::clamp(v, 0.0, 1.0);
  return transcript;
}

}  // namespace adasq
