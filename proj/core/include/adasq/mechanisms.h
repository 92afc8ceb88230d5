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

// Query-answering mechanisms and the analyst/mechanism interaction protocol.

#ifndef ADASQ_MECHANISMS_H_
#define ADASQ_MECHANISMS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adasq/core.h"
#include "adasq/stability.h"

namespace adasq {

// Parameters of the calibrated mechanism. t scales the empirical variance,
// 1/T is the noise-variance floor, k is the query budget.
struct CalibrationParams {
  double t = 0.0;
  double T = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;

  // Throws ParameterError unless t and T are positive and finite.
  void Validate() const;

  // n >= 20 and T <= min(t^2, t n / 10).
  bool in_stability_regime() const { return InStabilityRegime(n, t, T); }
};

struct TheoremParams {
  CalibrationParams params;
  double tau;
};

// T = n^2 / k, t = n sqrt(2 ln(2k) / k), tau = sqrt(sqrt(2k ln(2k)) / n).
// Throws RegimeError when n < 20 or k < 20.
TheoremParams ParamsFromMainTheorem(std::size_t n, std::size_t k);

// The tau of the accuracy guarantee for (n, k), k >= 1, without the
// n, k >= 20 requirement. Used to put baseline errors on the same scale.
double ReferenceTau(std::size_t n, std::size_t k);

// A source of independent standard normal draws.
using NormalSource = std::function<double()>;

// Exact normal sampling (Marsaglia polar method in libstdc++) over a 64-bit
// Mersenne Twister seeded with `seed`.
NormalSource SeededNormalSource(std::uint64_t seed);

// Always returns 0. Test hook that removes the noise from a mechanism.
NormalSource ZeroNoiseSource();

// Mixes (base, stream) into an independent 64-bit seed (splitmix64).
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream);

// Answers statistical queries about a fixed dataset, at most budget() times.
// Confined to one interaction; not thread-safe.
class Mechanism {
 public:
  virtual ~Mechanism() = default;

  // Throws BudgetError when the budget is exhausted and QueryRangeError when
  // the query leaves [0, 1] on some record. Neither consumes budget.
  virtual double Answer(const StatisticalQuery& query) = 0;

  virtual std::string name() const = 0;

  // Ledger of per-answer ALKL costs, or nullptr when the mechanism has no
  // finite accounting (e.g. releasing exact empirical means).
  virtual const StabilityLedger* ledger() const { return nullptr; }

  const Dataset& dataset() const { return dataset_; }
  std::size_t budget() const { return budget_; }
  std::size_t answered() const { return answered_; }
  std::size_t remaining() const { return budget_ - answered_; }

 protected:
  Mechanism(Dataset dataset, std::size_t budget);

  void RequireBudget() const;
  void MarkAnswered() { ++answered_; }

 private:
  Dataset dataset_;
  std::size_t budget_;
  std::size_t answered_ = 0;
};

// v = mu + xi sqrt(max(sigma^2 / t, 1 / T)), xi ~ N(0, 1), with the exact
// ALKL of every answer recorded in the ledger. Answers are not clipped.
class CalibratedGaussianMechanism : public Mechanism {
 public:
  CalibratedGaussianMechanism(Dataset dataset, CalibrationParams params,
                              NormalSource noise);

  double Answer(const StatisticalQuery& query) override;
  std::string name() const override { return "calibrated"; }
  const StabilityLedger* ledger() const override { return &ledger_; }

  const CalibrationParams& params() const { return params_; }
  // xi_j for every answer so far.
  std::span<const double> noise_draws() const { return noise_draws_; }
  // Noise variance used for every answer so far.
  std::span<const double> noise_variances() const { return noise_variances_; }

 private:
  CalibrationParams params_;
  NormalSource noise_;
  StabilityLedger ledger_;
  double cap_;
  std::vector<double> noise_draws_;
  std::vector<double> noise_variances_;
};

struct EmpiricalMean {};
struct FixedGaussian {
  double sd = 0.0;
};
// Answer j uses only the j-th of k disjoint contiguous chunks.
struct SampleSplit {};
using BaselineKind = std::variant<EmpiricalMean, FixedGaussian, SampleSplit>;

// Comparison mechanisms. FixedGaussian with sd > 0 keeps an exact ALKL
// ledger; the others report none.
class BaselineMechanism : public Mechanism {
 public:
  // SampleSplit requires n >= budget (ConfigError otherwise).
  BaselineMechanism(Dataset dataset, std::size_t budget, BaselineKind kind,
                    NormalSource noise = ZeroNoiseSource());

  double Answer(const StatisticalQuery& query) override;
  std::string name() const override;
  const StabilityLedger* ledger() const override;

 private:
  BaselineKind kind_;
  NormalSource noise_;
  StabilityLedger ledger_;
};

// The query-choosing side of the protocol. The next query may depend on the
// answers so far and on the analyst's own seeded randomness, nothing else.
class Analyst {
 public:
  virtual ~Analyst() = default;

  // False once the analyst has no further queries to ask.
  virtual bool HasNext(std::size_t asked) const = 0;

  // Throws ProtocolError when called after HasNext() turned false.
  virtual StatisticalQuery NextQuery(std::span<const double> answers) = 0;

  virtual std::string name() const = 0;
  virtual std::uint64_t seed() const { return 0; }
};

struct TranscriptSeeds {
  std::uint64_t analyst = 0;
  std::uint64_t mechanism = 0;
};

// The ordered queries and answers of one interaction. Shorter than k when
// the analyst stops early or the interaction aborts (then `error` is set).
struct Transcript {
  std::vector<StatisticalQuery> queries;
  std::vector<double> answers;
  TranscriptSeeds seeds;
  std::optional<std::string> error;

  std::size_t size() const { return answers.size(); }
};

// Runs up to k rounds of query/answer alternation. Throws BudgetError up
// front if the mechanism cannot answer k queries. A query rejected by the
// mechanism or an analyst protocol failure aborts the run and is recorded in
// Transcript::error.
Transcript RunInteraction(Analyst& analyst, Mechanism& mechanism,
                          std::size_t k, TranscriptSeeds seeds = {});

// Post-hoc transform clamping every answer to [0, 1].
Transcript ClampAnswers(Transcript transcript);

}  // namespace adasq

#endif  // ADASQ_MECHANISMS_H_
