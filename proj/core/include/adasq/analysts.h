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

// Analyst strategies, the closed-form truth model used to score them, and the
// worst-scaled-error monitor.
//
// Experiments use the bit-vector domain X = {0,1}^{d+1}: d attribute bits
// followed by one label bit at index d. Queries built here carry a BitForm
// tag so that a TruthModel can compute their population mean and standard
// deviation exactly.

#ifndef ADASQ_ANALYSTS_H_
#define ADASQ_ANALYSTS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adasq/core.h"
#include "adasq/mechanisms.h"

namespace adasq {

// psi(x) = x_j.
struct CoordinateForm {
  std::size_t coord;
};
// psi(x) = 1{x_j == x_label}.
struct AgreementForm {
  std::size_t coord;
  std::size_t label;
};
// Sign-corrected majority of attribute/label agreements:
// votes = sum_j sign_j (2 * 1{x_j == x_label} - 1); psi = 1 if votes > 0,
// 0 if votes < 0, 1/2 on a tie.
struct VoteForm {
  std::vector<std::size_t> coords;
  std::vector<int> signs;
  std::size_t label;
};
struct ConstantForm {
  double value;
};
using BitForm =
    std::variant<CoordinateForm, AgreementForm, VoteForm, ConstantForm>;

class BitQueryTag : public QueryTag {
 public:
  BitQueryTag(BitForm form, bool complemented)
      : form_(std::move(form)), complemented_(complemented) {}

  const BitForm& form() const { return form_; }
  // The query is 1 - form.
  bool complemented() const { return complemented_; }

 private:
  BitForm form_;
  bool complemented_;
};

StatisticalQuery CoordinateQuery(std::size_t coord);
StatisticalQuery AgreementQuery(std::size_t coord, std::size_t label);
StatisticalQuery VoteQuery(std::vector<std::size_t> coords,
                           std::vector<int> signs, std::size_t label);
StatisticalQuery ConstantQuery(double value);

// 1 - psi. Keeps (and flips) the BitQueryTag when present.
StatisticalQuery Complement(const StatisticalQuery& query);

// Population-side knowledge: exact P[psi] and sd(psi(P)). Never handed to a
// mechanism.
class TruthModel {
 public:
  virtual ~TruthModel() = default;

  virtual std::string family() const = 0;
  virtual double TrueMean(const StatisticalQuery& query) const = 0;
  virtual double TrueSd(const StatisticalQuery& query) const = 0;
  virtual Dataset SampleDataset(std::size_t n, std::mt19937_64& rng) const = 0;
};

// d + 1 independent Bernoulli(p) bits. The uniform domain is p = 1/2.
// Vote queries have closed forms only for p = 1/2.
class BernoulliBitsTruth : public TruthModel {
 public:
  BernoulliBitsTruth(std::size_t d, double p);

  std::string family() const override;
  double TrueMean(const StatisticalQuery& query) const override;
  double TrueSd(const StatisticalQuery& query) const override;
  Dataset SampleDataset(std::size_t n, std::mt19937_64& rng) const override;

  std::size_t d() const { return d_; }
  double p() const { return p_; }
  std::size_t label_index() const { return d_; }

 private:
  struct Moments {
    double mean;
    double second;
  };
  Moments FormMoments(const BitQueryTag& tag) const;

  std::size_t d_;
  double p_;
};

// Replays a fixed list of queries, then stops.
class ScriptedAnalyst : public Analyst {
 public:
  explicit ScriptedAnalyst(std::vector<StatisticalQuery> queries);

  bool HasNext(std::size_t asked) const override;
  StatisticalQuery NextQuery(std::span<const double> answers) override;
  std::string name() const override { return "scripted"; }

 private:
  std::vector<StatisticalQuery> queries_;
};

// Non-adaptive: each query reads one attribute chosen uniformly at random.
class RandomQueryAnalyst : public Analyst {
 public:
  RandomQueryAnalyst(std::size_t d, std::uint64_t seed);

  bool HasNext(std::size_t) const override { return true; }
  StatisticalQuery NextQuery(std::span<const double> answers) override;
  std::string name() const override { return "random_queries"; }
  std::uint64_t seed() const override { return seed_; }

 private:
  std::size_t d_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

// Asks for the agreement between each of the d attributes (in a seeded random
// order) and the label, then submits one final query: the sign-corrected
// majority vote over the attributes whose answered correlation |2v - 1|
// exceeds `threshold`. With no attribute selected the final query is the
// constant 1/2. Issues exactly d + 1 queries.
class CorrelationAttackAnalyst : public Analyst {
 public:
  CorrelationAttackAnalyst(std::size_t d, double threshold, std::uint64_t seed);

  bool HasNext(std::size_t asked) const override { return asked <= d_; }
  StatisticalQuery NextQuery(std::span<const double> answers) override;
  std::string name() const override { return "correlation_attack"; }
  std::uint64_t seed() const override { return seed_; }

  std::size_t d() const { return d_; }
  double threshold() const { return threshold_; }
  // Attributes selected for the final vote, once it has been built.
  std::span<const std::size_t> selected() const { return selected_; }

 private:
  std::size_t d_;
  double threshold_;
  std::uint64_t seed_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> selected_;
};

// Low-variance workload: reads each attribute once in a seeded order, then
// keeps re-asking the attribute whose latest answer is smallest. Meant for
// BernoulliBitsTruth with a small p0, where every query has mean p0 and
// variance p0 (1 - p0).
class LowVarianceAnalyst : public Analyst {
 public:
  LowVarianceAnalyst(std::size_t d, double p0, std::uint64_t seed);

  bool HasNext(std::size_t) const override { return true; }
  StatisticalQuery NextQuery(std::span<const double> answers) override;
  std::string name() const override { return "low_variance"; }
  std::uint64_t seed() const override { return seed_; }

  double p0() const { return p0_; }

 private:
  std::size_t d_;
  double p0_;
  std::uint64_t seed_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> asked_coords_;
};

struct MonitorChoice {
  std::size_t index;
  // psi_{j*} when v_{j*} >= P[psi_{j*}], otherwise 1 - psi_{j*}.
  StatisticalQuery oriented;
  // Signed error of the oriented query, always >= 0.
  double oriented_error;
  // |v_{j*} - P[psi_{j*}]| / max(sd, tau).
  double score;
};

// j* = argmax_j |v_j - P[psi_j]| / max(sd(psi_j(P)), tau), lowest index on
// ties. Throws PreconditionError on an empty transcript.
MonitorChoice MonitorSelect(const Transcript& transcript,
                            const TruthModel& truth, double tau);

}  // namespace adasq

#endif  // ADASQ_ANALYSTS_H_
