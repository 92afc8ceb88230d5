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

#include "adasq/analysts.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "adasq/errors.h"

namespace adasq {
namespace {

double Bit(const Record& x, std::size_t i) {
  if (i >= x.size()) {
    throw PreconditionError("record has " + std::to_string(x.size()) +
                            " coordinates, query reads coordinate " +
                            std::to_string(i));
  }
  return x[i];
}

StatisticalQuery MakeBitQuery(std::string id, StatisticalQuery::Function fn,
                              BitForm form) {
  return StatisticalQuery(std::move(id), std::move(fn),
                          std::make_shared<BitQueryTag>(std::move(form), false));
}

std::vector<std::size_t> ShuffledOrder(std::size_t d, std::uint64_t seed) {
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

// P[Binomial(m, 1/2) = m/2].
double FairTieProbability(std::size_t m) {
  if (m % 2 == 1) return 0.0;
  const double md = static_cast<double>(m);
  return std::exp(std::lgamma(md + 1.0) - 2.0 * std::lgamma(md / 2.0 + 1.0) -
                  md * std::log(2.0));
}

}  // namespace

StatisticalQuery CoordinateQuery(std::size_t coord) {
  return MakeBitQuery(
      "x" + std::to_string(coord),
      [coord](const Record& x) { return Bit(x, coord); },
      CoordinateForm{coord});
}

StatisticalQuery AgreementQuery(std::size_t coord, std::size_t label) {
  return MakeBitQuery(
      "agree(x" + std::to_string(coord) + ",x" + std::to_string(label) + ")",
      [coord, label](const Record& x) {
        return Bit(x, coord) == Bit(x, label) ? 1.0 : 0.0;
      },
      AgreementForm{coord, label});
}

StatisticalQuery VoteQuery(std::vector<std::size_t> coords,
                           std::vector<int> signs, std::size_t label) {
  if (coords.size() != signs.size()) {
    throw PreconditionError("vote needs one sign per coordinate");
  }
  std::set<std::size_t> distinct(coords.begin(), coords.end());
  if (distinct.size() != coords.size() || distinct.count(label) != 0) {
    throw PreconditionError(
        "vote coordinates must be distinct and exclude the label");
  }
  for (int s : signs) {
    if (s != 1 && s != -1) throw PreconditionError("vote signs must be +-1");
  }
  std::string id = "vote[" + std::to_string(coords.size()) + "]";
  auto fn = [coords, signs, label](const Record& x) {
    const double y = Bit(x, label);
    long votes = 0;
    for (std::size_t j = 0; j < coords.size(); ++j) {
      votes += (Bit(x, coords[j]) == y ? 1 : -1) * signs[j];
    }
    if (votes > 0) return 1.0;
    if (votes < 0) return 0.0;
    return 0.5;
  };
  return MakeBitQuery(std::move(id), std::move(fn),
                      VoteForm{std::move(coords), std::move(signs), label});
}

StatisticalQuery ConstantQuery(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ParameterError("constant query value must lie in [0, 1]");
  }
  return MakeBitQuery(
      "const(" + std::to_string(value) + ")",
      [value](const Record&) { return value; }, ConstantForm{value});
}

StatisticalQuery Complement(const StatisticalQuery& query) {
  std::shared_ptr<const QueryTag> tag;
  if (const auto* bit = dynamic_cast<const BitQueryTag*>(query.tag())) {
    tag = std::make_shared<BitQueryTag>(bit->form(), !bit->complemented());
  }
  return StatisticalQuery(
      "1-" + query.id(), [query](const Record& x) { return 1.0 - query(x); },
      std::move(tag));
}

BernoulliBitsTruth::BernoulliBitsTruth(std::size_t d, double p) : d_(d), p_(p) {
  if (d == 0) throw ParameterError("bit domain needs d >= 1 attributes");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("bit bias must be in [0, 1]");
}

std::string BernoulliBitsTruth::family() const {
  return p_ == 0.5 ? "uniform_bits" : "bernoulli_bits";
}

BernoulliBitsTruth::Moments BernoulliBitsTruth::FormMoments(
    const BitQueryTag& tag) const {
  Moments m = std::visit(
      [this](const auto& form) -> Moments {
        using F = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<F, CoordinateForm>) {
          return {p_, p_};
        } else if constexpr (std::is_same_v<F, AgreementForm>) {
          if (form.coord == form.label) return {1.0, 1.0};
          const double agree = p_ * p_ + (1.0 - p_) * (1.0 - p_);
          return {agree, agree};
        } else if constexpr (std::is_same_v<F, VoteForm>) {
          if (p_ != 0.5) {
            throw PreconditionError(
                "vote queries have closed-form truth only for uniform bits");
          }
          // The signed agreements are i.i.d. Rademacher, so the vote is
          // symmetric about 1/2 and E[psi^2] = P[>] + P[=] / 4.
          const double tie = FairTieProbability(form.coords.size());
          return {0.5, 0.5 - 0.25 * tie};
        } else {
          return {form.value, form.value * form.value};
        }
      },
      tag.form());
  if (tag.complemented()) m = {1.0 - m.mean, 1.0 - 2.0 * m.mean + m.second};
  return m;
}

double BernoulliBitsTruth::TrueMean(const StatisticalQuery& query) const {
  const auto* tag = dynamic_cast<const BitQueryTag*>(query.tag());
  if (tag == nullptr) {
    throw PreconditionError("truth model cannot evaluate query '" + query.id() +
                            "'");
  }
  return FormMoments(*tag).mean;
}

double BernoulliBitsTruth::TrueSd(const StatisticalQuery& query) const {
  const auto* tag = dynamic_cast<const BitQueryTag*>(query.tag());
  if (tag == nullptr) {
    throw PreconditionError("truth model cannot evaluate query '" + query.id() +
                            "'");
  }
  const Moments m = FormMoments(*tag);
  return std::sqrt(std::max(0.0, m.second - m.mean * m.mean));
}

Dataset BernoulliBitsTruth::SampleDataset(std::size_t n,
                                          std::mt19937_64& rng) const {
  std::bernoulli_distribution bit(p_);
  std::vector<Record> records(n, Record(d_ + 1));
  for (Record& r : records) {
    for (double& v : r) v = bit(rng) ? 1.0 : 0.0;
  }
  return Dataset(std::move(records));
}

ScriptedAnalyst::ScriptedAnalyst(std::vector<StatisticalQuery> queries)
    : queries_(std::move(queries)) {}

bool ScriptedAnalyst::HasNext(std::size_t asked) const {
  return asked < queries_.size();
}

StatisticalQuery ScriptedAnalyst::NextQuery(std::span<const double> answers) {
  if (!HasNext(answers.size())) {
    throw ProtocolError("scripted analyst has no query left");
  }
  return queries_[answers.size()];
}

RandomQueryAnalyst::RandomQueryAnalyst(std::size_t d, std::uint64_t seed)
    : d_(d), seed_(seed), rng_(seed) {
  if (d == 0) throw ParameterError("random queries need d >= 1");
}

StatisticalQuery RandomQueryAnalyst::NextQuery(std::span<const double>) {
  std::uniform_int_distribution<std::size_t> pick(0, d_ - 1);
  return CoordinateQuery(pick(rng_));
}

CorrelationAttackAnalyst::CorrelationAttackAnalyst(std::size_t d,
                                                   double threshold,
                                                   std::uint64_t seed)
    : d_(d), threshold_(threshold), seed_(seed), order_(ShuffledOrder(d, seed)) {
  if (d == 0) throw ParameterError("correlation attack needs d >= 1");
  if (!(threshold >= 0.0)) throw ParameterError("threshold must be >= 0");
}

StatisticalQuery CorrelationAttackAnalyst::NextQuery(
    std::span<const double> answers) {
  const std::size_t j = answers.size();
  if (j < d_) return AgreementQuery(order_[j], d_);
  if (j > d_) throw ProtocolError("correlation attack already finished");
  selected_.clear();
  std::vector<int> signs;
  for (std::size_t i = 0; i < d_; ++i) {
    const double correlation = 2.0 * answers[i] - 1.0;
    if (std::abs(correlation) > threshold_) {
      selected_.push_back(order_[i]);
      signs.push_back(correlation > 0.0 ? 1 : -1);
    }
  }
  if (selected_.empty()) return ConstantQuery(0.5);
  return VoteQuery(selected_, std::move(signs), d_);
}

LowVarianceAnalyst::LowVarianceAnalyst(std::size_t d, double p0,
                                       std::uint64_t seed)
    : d_(d), p0_(p0), seed_(seed), order_(ShuffledOrder(d, seed)) {
  if (d == 0) throw ParameterError("low-variance analyst needs d >= 1");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ParameterError("p0 must lie in (0, 1)");
}

StatisticalQuery LowVarianceAnalyst::NextQuery(
    std::span<const double> answers) {
  const std::size_t j = answers.size();
  if (asked_coords_.size() != j) {
    throw ProtocolError("low-variance analyst saw an inconsistent history");
  }
  std::size_t coord;
  if (j < d_) {
    coord = order_[j];
  } else {
    // Re-ask the attribute with the smallest latest answer.
    std::vector<double> latest(d_, 0.0);
    for (std::size_t i = 0; i < j; ++i) latest[asked_coords_[i]] = answers[i];
    coord = order_[0];
    for (std::size_t c : order_) {
      if (latest[c] < latest[coord]) coord = c;
    }
  }
  asked_coords_.push_back(coord);
  return CoordinateQuery(coord);
}

MonitorChoice MonitorSelect(const Transcript& transcript,
                            const TruthModel& truth, double tau) {
  if (transcript.size() == 0) {
    throw PreconditionError("monitor needs a nonempty transcript");
  }
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  std::size_t best = 0;
  double best_score = -1.0;
  double best_signed = 0.0;
  for (std::size_t j = 0; j < transcript.size(); ++j) {
    const StatisticalQuery& q = transcript.queries[j];
    const double err = transcript.answers[j] - truth.TrueMean(q);
    const double score = std::abs(err) / std::max(truth.TrueSd(q), tau);
    if (score > best_score) {
      best = j;
      best_score = score;
      best_signed = err;
    }
  }
  const StatisticalQuery& q = transcript.queries[best];
  if (best_signed >= 0.0) return {best, q, best_signed, best_score};
  return {best, Complement(q), -best_signed, best_score};
}

}  // namespace adasq
