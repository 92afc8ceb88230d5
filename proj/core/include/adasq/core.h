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

// Data model for samples and statistical queries, together with the
// closed-form leave-one-out statistics used by the stability accountant.

#ifndef ADASQ_CORE_H_
#define ADASQ_CORE_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace adasq {

// A domain element. The core never interprets the coordinates; queries do.
using Record = std::vector<double>;

// Optional metadata attached to a query so that experiment-side code (truth
// models, monitors) can recognise its structure. The core ignores it.
class QueryTag {
 public:
  virtual ~QueryTag() = default;
};

// A map psi: X -> [0, 1] with an identifier. Immutable and cheap to copy.
class StatisticalQuery {
 public:
  using Function = std::function<double(const Record&)>;

  StatisticalQuery(std::string id, Function fn,
                   std::shared_ptr<const QueryTag> tag = nullptr);

  const std::string& id() const { return *id_; }

  // Raw evaluation. Range checking happens in Evaluate().
  double operator()(const Record& record) const { return (*fn_)(record); }

  const QueryTag* tag() const { return tag_.get(); }
  const std::shared_ptr<const QueryTag>& shared_tag() const { return tag_; }

 private:
  std::shared_ptr<const std::string> id_;
  std::shared_ptr<const Function> fn_;
  std::shared_ptr<const QueryTag> tag_;
};

// An ordered sample of n >= 2 records. Copies share the underlying storage.
class Dataset {
 public:
  explicit Dataset(std::vector<Record> records);

  std::size_t size() const { return records_->size(); }
  const Record& operator[](std::size_t i) const { return (*records_)[i]; }
  std::span<const Record> records() const { return *records_; }

  // The sample with element i removed. Requires size() >= 3 so that the
  // result is itself a valid Dataset.
  Dataset Without(std::size_t i) const;

 private:
  std::shared_ptr<const std::vector<Record>> records_;
};

// psi(s_i) for every record, failing with QueryRangeError on the first value
// outside [0, 1] (NaN included).
std::vector<double> Evaluate(const Dataset& dataset,
                             const StatisticalQuery& query);

struct LeaveOneOut {
  double mean;
  double variance;
};

// Empirical mean and (1/n) variance of a query over a sample, plus the
// leave-one-out pair for every index.
struct QueryStats {
  std::vector<double> values;
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> loo_means;
  std::vector<double> loo_variances;

  std::size_t n() const { return values.size(); }
  LeaveOneOut loo(std::size_t i) const {
    return {loo_means[i], loo_variances[i]};
  }
};

// Builds QueryStats from already-evaluated query values (n >= 2). The
// leave-one-out statistics come from the O(1)-per-index closed forms
//   mu_{-i} = (n mu - psi_i) / (n - 1)
//   sigma^2 - sigma_{-i}^2 = ((n/(n-1)) (psi_i - mu)^2 - sigma^2) / (n - 1).
QueryStats StatsFromValues(std::vector<double> values);

QueryStats EvaluateQueryStats(const Dataset& dataset,
                              const StatisticalQuery& query);

LeaveOneOut LeaveOneOutStats(const Dataset& dataset,
                             const StatisticalQuery& query, std::size_t i);

// Two-pass mean and (1/n) variance of a value list.
LeaveOneOut MeanAndVariance(std::span<const double> values);

// Recomputes the leave-one-out statistics for index i by rescanning the other
// n - 1 values. Quadratic when used for every i; kept as the cross-check
// path for the closed forms.
LeaveOneOut RescanLeaveOneOut(std::span<const double> values, std::size_t i);

struct ScaledError {
  double raw_error;
  double scale;
  double scaled;
};

// |answer - true_mean| / max(tau * true_sd, tau^2).
ScaledError ComputeScaledError(double answer, double true_mean, double true_sd,
                               double tau);

}  // namespace adasq

#endif  // ADASQ_CORE_H_
