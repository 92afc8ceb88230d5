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

#include "adasq/core.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "adasq/errors.h"

namespace adasq {

QueryRangeError::QueryRangeError(std::string query_id, std::size_t index,
                                 double value)
    : Error([&] {
        std::ostringstream os;
        os << "query '" << query_id << "' returned " << value
           << " outside [0, 1] on record " << index;
        return os.str();
      }()),
      query_id_(std::move(query_id)),
      index_(index),
      value_(value) {}

StatisticalQuery::StatisticalQuery(std::string id, Function fn,
                                   std::shared_ptr<const QueryTag> tag)
    : id_(std::make_shared<const std::string>(std::move(id))),
      fn_(std::make_shared<const Function>(std::move(fn))),
      tag_(std::move(tag)) {
  if (!*fn_) throw PreconditionError("statistical query needs a function");
}

Dataset::Dataset(std::vector<Record> records)
    : records_(std::make_shared<const std::vector<Record>>(std::move(records))) {
  if (records_->size() < 2) {
    throw PreconditionError("a dataset needs at least 2 records, got " +
                            std::to_string(records_->size()));
  }
}

Dataset Dataset::Without(std::size_t i) const {
  if (i >= size()) {
    throw PreconditionError("leave-one-out index " + std::to_string(i) +
                            " out of range for n = " + std::to_string(size()));
  }
  std::vector<Record> rest;
  rest.reserve(size() - 1);
  for (std::size_t j = 0; j < size(); ++j) {
    if (j != i) rest.push_back((*records_)[j]);
  }
  return Dataset(std::move(rest));
}

std::vector<double> Evaluate(const Dataset& dataset,
                             const StatisticalQuery& query) {
  std::vector<double> values(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double v = query(dataset[i]);
    // Written so that NaN fails the check.
    if (!(v >= 0.0 && v <= 1.0)) throw QueryRangeError(query.id(), i, v);
    values[i] = v;
  }
  return values;
}

LeaveOneOut MeanAndVariance(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("mean of an empty sample");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  // One refinement step so that, e.g., a constant sample has an exact mean.
  double residual = 0.0;
  for (double v : values) residual += v - sum / n;
  const double mean = sum / n + residual / n;
  double ss = 0.0;
  double drift = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
    drift += v - mean;
  }
  // Corrected two-pass: removes the first-order rounding error in the mean.
  const double variance = std::max(0.0, (ss - drift * drift / n) / n);
  return {mean, variance};
}

QueryStats StatsFromValues(std::vector<double> values) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw PreconditionError("leave-one-out statistics need n >= 2, got " +
                            std::to_string(n));
  }
  QueryStats stats;
  const LeaveOneOut full = MeanAndVariance(values);
  stats.mean = full.mean;
  stats.variance = full.variance;
  stats.loo_means.resize(n);
  stats.loo_variances.resize(n);
  const double nd = static_cast<double>(n);
  const double m1 = nd - 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = values[i] - full.mean;
    stats.loo_means[i] = full.mean - dev / m1;
    const double drop = ((nd / m1) * dev * dev - full.variance) / m1;
    stats.loo_variances[i] = std::max(0.0, full.variance - drop);
  }
  stats.values = std::move(values);
  return stats;
}

QueryStats EvaluateQueryStats(const Dataset& dataset,
                              const StatisticalQuery& query) {
  return StatsFromValues(Evaluate(dataset, query));
}

LeaveOneOut LeaveOneOutStats(const Dataset& dataset,
                             const StatisticalQuery& query, std::size_t i) {
  if (i >= dataset.size()) {
    throw PreconditionError("leave-one-out index " + std::to_string(i) +
                            " out of range for n = " +
                            std::to_string(dataset.size()));
  }
  return EvaluateQueryStats(dataset, query).loo(i);
}

LeaveOneOut RescanLeaveOneOut(std::span<const double> values, std::size_t i) {
  if (values.size() < 2 || i >= values.size()) {
    throw PreconditionError("rescan needs n >= 2 and i < n");
  }
  std::vector<double> rest;
  rest.reserve(values.size() - 1);
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j != i) rest.push_back(values[j]);
  }
  return MeanAndVariance(rest);
}

ScaledError ComputeScaledError(double answer, double true_mean, double true_sd,
                               double tau) {
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  if (!(true_sd >= 0.0)) throw ParameterError("true_sd must be nonnegative");
  ScaledError e;
  e.raw_error = answer - true_mean;
  e.scale = std::max(tau * true_sd, tau * tau);
  e.scaled = std::abs(e.raw_error) / e.scale;
  return e;
}

}  // namespace adasq
