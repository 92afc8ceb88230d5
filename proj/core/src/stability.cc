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

#include "adasq/stability.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "adasq/divergence.h"
#include "adasq/errors.h"

namespace adasq {
namespace {

void RequirePositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(name) + " must be positive and finite");
  }
}

void RequireNonnegative(double v, const char* name) {
  if (!(v >= 0.0)) throw ParameterError(std::string(name) + " must be >= 0");
}

// Shared by TailBoundBernstein and the report, which also admits epsilon = 0.
double TailFormula(double epsilon, std::size_t n, double tau,
                   double threshold) {
  const double shape = 2.0 + (2.0 / 3.0) * (threshold / tau);
  return shape / (threshold * threshold) *
         (epsilon + std::numbers::ln2 / static_cast<double>(n));
}

}  // namespace

StabilityLedger::StabilityLedger(std::size_t n) : n_(n) {}

void StabilityLedger::Append(double alkl) { Append(alkl, alkl); }

void StabilityLedger::Append(double alkl, double cap) {
  RequireNonnegative(alkl, "ALKL contribution");
  RequireNonnegative(cap, "ALKL cap");
  per_answer_alkl_.push_back(alkl);
  per_answer_cap_.push_back(cap);
  epsilon_total_ += alkl;
  cap_total_ += cap;
}

StabilityLedger Compose(StabilityLedger ledger, double eps_new) {
  ledger.Append(eps_new);
  return ledger;
}

double CalibratedNoiseVariance(double empirical_variance, double t, double T) {
  return std::max(empirical_variance / t, 1.0 / T);
}

double AlklOneAnswerExact(const QueryStats& stats, double t, double T) {
  RequirePositive(t, "t");
  RequirePositive(T, "T");
  const std::size_t n = stats.n();
  if (n < 2) throw PreconditionError("ALKL needs n >= 2");
  const GaussianSpec full(stats.mean,
                          CalibratedNoiseVariance(stats.variance, t, T));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const GaussianSpec loo(stats.loo_means[i], CalibratedNoiseVariance(
                                                   stats.loo_variances[i], t, T));
    total += KlGaussian(full, loo);
  }
  return total / static_cast<double>(n);
}

double AlklOneAnswerExact(const Dataset& dataset, const StatisticalQuery& query,
                          double t, double T) {
  return AlklOneAnswerExact(EvaluateQueryStats(dataset, query), t, T);
}

double AlklBoundFormula(std::size_t n, double t, double T) {
  if (n < 2) throw PreconditionError("ALKL bound needs n >= 2");
  RequirePositive(t, "t");
  RequirePositive(T, "T");
  const double nd = static_cast<double>(n);
  const double inflate = (1.0 + 1.0 / (nd - 1.0)) * (1.0 + 1.0 / (nd - 1.0));
  const double one_plus_zeta = inflate * (1.0 + (T / (t * nd)) * inflate);
  return (2.0 * t + (T / t) * one_plus_zeta) * one_plus_zeta /
         (4.0 * nd * nd);
}

bool InStabilityRegime(std::size_t n, double t, double T) {
  return n >= 20 && T <= std::min(t * t, t * static_cast<double>(n) / 10.0);
}

double MiFromAlkl(double epsilon, std::size_t n) {
  RequireNonnegative(epsilon, "epsilon");
  return epsilon * static_cast<double>(n);
}

double GenExpectationBound(double epsilon, double tau) {
  RequireNonnegative(epsilon, "epsilon");
  RequirePositive(tau, "tau");
  const double root = std::sqrt(epsilon);
  if (root <= tau) return 2.0 * root;
  return epsilon / tau + tau;
}

double EmpVarianceBound(double epsilon, double tau) {
  RequireNonnegative(epsilon, "epsilon");
  RequirePositive(tau, "tau");
  return 2.0 + epsilon / (tau * tau);
}

double PacBayesBound(double emp_mean, double mi, std::size_t n, double lambda) {
  if (!(lambda > 0.5)) throw ParameterError("lambda must exceed 1/2");
  RequireNonnegative(mi, "mutual information");
  if (n < 1) throw ParameterError("n must be at least 1");
  return (emp_mean + (lambda / static_cast<double>(n)) * mi) /
         (1.0 - 1.0 / (2.0 * lambda));
}

double EventProbBound(double mi, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("delta must lie in (0, 1)");
  }
  RequireNonnegative(mi, "mutual information");
  return (mi + std::numbers::ln2) / std::log(1.0 / delta);
}

double TailBoundBernstein(double epsilon, std::size_t n, double tau,
                          double threshold) {
  RequirePositive(epsilon, "epsilon");
  RequirePositive(tau, "tau");
  RequirePositive(threshold, "threshold");
  if (n < 1) throw ParameterError("n must be positive");
  return TailFormula(epsilon, n, tau, threshold);
}

double GaussMaxBound(std::size_t k) {
  if (k < 1) throw ParameterError("k must be at least 1");
  return 2.0 * std::log(2.0 * static_cast<double>(k));
}

BoundReport MakeBoundReport(double epsilon, std::size_t n, std::size_t k,
                            double tau, std::span<const double> betas) {
  RequirePositive(tau, "tau");
  if (n < 1) throw ParameterError("n must be positive");
  BoundReport report;
  report.mi_bound = MiFromAlkl(epsilon, n);
  report.gen_expectation = GenExpectationBound(epsilon, tau);
  report.emp_variance_factor = EmpVarianceBound(epsilon, tau);
  report.gauss_max = k == 0 ? 0.0 : GaussMaxBound(k);
  for (double beta : betas) {
    if (!(beta > 0.0 && beta < 1.0)) {
      throw ParameterError("tail levels need beta in (0, 1)");
    }
    TailLevel level;
    level.beta = beta;
    level.scaled_level = 3.0 / beta;
    level.probability_bound = TailFormula(epsilon, n, tau, 3.0 * tau / beta);
    report.tail.push_back(level);
  }
  return report;
}

}  // namespace adasq
