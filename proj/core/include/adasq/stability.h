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

// Average leave-one-out KL (ALKL) accounting for the calibrated Gaussian
// mechanism and the scalar bounds that turn an ALKL budget into mutual
// information, generalization and tail guarantees.
//
// All bound functions are pure calculators on scalars; none of them looks at
// a dataset.

#ifndef ADASQ_STABILITY_H_
#define ADASQ_STABILITY_H_

#include <cstddef>
#include <span>
#include <vector>

#include "adasq/core.h"

namespace adasq {

// Per-answer ALKL contributions of an interaction and their running total.
//
// Each entry carries the exact data-dependent ALKL of that answer and a cap,
// the worst-case value the mechanism guarantees for it. Entries supplied from
// outside (any KL-stable step) use the same value for both.
class StabilityLedger {
 public:
  explicit StabilityLedger(std::size_t n);

  // Throws ParameterError on a negative or NaN contribution.
  void Append(double alkl);
  void Append(double alkl, double cap);

  std::size_t n() const { return n_; }
  std::size_t size() const { return per_answer_alkl_.size(); }
  std::span<const double> per_answer_alkl() const { return per_answer_alkl_; }
  std::span<const double> per_answer_cap() const { return per_answer_cap_; }
  double epsilon_total() const { return epsilon_total_; }
  double cap_total() const { return cap_total_; }

 private:
  std::size_t n_;
  std::vector<double> per_answer_alkl_;
  std::vector<double> per_answer_cap_;
  double epsilon_total_ = 0.0;
  double cap_total_ = 0.0;
};

// Adaptive composition: returns a ledger with eps_new appended.
StabilityLedger Compose(StabilityLedger ledger, double eps_new);

// Noise variance used for one answer: max(variance / t, 1 / T).
double CalibratedNoiseVariance(double empirical_variance, double t, double T);

// (1/n) sum_i D(N(mu, V) || N(mu_{-i}, V_{-i})) with
// V = max(sigma^2/t, 1/T) and V_{-i} = max(sigma_{-i}^2/t, 1/T).
double AlklOneAnswerExact(const QueryStats& stats, double t, double T);
double AlklOneAnswerExact(const Dataset& dataset, const StatisticalQuery& query,
                          double t, double T);

// Worst-case ALKL of one calibrated answer over all samples of size n:
//   (1 / 4n^2) (2t + (T/t)(1 + zeta)) (1 + zeta),
//   1 + zeta = (1 + 1/(n-1))^2 (1 + (T/(t n)) (1 + 1/(n-1))^2).
double AlklBoundFormula(std::size_t n, double t, double T);

// True when n >= 20 and T <= min(t^2, t n / 10); in that regime each answer
// costs at most max(t, T/t) / n^2.
bool InStabilityRegime(std::size_t n, double t, double T);

// I(M(S); S) <= epsilon * n for product-distributed S.
double MiFromAlkl(double epsilon, std::size_t n);

// Bound on E[(S[psi] - P[psi]) / max(sd, tau)] for an epsilon-ALKL stable
// query selector: 2 sqrt(eps) when sqrt(eps) <= tau, eps / tau + tau above.
double GenExpectationBound(double epsilon, double tau);

// Bound on E[(empirical sd / max(sd, tau))^2]: 2 + eps / tau^2.
double EmpVarianceBound(double epsilon, double tau);

// PAC-Bayes style bound on E[P[psi]]:
// (emp_mean + (lambda / n) mi) / (1 - 1 / (2 lambda)), lambda > 1/2.
double PacBayesBound(double emp_mean, double mi, std::size_t n, double lambda);

// Probability of an event on (S, M(S)) whose probability on an independent
// copy is at most delta: (mi + ln 2) / ln(1 / delta).
double EventProbBound(double mi, double delta);

// P[(S[psi] - P[psi]) / max(sd, tau) > threshold]
//   <= (2 + (2/3) threshold / tau) / threshold^2 * (eps + ln 2 / n).
double TailBoundBernstein(double epsilon, std::size_t n, double tau,
                          double threshold);

// E[max_j xi_j^2] <= 2 ln(2k) for k independent standard normals.
double GaussMaxBound(std::size_t k);

struct TailLevel {
  double beta;
  // Scaled-error level 3 / beta, i.e. threshold 3 tau / beta in units of
  // max(sd, tau).
  double scaled_level;
  double probability_bound;
};

struct BoundReport {
  double mi_bound = 0.0;
  double gen_expectation = 0.0;
  double emp_variance_factor = 0.0;
  std::vector<TailLevel> tail;
  double gauss_max = 0.0;
};

inline constexpr double kDefaultBetaValues[] = {0.5, 0.1, 0.01};
inline constexpr std::span<const double> kDefaultBetas{kDefaultBetaValues};

// Every bound evaluated at one (epsilon, n, k, tau). k = 0 gives
// gauss_max = 0.
BoundReport MakeBoundReport(double epsilon, std::size_t n, std::size_t k,
                            double tau,
                            std::span<const double> betas = kDefaultBetas);

}  // namespace adasq

#endif  // ADASQ_STABILITY_H_
