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

// KL divergence calculators for the distributions that appear in the
// stability analysis, and the two bounds derived from KL divergence that the
// accountant uses (expectation via the MGF, bias of a rare Bernoulli event).

#ifndef ADASQ_DIVERGENCE_H_
#define ADASQ_DIVERGENCE_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace adasq {

// Returned when a divergence is +infinity (absolute continuity fails).
inline constexpr double kInfiniteDivergence =
    std::numeric_limits<double>::infinity();

// N(mean, variance) with variance > 0.
class GaussianSpec {
 public:
  GaussianSpec(double mean, double variance);

  double mean() const { return mean_; }
  double variance() const { return variance_; }

  friend bool operator==(const GaussianSpec&, const GaussianSpec&) = default;

 private:
  double mean_;
  double variance_;
};

// Lap(mean, scale): density exp(-|x - mean| / scale) / (2 scale), variance
// 2 scale^2.
class LaplaceSpec {
 public:
  LaplaceSpec(double mean, double scale);

  double mean() const { return mean_; }
  double scale() const { return scale_; }

 private:
  double mean_;
  double scale_;
};

// A probability vector over an ordered list of integer labels.
class DiscreteDistribution {
 public:
  // Labels default to 0..probs.size()-1.
  explicit DiscreteDistribution(std::vector<double> probs);
  DiscreteDistribution(std::vector<std::int64_t> support,
                       std::vector<double> probs);

  std::span<const std::int64_t> support() const { return support_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<std::int64_t> support_;
  std::vector<double> probs_;
};

// D(N(p) || N(q)) = (mu - mu~)^2 / (2 v~) + (r - 1 - ln r) / 2, r = v / v~.
double KlGaussian(const GaussianSpec& p, const GaussianSpec& q);

// Closed-form upper bound on KlGaussian that replaces r - 1 - ln r by
// (1/r - 1)^2 r min{1, (2 + r)/6}.
double KlGaussianUpper(const GaussianSpec& p, const GaussianSpec& q);

struct LaplaceKl {
  double exact;
  double upper;
};

// Exact KL divergence between two Laplace laws together with the quadratic
// upper bound (mu~ - mu)^2 / (2 b b~) + (b~^2/b^2 - 1)^2 b^2 / (7 b~^2).
LaplaceKl KlLaplace(const LaplaceSpec& p, const LaplaceSpec& q);

// Binary KL divergence D(B(p) || B(q)) with 0 ln 0 = 0. Requires p, q in
// [0, 1]; returns kInfiniteDivergence when q is 0 or 1 and p differs from it.
double KlBernoulli(double p, double q);

// sum_i p_i ln(p_i / q_i). Throws if supports differ or p is not absolutely
// continuous with respect to q.
double KlDiscrete(const DiscreteDistribution& p, const DiscreteDistribution& q);

// Same sum over raw probability vectors of equal length, returning
// kInfiniteDivergence instead of throwing on absolute-continuity failure.
double KlProbabilities(std::span<const double> p, std::span<const double> q);

// Upper bound on E[X] from D(X || Y) and ln E[exp(t Y)]:
// (kl + log_mgf_at_t) / t for t > 0.
double MgfKlExpectationBound(double kl, double log_mgf_at_t, double t);

// Largest bias p consistent with D(B(p) || B(q)) <= kl:
// p <= (kl + ln 2) / ln(1/q).
double BernoulliBiasBound(double kl, double q);

// x - ln(1 + x) for x > -1, accurate near 0.
double XMinusLog1p(double x);

}  // namespace adasq

#endif  // ADASQ_DIVERGENCE_H_
