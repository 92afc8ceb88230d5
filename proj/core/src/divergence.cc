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

#include "adasq/divergence.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "adasq/errors.h"

namespace adasq {

GaussianSpec::GaussianSpec(double mean, double variance)
    : mean_(mean), variance_(variance) {
  if (!std::isfinite(mean)) throw ParameterError("Gaussian mean must be finite");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ParameterError("Gaussian variance must be positive and finite, got " +
                         std::to_string(variance));
  }
}

LaplaceSpec::LaplaceSpec(double mean, double scale)
    : mean_(mean), scale_(scale) {
  if (!std::isfinite(mean)) throw ParameterError("Laplace mean must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("Laplace scale must be positive and finite, got " +
                         std::to_string(scale));
  }
}

namespace {

std::vector<std::int64_t> DefaultLabels(std::size_t n) {
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::int64_t>(i);
  return labels;
}

// p ln(p/q) for p, q > 0 without forming ln p - ln q unless the ratio
// overflows or underflows.
double PLogRatio(double p, double q) {
  const double ratio = p / q;
  if (ratio > 0.0 && std::isfinite(ratio)) return p * std::log(ratio);
  return p * (std::log(p) - std::log(q));
}

}  // namespace

// Copies on purpose: parameter evaluation order is unspecified, so moving
// could empty probs before size() is read.
DiscreteDistribution::DiscreteDistribution(std::vector<double> probs)
    : DiscreteDistribution(DefaultLabels(probs.size()), probs) {}

DiscreteDistribution::DiscreteDistribution(std::vector<std::int64_t> support,
                                           std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.size() != probs_.size()) {
    throw PreconditionError("support and probability vectors differ in length");
  }
  if (probs_.empty()) throw PreconditionError("empty distribution");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw ParameterError("negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("probabilities sum to " + std::to_string(total) +
                         ", not 1");
  }
}

double XMinusLog1p(double x) {
  if (!(x > -1.0)) throw ParameterError("XMinusLog1p needs x > -1");
  if (std::abs(x) < 1e-2) {
    // x^2/2 - x^3/3 + x^4/4 - ...; ten terms reach full double precision.
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += term / k;
      term *= -x;
    }
    return sum;
  }
  return x - std::log1p(x);
}

double KlGaussian(const GaussianSpec& p, const GaussianSpec& q) {
  const double dm = p.mean() - q.mean();
  const double r = p.variance() / q.variance();
  return dm * dm / (2.0 * q.variance()) + 0.5 * XMinusLog1p(r - 1.0);
}

double KlGaussianUpper(const GaussianSpec& p, const GaussianSpec& q) {
  const double dm = p.mean() - q.mean();
  const double r = p.variance() / q.variance();
  const double inv = q.variance() / p.variance() - 1.0;
  const double shape = std::min(1.0, (2.0 + r) / 6.0);
  return 0.5 * (dm * dm / p.variance() + inv * inv * shape) * r;
}

LaplaceKl KlLaplace(const LaplaceSpec& p, const LaplaceSpec& q) {
  const double gap = std::abs(q.mean() - p.mean());
  const double a = gap / p.scale();
  const double r = p.scale() / q.scale();
  // e^{-a} - (1 - a) = expm1(-a) + a, accurate for small a.
  const double location = r * (std::expm1(-a) + a);
  LaplaceKl kl;
  kl.exact = location + XMinusLog1p(r - 1.0);
  const double inv_sq = 1.0 / (r * r) - 1.0;
  kl.upper = gap * gap / (2.0 * p.scale() * q.scale()) +
             inv_sq * inv_sq * r * r / 7.0;
  return kl;
}

double KlBernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
    throw ParameterError("Bernoulli parameters must lie in [0, 1]");
  }
  const double probs_p[2] = {p, 1.0 - p};
  const double probs_q[2] = {q, 1.0 - q};
  return KlProbabilities(probs_p, probs_q);
}

double KlProbabilities(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw PreconditionError("probability vectors differ in length");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInfiniteDivergence;
    kl += PLogRatio(p[i], q[i]);
  }
  // Rounding can leave a tiny negative sum when p == q.
  return kl < 0.0 ? 0.0 : kl;
}

double KlDiscrete(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size() ||
      !std::equal(p.support().begin(), p.support().end(),
                  q.support().begin())) {
    throw PreconditionError("KL divergence needs identical supports");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] == 0.0) {
      throw PreconditionError(
          "p is not absolutely continuous with respect to q at label " +
          std::to_string(p.support()[i]));
    }
  }
  return KlProbabilities(p.probs(), q.probs());
}

double MgfKlExpectationBound(double kl, double log_mgf_at_t, double t) {
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  if (!(kl >= 0.0)) throw ParameterError("KL divergence must be nonnegative");
  return (kl + log_mgf_at_t) / t;
}

double BernoulliBiasBound(double kl, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("q must lie in (0, 1)");
  if (!(kl >= 0.0)) throw ParameterError("KL divergence must be nonnegative");
  return (kl + std::numbers::ln2) / std::log(1.0 / q);
}

}  // namespace adasq
