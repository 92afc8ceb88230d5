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

// Exact, estimator-free verification on tiny discrete instances: enumerate
// every dataset in X^n (|X| = d) and every output of a finite mechanism to
// compute mutual information, conditional mutual information and ALKL.

#ifndef ADASQ_ORACLE_H_
#define ADASQ_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adasq/divergence.h"

namespace adasq {

// Joint tables above this many cells are refused.
inline constexpr std::size_t kOracleCellLimit = 1'000'000;

// A randomized map from X^n (and X^{n-1}) to a finite output set, stored as
// one probability row per input tuple. Tuples over {0..d-1} are encoded as
// integers, position j carrying weight d^j.
class DiscreteMechanism {
 public:
  using Kernel = std::function<std::vector<double>(std::span<const int>)>;

  // Tabulates `kernel` on every tuple of length n and n - 1. Throws
  // PreconditionError when the table would exceed kOracleCellLimit or a row
  // is not a probability vector.
  DiscreteMechanism(std::string name, std::size_t domain_size, std::size_t n,
                    std::size_t num_outputs, Kernel kernel);

  const std::string& name() const { return name_; }
  std::size_t domain_size() const { return d_; }
  std::size_t n() const { return n_; }
  std::size_t num_outputs() const { return m_; }
  std::size_t num_inputs() const { return full_count_; }

  // Output distribution on the full tuple with the given code.
  std::span<const double> Row(std::size_t code) const;
  // Output distribution on the (n-1)-tuple with the given code.
  std::span<const double> ShortRow(std::size_t code) const;

  std::vector<int> Decode(std::size_t code, std::size_t length) const;
  // Code of the (n-1)-tuple obtained by deleting position i of `code`.
  std::size_t DropPosition(std::size_t code, std::size_t i) const;

 private:
  std::string name_;
  std::size_t d_;
  std::size_t n_;
  std::size_t m_;
  std::size_t full_count_;
  std::size_t short_count_;
  std::vector<double> full_;
  std::vector<double> short_;
};

// Output ignores the input.
DiscreteMechanism ConstantMechanism(std::size_t domain_size, std::size_t n,
                                    std::vector<double> output);
// Outputs s_1 exactly (d outputs). The hand-built mechanisms answer the
// empty tuple (n = 1, leave-one-out side) with the uniform distribution.
DiscreteMechanism FirstElementMechanism(std::size_t domain_size, std::size_t n);
// Outputs bit s_1 flipped with probability `flip` (d = 2).
DiscreteMechanism RandomizedResponseMechanism(std::size_t n, double flip);
// Majority bit of the input (fair coin on ties), flipped with probability
// `flip` (d = 2).
DiscreteMechanism NoisyMajorityMechanism(std::size_t n, double flip);
// Independent random rows for every input. Rows are normalised exponential
// draws, optionally sharpened by `concentration` (> 1 pushes mass to few
// outputs).
DiscreteMechanism RandomKernelMechanism(std::size_t domain_size, std::size_t n,
                                        std::size_t num_outputs,
                                        std::uint64_t seed,
                                        double concentration = 1.0);

// P^n over all tuple codes.
DiscreteDistribution ProductPrior(std::span<const double> marginal,
                                  std::size_t n);

// I(S; M(S)) for S ~ prior (prior indexed by tuple code).
double ExactMutualInformation(const DiscreteDistribution& prior,
                              const DiscreteMechanism& mech);

// (1/n) sum_i I(M(S); S_i | S_{-i}) for S ~ prior.
double ExactMiStability(const DiscreteDistribution& prior,
                        const DiscreteMechanism& mech);

// max_s (1/n) sum_i D(M(s) || M(s_{-i})); kInfiniteDivergence when some
// term is infinite.
double ExactAlkl(const DiscreteMechanism& mech);

struct ChainReport {
  std::size_t trials = 0;
  double alkl = 0.0;
  double max_mi_stability = 0.0;
  double max_mutual_information = 0.0;
  std::size_t events_checked = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// For `trials` random product priors (and as many random non-product
// priors for the first link) checks, at tolerance 1e-9,
//   (1/n) sum_i I(M(S); S_i | S_{-i}) <= ALKL,
//   I(M(S); S) <= n (1/n) sum_i I(M(S); S_i | S_{-i}),
// and, for enumerated events E on (S, M(S)) with probability delta under an
// independent copy of S, P[(S, M(S)) in E] <= (I + ln 2) / ln(1/delta).
ChainReport VerifyStabilityChain(const DiscreteMechanism& mech,
                                 std::size_t trials, std::uint64_t seed);

struct SweepReport {
  std::size_t mechanisms = 0;
  std::size_t priors = 0;
  std::size_t events_checked = 0;
  // "<mechanism name>: <violation>" lines.
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// VerifyStabilityChain over the hand-built mechanisms for n in {2, 3}
// (constant, first element, randomized response, noisy majority) plus
// `random_mechanisms` random kernels with d = 2, n in {2, 3}, 2 to 4
// outputs and a mix of flat and peaked rows.
SweepReport RunOracleSweep(std::size_t random_mechanisms,
                           std::size_t trials_per_mechanism,
                           std::uint64_t seed);

}  // namespace adasq

#endif  // ADASQ_ORACLE_H_
