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

#include "adasq/oracle.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "adasq/divergence.h"
#include "adasq/errors.h"
#include "adasq/stability.h"
#include "support/test_support.h"

namespace adasq {
namespace {

using testing::PlainKl;
using testing::Rng;

std::vector<double> ToVector(std::span<const double> s) {
  return {s.begin(), s.end()};
}

// I(S; M(S)) = sum_s p(s) sum_o p(o|s) ln(p(o|s) / p(o)), straight from the
// tabulated rows.
double DirectMi(const std::vector<double>& prior, const DiscreteMechanism& m) {
  std::vector<double> out(m.num_outputs(), 0.0);
  for (std::size_t s = 0; s < prior.size(); ++s) {
    for (std::size_t o = 0; o < out.size(); ++o) out[o] += prior[s] * m.Row(s)[o];
  }
  double mi = 0.0;
  for (std::size_t s = 0; s < prior.size(); ++s) {
    mi += prior[s] * PlainKl(ToVector(m.Row(s)), out);
  }
  return mi;
}

double Entropy2(double p) {
  return -p * std::log(p) - (1 - p) * std::log(1 - p);
}

TEST(ExactMutualInformationTest, IdentityOnOneBit) {
  const auto mech = FirstElementMechanism(2, 1);
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_NEAR(ExactMutualInformation(ProductPrior(half, 1), mech),
              std::log(2.0), 1e-15);
}

TEST(ExactMutualInformationTest, ConstantIsZero) {
  const auto mech = ConstantMechanism(2, 3, {0.25, 0.75});
  const std::vector<double> m = {0.3, 0.7};
  EXPECT_EQ(ExactMutualInformation(ProductPrior(m, 3), mech), 0.0);
}

TEST(ExactMutualInformationTest, RandomizedResponseTwoByTwo) {
  const auto mech = RandomizedResponseMechanism(1, 0.25);
  const std::vector<double> half = {0.5, 0.5};
  // Joint over (s, o) and the product of its marginals.
  const DiscreteDistribution joint({0.375, 0.125, 0.125, 0.375});
  const DiscreteDistribution product({0.25, 0.25, 0.25, 0.25});
  const double expected = KlDiscrete(joint, product);
  EXPECT_NEAR(expected, std::log(2.0) - Entropy2(0.25), 1e-15);
  EXPECT_NEAR(ExactMutualInformation(ProductPrior(half, 1), mech), expected,
              1e-15);
}

TEST(ExactMutualInformationTest, SymmetricUnderOutputRelabeling) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto base = RandomKernelMechanism(2, 3, 4, rng(), rep % 2 ? 4 : 1);
    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    auto permuted_row = [&](std::span<const double> row) {
      std::vector<double> out(4);
      for (std::size_t o = 0; o < 4; ++o) out[perm[o]] = row[o];
      return out;
    };
    const DiscreteMechanism relabeled(
        "relabeled", 2, 3, 4, [&](std::span<const int> s) {
          std::size_t code = 0, w = 1;
          for (int x : s) {
            code += static_cast<std::size_t>(x) * w;
            w *= 2;
          }
          return permuted_row(s.size() == 3 ? base.Row(code)
                                            : base.ShortRow(code));
        });
    const std::vector<double> m = {0.35, 0.65};
    const auto prior = ProductPrior(m, 3);
    EXPECT_NEAR(ExactMutualInformation(prior, base),
                ExactMutualInformation(prior, relabeled), 1e-14);
    EXPECT_NEAR(ExactMiStability(prior, base),
                ExactMiStability(prior, relabeled), 1e-14);
    EXPECT_NEAR(ExactAlkl(base), ExactAlkl(relabeled), 1e-14);
  }
}

TEST(ExactMutualInformationTest, MatchesDirectSum) {
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const auto mech = RandomKernelMechanism(2, 2 + rep % 2, 3, rng());
    const std::vector<double> prior = testing::RandomSimplex(rng, mech.num_inputs());
    EXPECT_NEAR(ExactMutualInformation(DiscreteDistribution(prior), mech),
                DirectMi(prior, mech), 1e-13);
  }
}

TEST(ExactAlklTest, ConstantIsZero) {
  EXPECT_EQ(ExactAlkl(ConstantMechanism(2, 3, {0.5, 0.5})), 0.0);
}

TEST(ExactAlklTest, FirstElementIsInfinite) {
  EXPECT_EQ(ExactAlkl(FirstElementMechanism(2, 2)), kInfiniteDivergence);
}

TEST(ExactAlklTest, RandomizedResponseClosedForm) {
  // Dropping s_1 makes s_2 the first element; dropping s_2 changes nothing.
  const double expected = 0.5 * PlainKl({0.75, 0.25}, {0.25, 0.75});
  EXPECT_NEAR(ExactAlkl(RandomizedResponseMechanism(2, 0.25)), expected, 1e-15);
}

// P[output 1] for the flipped majority of `bits`, fair coin on ties.
double MajorityOne(const std::vector<int>& bits, double flip) {
  int ones = 0;
  for (int b : bits) ones += b;
  const int zeros = static_cast<int>(bits.size()) - ones;
  if (ones == zeros) return 0.5;
  return ones > zeros ? 1 - flip : flip;
}

TEST(ExactAlklTest, NoisyMajorityByEnumeration) {
  const double flip = 0.3;
  double worst = 0.0;
  for (int code = 0; code < 8; ++code) {
    const std::vector<int> s = {code & 1, (code >> 1) & 1, (code >> 2) & 1};
    const double p = MajorityOne(s, flip);
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      std::vector<int> rest;
      for (int j = 0; j < 3; ++j) {
        if (j != i) rest.push_back(s[j]);
      }
      const double q = MajorityOne(rest, flip);
      total += PlainKl({1 - p, p}, {1 - q, q});
    }
    worst = std::max(worst, total / 3);
  }
  const double alkl = ExactAlkl(NoisyMajorityMechanism(3, flip));
  EXPECT_TRUE(std::isfinite(alkl));
  EXPECT_NEAR(alkl, worst, 1e-15);
  EXPECT_GT(alkl, 0.0);
}

TEST(ExactMiStabilityTest, RandomizedResponseClosedForm) {
  // Only s_1 matters: I(M; S_1 | S_2) = ln 2 - H(flip), I(M; S_2 | S_1) = 0.
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_NEAR(ExactMiStability(ProductPrior(half, 2),
                               RandomizedResponseMechanism(2, 0.25)),
              (std::log(2.0) - Entropy2(0.25)) / 2, 1e-15);
}

TEST(VerifyStabilityChainTest, ConstantAllZero) {
  const ChainReport r = VerifyStabilityChain(ConstantMechanism(2, 2, {0.4, 0.6}), 5, 1);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.trials, 5u);
  EXPECT_EQ(r.alkl, 0.0);
  // Random priors leave only rounding in the marginal ratios.
  EXPECT_NEAR(r.max_mi_stability, 0.0, 1e-15);
  EXPECT_NEAR(r.max_mutual_information, 0.0, 1e-15);
}

TEST(VerifyStabilityChainTest, RandomizedResponseHolds) {
  const ChainReport r =
      VerifyStabilityChain(RandomizedResponseMechanism(2, 0.25), 10, 2);
  EXPECT_TRUE(r.ok());
  EXPECT_GT(r.events_checked, 0u);
  EXPECT_LE(r.max_mi_stability, r.alkl + 1e-9);
  EXPECT_LE(r.max_mutual_information, 2 * r.max_mi_stability + 1e-9);
}

TEST(VerifyStabilityChainTest, InfiniteAlklIsTriviallySatisfied) {
  EXPECT_TRUE(VerifyStabilityChain(FirstElementMechanism(2, 2), 4, 3).ok());
}

TEST(OracleSweepTest, HundredRandomKernelsNoViolations) {
  const SweepReport r = RunOracleSweep(100, 3, 1);
  for (const std::string& v : r.violations) ADD_FAILURE() << v;
  EXPECT_GE(r.mechanisms, 100u);
  EXPECT_GT(r.events_checked, 0u);
}

TEST(OracleChainProperty, ChainAgainstIndependentMi) {
  Rng rng(19);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 2 + rep % 2;
    const auto mech = RandomKernelMechanism(2, n, 2 + rep % 3, rng(),
                                            rep % 4 == 0 ? 6.0 : 1.0);
    const std::vector<double> marginal = testing::RandomSimplex(rng, 2);
    const DiscreteDistribution prior = ProductPrior(marginal, n);
    const double mi = DirectMi(ToVector(prior.probs()), mech);
    const double stab = ExactMiStability(prior, mech);
    ASSERT_GE(mi, -1e-15);
    ASSERT_LE(mi, n * stab + 1e-9);
    ASSERT_LE(stab, ExactAlkl(mech) + 1e-9);
  }
}

// The mechanism's output picks one of its num_outputs() queries; each query
// is a random table over the domain. Compares the true and empirical means of
// the selected query, averaged over S ~ P^n and the mechanism.
void CheckPacBayes(const DiscreteMechanism& mech,
                   const std::vector<double>& marginal,
                   const std::vector<std::vector<double>>& table) {
  const std::size_t n = mech.n(), d = mech.domain_size();
  const DiscreteDistribution prior = ProductPrior(marginal, n);
  double true_mean = 0.0, emp_mean = 0.0;
  for (std::size_t s = 0; s < mech.num_inputs(); ++s) {
    const std::vector<int> tuple = mech.Decode(s, n);
    for (std::size_t o = 0; o < mech.num_outputs(); ++o) {
      const double w = prior[s] * mech.Row(s)[o];
      double pop = 0.0, emp = 0.0;
      for (std::size_t x = 0; x < d; ++x) pop += marginal[x] * table[o][x];
      for (int x : tuple) emp += table[o][x] / static_cast<double>(n);
      true_mean += w * pop;
      emp_mean += w * emp;
    }
  }
  const double mi = ExactMutualInformation(prior, mech);
  for (double lambda : {0.51, 0.6, 0.75, 1.0, 1.5, 2.0, 4.0, 10.0, 100.0}) {
    ASSERT_LE(true_mean, PacBayesBound(emp_mean, mi, n, lambda) + 1e-12)
        << mech.name() << " lambda=" << lambda;
  }
}

TEST(PacBayesOracleTest, TrueMeanUnderBoundOnGrid) {
  Rng rng(77);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 2 + rep % 2, n = 2 + (rep / 2) % 2, m = 3;
    std::vector<std::vector<double>> table(m, std::vector<double>(d));
    for (auto& row : table) {
      for (double& v : row) v = testing::Uniform(rng, 0, 1);
    }
    const std::vector<double> marginal = testing::RandomSimplex(rng, d);
    CheckPacBayes(RandomKernelMechanism(d, n, m, rng(), rep % 3 ? 1.0 : 8.0),
                  marginal, table);
    // The overfitting choice: the query with the lowest empirical mean.
    const DiscreteMechanism pick_lowest(
        "pick_lowest", d, n, m, [&](std::span<const int> s) {
          std::vector<double> row(m, 0.0);
          if (s.empty()) return std::vector<double>(m, 1.0 / m);
          std::size_t best = 0;
          double best_sum = INFINITY;
          for (std::size_t o = 0; o < m; ++o) {
            double sum = 0.0;
            for (int x : s) sum += table[o][x];
            if (sum < best_sum) best_sum = sum, best = o;
          }
          row[best] = 1.0;
          return row;
        });
    CheckPacBayes(pick_lowest, marginal, table);
  }
}

TEST(OracleErrorsTest, SizeGuardAndBadRows) {
  EXPECT_THROW(RandomKernelMechanism(10, 6, 2, 1), PreconditionError);
  EXPECT_THROW(DiscreteMechanism("bad", 2, 1, 2,
                                 [](std::span<const int>) {
                                   return std::vector<double>{0.5, 0.6};
                                 }),
               PreconditionError);
  EXPECT_THROW(DiscreteMechanism("short", 2, 1, 2,
                                 [](std::span<const int>) {
                                   return std::vector<double>{1.0};
                                 }),
               PreconditionError);
}

}  // namespace
}  // namespace adasq
