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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "adasq/errors.h"
#include "adasq/stability.h"

namespace adasq {
namespace {

constexpr double kChainTolerance = 1e-9;

std::size_t CheckedPower(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > kOracleCellLimit / std::max<std::size_t>(base, 1)) {
      throw PreconditionError("oracle instance exceeds the enumeration limit");
    }
    out *= base;
  }
  return out;
}

void StoreRow(std::vector<double>& table, std::size_t code, std::size_t m,
              const std::vector<double>& row, const std::string& name) {
  if (row.size() != m) {
    throw PreconditionError("kernel of " + name + " returned " +
                            std::to_string(row.size()) + " probabilities, " +
                            "expected " + std::to_string(m));
  }
  double total = 0.0;
  for (double p : row) {
    if (!(p >= 0.0)) throw PreconditionError("negative kernel probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw PreconditionError("kernel row of " + name + " sums to " +
                            std::to_string(total));
  }
  std::copy(row.begin(), row.end(), table.begin() + code * m);
}

std::vector<double> Uniform(std::size_t m) {
  return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

std::vector<double> RandomSimplex(std::size_t m, std::mt19937_64& rng,
                                  double concentration) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(m);
  double total = 0.0;
  for (double& v : w) {
    v = std::pow(expo(rng), concentration);
    total += v;
  }
  for (double& v : w) v /= total;
  // Renormalise once more so the row sums to 1 within an ulp or two.
  const double again = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= again;
  return w;
}

// Marginal distribution of M(S) for S ~ prior.
std::vector<double> OutputMarginal(const DiscreteDistribution& prior,
                                   const DiscreteMechanism& mech) {
  std::vector<double> py(mech.num_outputs(), 0.0);
  for (std::size_t s = 0; s < mech.num_inputs(); ++s) {
    const auto row = mech.Row(s);
    for (std::size_t y = 0; y < py.size(); ++y) py[y] += prior[s] * row[y];
  }
  return py;
}

void CheckPrior(const DiscreteDistribution& prior,
                const DiscreteMechanism& mech) {
  if (prior.size() != mech.num_inputs()) {
    throw PreconditionError("prior has " + std::to_string(prior.size()) +
                            " atoms, mechanism has " +
                            std::to_string(mech.num_inputs()) + " inputs");
  }
}

std::string Describe(const char* what, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": " << lhs << " > " << rhs;
  return os.str();
}

// Low-probability event check on one prior: for every event E, with p and q
// the probabilities of E under the joint law and under the product of
// marginals, p <= (I + ln 2) / ln(1/q) whenever 0 < q < 1, and
// D(B(p)||B(q)) <= I.
void CheckEvents(const DiscreteDistribution& prior,
                 const DiscreteMechanism& mech, double mi,
                 std::mt19937_64& rng, ChainReport& report) {
  const std::size_t m = mech.num_outputs();
  const std::size_t cells = mech.num_inputs() * m;
  const std::vector<double> py = OutputMarginal(prior, mech);
  std::vector<double> joint(cells), product(cells);
  for (std::size_t s = 0; s < mech.num_inputs(); ++s) {
    const auto row = mech.Row(s);
    for (std::size_t y = 0; y < m; ++y) {
      joint[s * m + y] = prior[s] * row[y];
      product[s * m + y] = prior[s] * py[y];
    }
  }
  auto check = [&](const std::vector<char>& member) {
    double p = 0.0, q = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      if (member[c]) {
        p += joint[c];
        q += product[c];
      }
    }
    p = std::clamp(p, 0.0, 1.0);
    q = std::clamp(q, 0.0, 1.0);
    ++report.events_checked;
    if (q > 0.0 && q < 1.0) {
      const double bound = EventProbBound(mi, q);
      if (p > bound + kChainTolerance) {
        report.violations.push_back(
            Describe("event probability exceeds bound", p, bound));
      }
      const double kl = KlBernoulli(p, q);
      if (kl > mi + kChainTolerance) {
        report.violations.push_back(
            Describe("event divergence exceeds mutual information", kl, mi));
      }
    }
  };
  std::vector<char> member(cells, 0);
  if (cells <= 12) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << cells); ++mask) {
      for (std::size_t c = 0; c < cells; ++c) member[c] = (mask >> c) & 1;
      check(member);
    }
    return;
  }
  // Likelihood-ratio level sets are the extremal events; add random ones.
  std::vector<std::size_t> by_ratio(cells);
  std::iota(by_ratio.begin(), by_ratio.end(), std::size_t{0});
  std::sort(by_ratio.begin(), by_ratio.end(), [&](std::size_t a, std::size_t b) {
    return joint[a] * product[b] > joint[b] * product[a];
  });
  std::fill(member.begin(), member.end(), 0);
  for (std::size_t c : by_ratio) {
    member[c] = 1;
    check(member);
  }
  std::bernoulli_distribution coin(0.5);
  for (int e = 0; e < 2000; ++e) {
    for (std::size_t c = 0; c < cells; ++c) member[c] = coin(rng);
    check(member);
  }
}

}  // namespace

DiscreteMechanism::DiscreteMechanism(std::string name, std::size_t domain_size,
                                     std::size_t n, std::size_t num_outputs,
                                     Kernel kernel)
    : name_(std::move(name)), d_(domain_size), n_(n), m_(num_outputs) {
  if (d_ < 1 || n_ < 1 || m_ < 1) {
    throw PreconditionError("discrete mechanism needs d >= 1, n >= 1, m >= 1");
  }
  if (!kernel) throw PreconditionError("discrete mechanism needs a kernel");
  full_count_ = CheckedPower(d_, n_);
  short_count_ = CheckedPower(d_, n_ - 1);
  if (full_count_ * m_ > kOracleCellLimit) {
    throw PreconditionError("oracle instance exceeds the enumeration limit");
  }
  full_.resize(full_count_ * m_);
  short_.resize(short_count_ * m_);
  for (std::size_t code = 0; code < full_count_; ++code) {
    StoreRow(full_, code, m_, kernel(Decode(code, n_)), name_);
  }
  for (std::size_t code = 0; code < short_count_; ++code) {
    StoreRow(short_, code, m_, kernel(Decode(code, n_ - 1)), name_);
  }
}

std::span<const double> DiscreteMechanism::Row(std::size_t code) const {
  return std::span<const double>(full_).subspan(code * m_, m_);
}

std::span<const double> DiscreteMechanism::ShortRow(std::size_t code) const {
  return std::span<const double>(short_).subspan(code * m_, m_);
}

std::vector<int> DiscreteMechanism::Decode(std::size_t code,
                                           std::size_t length) const {
  std::vector<int> tuple(length);
  for (std::size_t j = 0; j < length; ++j) {
    tuple[j] = static_cast<int>(code % d_);
    code /= d_;
  }
  return tuple;
}

std::size_t DiscreteMechanism::DropPosition(std::size_t code,
                                            std::size_t i) const {
  std::size_t out = 0;
  std::size_t weight = 1;
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t digit = code % d_;
    code /= d_;
    if (j == i) continue;
    out += digit * weight;
    weight *= d_;
  }
  return out;
}

DiscreteMechanism ConstantMechanism(std::size_t domain_size, std::size_t n,
                                    std::vector<double> output) {
  const std::size_t m = output.size();
  return DiscreteMechanism("constant", domain_size, n, m,
                           [output](std::span<const int>) { return output; });
}

DiscreteMechanism FirstElementMechanism(std::size_t domain_size,
                                        std::size_t n) {
  return DiscreteMechanism(
      "first_element", domain_size, n, domain_size,
      [domain_size](std::span<const int> s) {
        if (s.empty()) return Uniform(domain_size);
        std::vector<double> row(domain_size, 0.0);
        row[static_cast<std::size_t>(s[0])] = 1.0;
        return row;
      });
}

DiscreteMechanism RandomizedResponseMechanism(std::size_t n, double flip) {
  if (!(flip >= 0.0 && flip <= 1.0)) throw ParameterError("flip in [0, 1]");
  return DiscreteMechanism("randomized_response", 2, n, 2,
                           [flip](std::span<const int> s) {
                             if (s.empty()) return Uniform(2);
                             std::vector<double> row(2, flip);
                             row[static_cast<std::size_t>(s[0])] = 1.0 - flip;
                             return row;
                           });
}

DiscreteMechanism NoisyMajorityMechanism(std::size_t n, double flip) {
  if (!(flip >= 0.0 && flip <= 1.0)) throw ParameterError("flip in [0, 1]");
  return DiscreteMechanism(
      "noisy_majority", 2, n, 2, [flip](std::span<const int> s) {
        const auto ones = static_cast<std::size_t>(
            std::count(s.begin(), s.end(), 1));
        const std::size_t zeros = s.size() - ones;
        if (ones == zeros) return std::vector<double>{0.5, 0.5};
        std::vector<double> row(2, flip);
        row[ones > zeros ? 1 : 0] = 1.0 - flip;
        return row;
      });
}

DiscreteMechanism RandomKernelMechanism(std::size_t domain_size, std::size_t n,
                                        std::size_t num_outputs,
                                        std::uint64_t seed,
                                        double concentration) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  // The constructor tabulates full-length tuples first, then short ones, in
  // code order, so the draws are reproducible from the seed.
  return DiscreteMechanism(
      "random_kernel", domain_size, n, num_outputs,
      [rng, num_outputs, concentration](std::span<const int>) {
        return RandomSimplex(num_outputs, *rng, concentration);
      });
}

DiscreteDistribution ProductPrior(std::span<const double> marginal,
                                  std::size_t n) {
  const std::size_t d = marginal.size();
  const std::size_t count = CheckedPower(d, n);
  std::vector<double> probs(count, 1.0);
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t rest = code;
    for (std::size_t j = 0; j < n; ++j) {
      probs[code] *= marginal[rest % d];
      rest /= d;
    }
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  return DiscreteDistribution(std::move(probs));
}

double ExactMutualInformation(const DiscreteDistribution& prior,
                              const DiscreteMechanism& mech) {
  CheckPrior(prior, mech);
  const std::vector<double> py = OutputMarginal(prior, mech);
  double mi = 0.0;
  for (std::size_t s = 0; s < mech.num_inputs(); ++s) {
    if (prior[s] == 0.0) continue;
    mi += prior[s] * KlProbabilities(mech.Row(s), py);
  }
  return std::max(0.0, mi);
}

double ExactMiStability(const DiscreteDistribution& prior,
                        const DiscreteMechanism& mech) {
  CheckPrior(prior, mech);
  const std::size_t m = mech.num_outputs();
  const std::size_t short_count = mech.num_inputs() / mech.domain_size();
  double total = 0.0;
  for (std::size_t i = 0; i < mech.n(); ++i) {
    // Mixture of M(z o_i x) over x ~ S_i | S_{-i} = z, unnormalised.
    std::vector<double> mixture(short_count * m, 0.0);
    std::vector<double> weight(short_count, 0.0);
    for (std::size_t s = 0; s < mech.num_inputs(); ++s) {
      const std::size_t z = mech.DropPosition(s, i);
      weight[z] += prior[s];
      const auto row = mech.Row(s);
      for (std::size_t y = 0; y < m; ++y) mixture[z * m + y] += prior[s] * row[y];
    }
    for (std::size_t z = 0; z < short_count; ++z) {
      if (weight[z] == 0.0) continue;
      for (std::size_t y = 0; y < m; ++y) mixture[z * m + y] /= weight[z];
    }
    double term = 0.0;
    for (std::size_t s = 0; s < mech.num_inputs(); ++s) {
      if (prior[s] == 0.0) continue;
      const std::size_t z = mech.DropPosition(s, i);
      term += prior[s] * KlProbabilities(
                             mech.Row(s),
                             std::span<const double>(mixture).subspan(z * m, m));
    }
    total += term;
  }
  return std::max(0.0, total / static_cast<double>(mech.n()));
}

double ExactAlkl(const DiscreteMechanism& mech) {
  double worst = 0.0;
  for (std::size_t s = 0; s < mech.num_inputs(); ++s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < mech.n(); ++i) {
      sum += KlProbabilities(mech.Row(s), mech.ShortRow(mech.DropPosition(s, i)));
    }
    worst = std::max(worst, sum / static_cast<double>(mech.n()));
  }
  return worst;
}

ChainReport VerifyStabilityChain(const DiscreteMechanism& mech,
                                 std::size_t trials, std::uint64_t seed) {
  ChainReport report;
  report.trials = trials;
  report.alkl = ExactAlkl(mech);
  std::mt19937_64 rng(seed);
  const double n = static_cast<double>(mech.n());
  for (std::size_t trial = 0; trial < trials; ++trial) {
    // Product prior: both links of the chain and the event check.
    const std::vector<double> marginal =
        RandomSimplex(mech.domain_size(), rng, 1.0);
    const DiscreteDistribution prior = ProductPrior(marginal, mech.n());
    const double mi_stab = ExactMiStability(prior, mech);
    const double mi = ExactMutualInformation(prior, mech);
    report.max_mi_stability = std::max(report.max_mi_stability, mi_stab);
    report.max_mutual_information = std::max(report.max_mutual_information, mi);
    if (mi_stab > report.alkl + kChainTolerance) {
      report.violations.push_back(
          Describe("MI stability exceeds ALKL", mi_stab, report.alkl));
    }
    if (mi > n * mi_stab + kChainTolerance) {
      report.violations.push_back(
          Describe("mutual information exceeds n * MI stability", mi,
                   n * mi_stab));
    }
    CheckEvents(prior, mech, mi, rng, report);

    // Arbitrary prior: ALKL bounds MI stability for every input law.
    const DiscreteDistribution joint(
        RandomSimplex(mech.num_inputs(), rng, 1.0));
    const double mi_stab_joint = ExactMiStability(joint, mech);
    report.max_mi_stability = std::max(report.max_mi_stability, mi_stab_joint);
    if (mi_stab_joint > report.alkl + kChainTolerance) {
      report.violations.push_back(Describe(
          "MI stability (non-product prior) exceeds ALKL", mi_stab_joint,
          report.alkl));
    }
  }
  return report;
}

SweepReport RunOracleSweep(std::size_t random_mechanisms,
                           std::size_t trials_per_mechanism,
                           std::uint64_t seed) {
  std::vector<DiscreteMechanism> mechanisms;
  for (std::size_t n : {2, 3}) {
    mechanisms.push_back(ConstantMechanism(2, n, {0.25, 0.75}));
    mechanisms.push_back(FirstElementMechanism(2, n));
    for (double flip : {0.1, 0.3, 0.5}) {
      mechanisms.push_back(RandomizedResponseMechanism(n, flip));
      mechanisms.push_back(NoisyMajorityMechanism(n, flip));
    }
  }
  std::mt19937_64 rng(seed);
  for (std::size_t r = 0; r < random_mechanisms; ++r) {
    const std::size_t n = 2 + r % 2;
    const std::size_t m = 2 + (r / 2) % 3;
    const double concentration = (r / 6) % 2 == 0 ? 1.0 : 4.0;
    mechanisms.push_back(
        RandomKernelMechanism(2, n, m, rng(), concentration));
  }
  SweepReport sweep;
  for (const DiscreteMechanism& mech : mechanisms) {
    const ChainReport chain =
        VerifyStabilityChain(mech, trials_per_mechanism, rng());
    ++sweep.mechanisms;
    sweep.priors += 2 * chain.trials;
    sweep.events_checked += chain.events_checked;
    for (const std::string& v : chain.violations) {
      sweep.violations.push_back(mech.name() + " (n = " +
                                 std::to_string(mech.n()) + "): " + v);
    }
  }
  return sweep;
}

}  // namespace adasq
