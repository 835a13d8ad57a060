// Copyright 2026 The stablelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Randomized learning rules and the reductions between them.
//
// A Learner maps (Sample, RandomSeed) to a hypothesis. Because samples are
// canonical multisets, every learner here is invariant under reordering of
// its input draws. Learners that consume their sample in blocks (the
// majority booster and the list learner) split it by a seeded uniformly
// random partition, which gives independent i.i.d. blocks whenever the input
// was i.i.d.

#ifndef STABLELAB_LEARNERS_HPP_
#define STABLELAB_LEARNERS_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stablelab/core.hpp"

namespace stablelab {

struct LearnerOutput {
  Hypothesis hypothesis;
  bool failed = false;
  /// Empirical frequency of the returned hypothesis among the inner runs;
  /// NaN for learners that do not aggregate inner runs.
  double p_hat = std::numeric_limits<double>::quiet_NaN();
};

using ListLearnerOutput = LearnerOutput;

class Learner {
 public:
  using RunFn = std::function<LearnerOutput(const Sample&, RandomSeed)>;
  /// Accuracy parameter -> sample size.
  using ComplexityFn = std::function<std::uint64_t(double)>;

  Learner(std::string name, std::size_t domain_size, double epsilon,
          ComplexityFn complexity, RunFn run);

  const std::string& name() const { return name_; }
  std::size_t domain_size() const { return domain_size_; }
  /// Accuracy the learner was configured for.
  double epsilon() const { return epsilon_; }

  /// Sample size at the configured accuracy.
  std::uint64_t sample_complexity() const { return complexity_(epsilon_); }
  std::uint64_t sample_complexity(double epsilon) const {
    return complexity_(epsilon);
  }

  LearnerOutput run(const Sample& sample, RandomSeed seed) const;
  Hypothesis operator()(const Sample& sample, RandomSeed seed) const {
    return run(sample, seed).hypothesis;
  }

  /// Same rule, declared sample size pinned to n for every accuracy.
  Learner with_sample_size(std::uint64_t n) const;

 private:
  std::string name_;
  std::size_t domain_size_ = 0;
  double epsilon_ = 0.0;
  ComplexityFn complexity_;
  RunFn run_;
};

/// Parameters of the stability-to-list conversion at accuracy epsilon.
struct StabilityParams {
  std::function<double(double)> rho;
  double epsilon = 0.0;
  std::uint64_t n0 = 0;  // base sample size at epsilon / 4
  std::uint64_t n1 = 0;  // held-out sample for the risk filter
  std::uint64_t t = 0;   // number of base runs
  std::uint64_t list_size = 0;  // floor(1 / rho(epsilon / 4))
  double alpha = 0.0;           // rho(epsilon / 4) - 1 / (list_size + 1)

  double rho_value() const { return rho(epsilon / 4.0); }

  /// Derives list_size and alpha from rho, then
  ///   t  = ceil(32 / alpha^2 * ln(16 / delta)),
  ///   n1 = ceil(32 / epsilon^2 * (ln|H| + ln(8 / delta))),
  /// unless overridden.
  static StabilityParams make(std::function<double(double)> rho,
                              double epsilon, double delta, std::uint64_t n0,
                              std::size_t class_size,
                              std::optional<std::uint64_t> t_override = {},
                              std::optional<std::uint64_t> n1_override = {});

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

struct AgnosticStableLearner {
  Learner learner;
  std::uint64_t n = 0;
  double rho = 0.0;
  double log2_rho = 0.0;
};

/// ceil(512 |H|^2 / eps^2 * ln(8 |H|)).
std::uint64_t random_threshold_sample_complexity(std::size_t class_size,
                                                 double epsilon);

/// 1 / ((d+1) 2^(2^d + 1) 4^n).
double agnostic_rho(int d, std::uint64_t n);
/// log2 of agnostic_rho, finite even when the value underflows.
double agnostic_log2_rho(int d, std::uint64_t n);

/// Member of minimal empirical loss; ties go to the canonically first.
Hypothesis erm(const HypothesisClass& hclass, const Sample& sample);

/// Empirical risk minimizer over the class as a learner with a fixed
/// declared sample size.
Learner erm_learner(const HypothesisClass& hclass, std::uint64_t n);

/// Ignores its sample.
Learner constant_learner(const Hypothesis& h, std::uint64_t n = 1);

/// Randomized-threshold rule for a finite class: let m be the minimal
/// empirical loss, draw j uniformly from {1, ..., K} with K = 2|H|, set
/// tau = eps/4 + j eps / (4K), and output the canonically first member whose
/// empirical loss is at most m + tau.
Learner random_threshold_stable(const HypothesisClass& hclass, double epsilon);

/// Runs base on k disjoint blocks of base.sample_complexity() examples and
/// outputs the most frequent result (canonical tie-break).
Learner majority_boost(const Learner& base, std::uint64_t k);

/// Converts a globally stable learner into a list-replicable one: t base runs
/// estimate output frequencies, a held-out block filters by empirical risk,
/// and the qualifying output with the highest frequency is returned. When
/// nothing qualifies the result is erm(H, Q) flagged as failed.
Learner list_from_stable(const Learner& base, const StabilityParams& params,
                         const HypothesisClass& hclass, double delta);

/// With probability 1/3 each: all-ones, all-zeros, or A(S).
Learner three_way_rule(const Learner& inner);

/// Replaces each example by (x_star, b_star) with probability 1 - gamma',
/// then runs the inner learner.
Learner class_error_wrapper(const Learner& inner, DomainPoint x_star,
                            bool b_star, double gamma_prime);

/// Inner learner configured at n = inner.sample_complexity(epsilon / 2),
/// together with the guaranteed stability parameter for Littlestone bound d.
AgnosticStableLearner agnostic_from_realizable(const Learner& inner, int d,
                                               double epsilon);

/// Uniformly random partition of the sample into blocks of the given sizes,
/// which must add up to sample.size().
std::vector<Sample> split_sample(const Sample& sample,
                                 std::span<const std::uint64_t> sizes,
                                 RandomSeed seed);

struct Replacement {
  Sample sample;
  std::uint64_t replaced = 0;
};

/// The example-replacement step of class_error_wrapper.
Replacement replace_examples(const Sample& sample, Example star,
                             double gamma_prime, RandomSeed seed);

}  // namespace stablelab

#endif  // STABLELAB_LEARNERS_HPP_
