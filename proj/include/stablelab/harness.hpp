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

// Monte Carlo estimates of a learner's output distribution and the
// stability / list-replicability statistics read off it.
//
// Trial i always draws its sample from seed.derive("sample", i) and runs the
// learner with seed.derive("learner", i), so a run with more trials extends
// a run with fewer, and results do not depend on scheduling.

#ifndef STABLELAB_HARNESS_HPP_
#define STABLELAB_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stablelab/core.hpp"
#include "stablelab/learners.hpp"

namespace stablelab {

/// Calls fn(i) for i in [0, count) on up to `threads` workers (0 means
/// hardware concurrency). fn must only write to slot i of its output.
void parallel_for(std::uint64_t count, const std::function<void(std::uint64_t)>& fn,
                  unsigned threads = 0);

class OutputFrequencyTable {
 public:
  OutputFrequencyTable() = default;
  /// Builds the table from per-trial outputs, in trial order.
  explicit OutputFrequencyTable(std::span<const LearnerOutput> outputs);

  std::uint64_t trials() const { return failed_.size(); }
  /// Output counts over all trials, keyed by hypothesis in canonical order.
  const std::map<Hypothesis, std::uint64_t>& counts() const { return counts_; }
  const std::vector<bool>& failed() const { return failed_; }
  std::uint64_t failures() const;

  double frequency(const Hypothesis& h) const;
  double max_frequency() const;

  /// Table over the non-failed trials only.
  OutputFrequencyTable without_failures() const;

 private:
  std::map<Hypothesis, std::uint64_t> counts_;
  std::vector<bool> failed_;
  std::vector<Hypothesis> outputs_;
};

struct StabilityReport {
  double epsilon = 0.0;
  Hypothesis best_hypothesis;
  double best_frequency = 0.0;
  double best_loss = 0.0;
  double class_loss = 0.0;
  bool found = false;
};

struct ListReport {
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<Hypothesis> list;
  std::vector<double> frequencies;  // of each list member
  double covered_mass = 0.0;
  bool success = false;
};

struct GapDistribution {
  std::vector<double> gaps;  // sup-gap per trial, in trial order

  /// Empirical quantile (nearest rank, q in [0, 1]).
  double quantile(double q) const;
};

struct JumpProbeReport {
  std::uint64_t n = 0;
  std::uint64_t t0 = 0;
  std::uint64_t domain = 0;
  std::uint64_t trials = 0;
  std::vector<double> p;  // p[k - 1] estimates the order-k label-1 rate
  std::vector<std::uint64_t> observations;  // probes realized per order
  double max_adjacent_gap = 0.0;
  std::uint64_t gap_location = 0;  // c with |p_{c+1} - p_c| maximal, 1-based
  bool undersized_domain = false;  // M < 4n
};

/// `trials` independent runs of the learner on fresh samples of size n.
OutputFrequencyTable output_distribution(const Learner& learner,
                                         const FiniteDistribution& dist,
                                         std::uint64_t n, std::uint64_t trials,
                                         RandomSeed seed);

/// Most frequent output among those with loss <= class_loss + epsilon.
StabilityReport empirical_stability(const OutputFrequencyTable& table,
                                    const FiniteDistribution& dist,
                                    const HypothesisClass& hclass,
                                    double epsilon);

/// Greedy list of low-excess-loss outputs by decreasing frequency until the
/// covered mass reaches 1 - delta.
ListReport empirical_list(const OutputFrequencyTable& table,
                          const FiniteDistribution& dist,
                          const HypothesisClass& hclass, double epsilon,
                          double delta);

/// Per trial: max over the class of |empirical - population| loss on a
/// fresh sample of size n.
GapDistribution uniform_convergence_gap(const HypothesisClass& hclass,
                                        const FiniteDistribution& dist,
                                        std::uint64_t n, std::uint64_t trials,
                                        RandomSeed seed);

/// 1 + |{r in R : r <= x}|.
std::uint64_t ord_statistic(std::span<const DomainPoint> r, DomainPoint x);

/// Order-statistic probe on threshold-labeled samples of n distinct points
/// from an M-point domain, split at t0 = n/2.
JumpProbeReport jump_probe(const Learner& learner, std::uint64_t domain,
                           std::uint64_t n, std::uint64_t trials,
                           RandomSeed seed);

/// 1/2 sum |p - q| between two tables' normalized output distributions.
double total_variation(const OutputFrequencyTable& a,
                       const OutputFrequencyTable& b);

/// Mass of outputs whose excess loss exceeds epsilon.
double out_of_list_frequency(const OutputFrequencyTable& table,
                             const FiniteDistribution& dist,
                             const HypothesisClass& hclass, double epsilon);

}  // namespace stablelab

#endif  // STABLELAB_HARNESS_HPP_
