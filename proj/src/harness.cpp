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

#include "stablelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace stablelab {
namespace {

// Slack for comparing sums of probabilities against loss thresholds.
constexpr double kLossSlack = 1e-12;

}  // namespace

void parallel_for(std::uint64_t count,
                  const std::function<void(std::uint64_t)>& fn,
                  unsigned threads) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  if (threads <= 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const auto workers = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, count));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// OutputFrequencyTable

OutputFrequencyTable::OutputFrequencyTable(
    std::span<const LearnerOutput> outputs) {
  failed_.reserve(outputs.size());
  outputs_.reserve(outputs.size());
  for (const auto& o : outputs) {
    ++counts_[o.hypothesis];
    failed_.push_back(o.failed);
    outputs_.push_back(o.hypothesis);
  }
}

std::uint64_t OutputFrequencyTable::failures() const {
  return static_cast<std::uint64_t>(
      std::count(failed_.begin(), failed_.end(), true));
}

double OutputFrequencyTable::frequency(const Hypothesis& h) const {
  if (trials() == 0) return 0.0;
  const auto it = counts_.find(h);
  return it == counts_.end() ? 0.0
                             : static_cast<double>(it->second) /
                                   static_cast<double>(trials());
}

double OutputFrequencyTable::max_frequency() const {
  std::uint64_t best = 0;
  for (const auto& [h, c] : counts_) best = std::max(best, c);
  return trials() == 0 ? 0.0
                       : static_cast<double>(best) / static_cast<double>(trials());
}

OutputFrequencyTable OutputFrequencyTable::without_failures() const {
  std::vector<LearnerOutput> kept;
  for (std::size_t i = 0; i < outputs_.size(); ++i) {
    if (!failed_[i]) kept.push_back({outputs_[i]});
  }
  return OutputFrequencyTable(kept);
}

// ---------------------------------------------------------------------------
// Estimators

OutputFrequencyTable output_distribution(const Learner& learner,
                                         const FiniteDistribution& dist,
                                         std::uint64_t n, std::uint64_t trials,
                                         RandomSeed seed) {
  if (trials < 1) throw std::invalid_argument("output_distribution: trials must be >= 1");
  if (learner.domain_size() != dist.domain_size()) {
    throw std::invalid_argument("output_distribution: learner and distribution domains differ");
  }
  std::vector<LearnerOutput> outputs(trials);
  parallel_for(trials, [&](std::uint64_t i) {
    const Sample s = draw_sample(dist, n, seed.derive("sample", i));
    outputs[i] = learner.run(s, seed.derive("learner", i));
  });
  return OutputFrequencyTable(outputs);
}

StabilityReport empirical_stability(const OutputFrequencyTable& table,
                                    const FiniteDistribution& dist,
                                    const HypothesisClass& hclass,
                                    double epsilon) {
  StabilityReport r;
  r.epsilon = epsilon;
  r.class_loss = class_loss(hclass, dist);
  if (table.trials() == 0) return r;
  std::uint64_t best = 0;
  for (const auto& [h, c] : table.counts()) {
    const double loss = population_loss(h, dist);
    if (loss > r.class_loss + epsilon + kLossSlack) continue;
    if (!r.found || c > best) {
      r.found = true;
      best = c;
      r.best_hypothesis = h;
      r.best_loss = loss;
    }
  }
  r.best_frequency =
      static_cast<double>(best) / static_cast<double>(table.trials());
  return r;
}

ListReport empirical_list(const OutputFrequencyTable& table,
                          const FiniteDistribution& dist,
                          const HypothesisClass& hclass, double epsilon,
                          double delta) {
  ListReport r;
  r.epsilon = epsilon;
  r.delta = delta;
  const double target = 1.0 - delta;
  if (target <= kLossSlack) {
    r.success = true;
    return r;
  }
  if (table.trials() == 0) return r;
  const double floor_loss = class_loss(hclass, dist);
  std::vector<std::pair<const Hypothesis*, std::uint64_t>> candidates;
  for (const auto& [h, c] : table.counts()) {
    if (population_loss(h, dist) <= floor_loss + epsilon + kLossSlack) {
      candidates.emplace_back(&h, c);
    }
  }
  // Stable sort keeps canonical order among equal counts.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const double trials = static_cast<double>(table.trials());
  std::uint64_t covered = 0;
  for (const auto& [h, c] : candidates) {
    if (static_cast<double>(covered) / trials >= target - kLossSlack) break;
    r.list.push_back(*h);
    r.frequencies.push_back(static_cast<double>(c) / trials);
    covered += c;
  }
  r.covered_mass = static_cast<double>(covered) / trials;
  r.success = r.covered_mass >= target - kLossSlack;
  return r;
}

double GapDistribution::quantile(double q) const {
  if (gaps.empty()) throw std::invalid_argument("quantile of an empty distribution");
  std::vector<double> sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  const double rank = std::ceil(std::clamp(q, 0.0, 1.0) *
                                static_cast<double>(sorted.size()));
  const auto idx = static_cast<std::size_t>(std::max(rank, 1.0)) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

GapDistribution uniform_convergence_gap(const HypothesisClass& hclass,
                                        const FiniteDistribution& dist,
                                        std::uint64_t n, std::uint64_t trials,
                                        RandomSeed seed) {
  if (trials < 1) throw std::invalid_argument("uniform_convergence_gap: trials must be >= 1");
  if (hclass.empty()) throw std::invalid_argument("uniform_convergence_gap: empty class");
  std::vector<double> population;
  for (const auto& h : hclass) population.push_back(population_loss(h, dist));
  GapDistribution out;
  out.gaps.assign(trials, 0.0);
  parallel_for(trials, [&](std::uint64_t i) {
    const Sample s = draw_sample(dist, n, seed.derive("sample", i));
    double gap = 0.0;
    for (std::size_t j = 0; j < hclass.size(); ++j) {
      gap = std::max(gap, std::abs(empirical_loss(hclass[j], s) - population[j]));
    }
    out.gaps[i] = gap;
  });
  return out;
}

std::uint64_t ord_statistic(std::span<const DomainPoint> r, DomainPoint x) {
  if (r.empty()) throw std::invalid_argument("ord_statistic: empty reference set");
  std::vector<DomainPoint> sorted(r.begin(), r.end());
  std::sort(sorted.begin(), sorted.end());
  return 1 + static_cast<std::uint64_t>(
                 std::upper_bound(sorted.begin(), sorted.end(), x) -
                 sorted.begin());
}

JumpProbeReport jump_probe(const Learner& learner, std::uint64_t domain,
                           std::uint64_t n, std::uint64_t trials,
                           RandomSeed seed) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("jump_probe: n must be even and >= 2");
  if (trials < 1) throw std::invalid_argument("jump_probe: trials must be >= 1");
  if (domain < n) throw std::invalid_argument("jump_probe: domain smaller than n");
  if (learner.domain_size() != domain) {
    throw std::invalid_argument("jump_probe: learner domain differs from M");
  }
  JumpProbeReport r;
  r.n = n;
  r.t0 = n / 2;
  r.domain = domain;
  r.trials = trials;
  r.undersized_domain = domain < 4 * n;

  // labels[i * (n+1) + k]: -1 when order k had no free point in trial i.
  std::vector<int> labels(trials * (n + 1), -1);
  parallel_for(trials, [&](std::uint64_t i) {
    Rng rng(seed.derive("probe.points", i));
    // Floyd's sampling of n distinct points.
    std::unordered_set<std::uint64_t> chosen;
    for (std::uint64_t j = domain - n; j < domain; ++j) {
      const std::uint64_t v = rng.uniform_index(j + 1);
      if (!chosen.insert(v).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> points(chosen.begin(), chosen.end());
    std::sort(points.begin(), points.end());

    std::vector<Example> examples;
    for (std::uint64_t j = 0; j < n; ++j) {
      examples.push_back({DomainPoint{static_cast<std::uint32_t>(points[j])},
                          j + 1 >= r.t0});
    }
    const Hypothesis h = learner(Sample(examples), seed.derive("learner", i));

    for (std::uint64_t k = 1; k <= n + 1; ++k) {
      // Free points of order k lie strictly between x_{k-1} and x_k.
      const std::uint64_t lo = k == 1 ? 0 : points[k - 2] + 1;
      const std::uint64_t hi = k == n + 1 ? domain : points[k - 1];
      if (hi <= lo) continue;
      const std::uint64_t x = lo + rng.uniform_index(hi - lo);
      labels[i * (n + 1) + (k - 1)] =
          h.label(static_cast<std::size_t>(x)) ? 1 : 0;
    }
  });

  std::vector<std::uint64_t> ones(n + 1, 0);
  r.observations.assign(n + 1, 0);
  for (std::uint64_t i = 0; i < trials; ++i) {
    for (std::uint64_t k = 0; k <= n; ++k) {
      const int v = labels[i * (n + 1) + k];
      if (v < 0) continue;
      ++r.observations[k];
      ones[k] += static_cast<std::uint64_t>(v);
    }
  }
  r.p.assign(n + 1, 0.0);
  for (std::uint64_t k = 0; k <= n; ++k) {
    if (r.observations[k] > 0) {
      r.p[k] = static_cast<double>(ones[k]) /
               static_cast<double>(r.observations[k]);
    }
  }
  for (std::uint64_t c = 0; c < n; ++c) {
    if (r.observations[c] == 0 || r.observations[c + 1] == 0) continue;
    const double gap = std::abs(r.p[c + 1] - r.p[c]);
    if (gap > r.max_adjacent_gap) {
      r.max_adjacent_gap = gap;
      r.gap_location = c + 1;
    }
  }
  return r;
}

double total_variation(const OutputFrequencyTable& a,
                       const OutputFrequencyTable& b) {
  double sum = 0.0;
  for (const auto& [h, c] : a.counts()) sum += std::abs(a.frequency(h) - b.frequency(h));
  for (const auto& [h, c] : b.counts()) {
    if (a.counts().count(h) == 0) sum += b.frequency(h);
  }
  return sum / 2.0;
}

double out_of_list_frequency(const OutputFrequencyTable& table,
                             const FiniteDistribution& dist,
                             const HypothesisClass& hclass, double epsilon) {
  if (table.trials() == 0) return 0.0;
  const double floor_loss = class_loss(hclass, dist);
  std::uint64_t bad = 0;
  for (const auto& [h, c] : table.counts()) {
    if (population_loss(h, dist) > floor_loss + epsilon + kLossSlack) bad += c;
  }
  return static_cast<double>(bad) / static_cast<double>(table.trials());
}

}  // namespace stablelab
