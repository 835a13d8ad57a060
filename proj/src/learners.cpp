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

#include "stablelab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace stablelab {
namespace {

std::uint64_t ceil_to_count(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.8e19) {
    throw std::invalid_argument(std::string(what) + " is out of range");
  }
  return static_cast<std::uint64_t>(std::ceil(x));
}

// Counts of each distinct hypothesis, in canonical order.
using OutputCounts = std::map<Hypothesis, std::uint64_t>;

// Most frequent entry; the canonically first wins ties.
const std::pair<const Hypothesis, std::uint64_t>& most_frequent(
    const OutputCounts& counts) {
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return *best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Learner

Learner::Learner(std::string name, std::size_t domain_size, double epsilon,
                 ComplexityFn complexity, RunFn run)
    : name_(std::move(name)),
      domain_size_(domain_size),
      epsilon_(epsilon),
      complexity_(std::move(complexity)),
      run_(std::move(run)) {
  if (!complexity_ || !run_) {
    throw std::invalid_argument("learner needs a run and a complexity function");
  }
}

LearnerOutput Learner::run(const Sample& sample, RandomSeed seed) const {
  for (const auto& e : sample.entries()) {
    if (e.example.point.index >= domain_size_) {
      throw std::invalid_argument(name_ + ": sample point " +
                                  std::to_string(e.example.point.index) +
                                  " outside domain of size " +
                                  std::to_string(domain_size_));
    }
  }
  auto out = run_(sample, seed);
  if (out.hypothesis.domain_size() != domain_size_) {
    throw std::logic_error(name_ + ": output hypothesis has wrong domain size");
  }
  return out;
}

Learner Learner::with_sample_size(std::uint64_t n) const {
  Learner copy = *this;
  copy.complexity_ = [n](double) { return n; };
  return copy;
}

// ---------------------------------------------------------------------------
// StabilityParams

StabilityParams StabilityParams::make(std::function<double(double)> rho,
                                      double epsilon, double delta,
                                      std::uint64_t n0, std::size_t class_size,
                                      std::optional<std::uint64_t> t_override,
                                      std::optional<std::uint64_t> n1_override) {
  if (!rho) throw std::invalid_argument("stability params: rho is missing");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("stability params: epsilon must be in (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("stability params: delta must be in (0, 1)");
  }
  if (class_size == 0) {
    throw std::invalid_argument("stability params: empty class");
  }
  StabilityParams p;
  p.rho = std::move(rho);
  p.epsilon = epsilon;
  p.n0 = n0;
  const double r = p.rho_value();
  if (!(r > 0.0 && r <= 1.0)) {
    throw std::invalid_argument("stability params: rho(epsilon/4) must be in (0, 1]");
  }
  p.list_size = static_cast<std::uint64_t>(std::floor(1.0 / r));
  p.alpha = r - 1.0 / static_cast<double>(p.list_size + 1);
  p.t = t_override.value_or(ceil_to_count(
      32.0 / (p.alpha * p.alpha) * std::log(16.0 / delta), "t"));
  p.n1 = n1_override.value_or(ceil_to_count(
      32.0 / (epsilon * epsilon) *
          (std::log(static_cast<double>(class_size)) + std::log(8.0 / delta)),
      "n1"));
  p.validate();
  return p;
}

void StabilityParams::validate() const {
  if (!rho) throw std::invalid_argument("stability params: rho is missing");
  const double r = rho_value();
  if (!(r > 0.0 && r <= 1.0)) {
    throw std::invalid_argument("stability params: rho(epsilon/4) must be in (0, 1]");
  }
  if (list_size != static_cast<std::uint64_t>(std::floor(1.0 / r))) {
    throw std::invalid_argument("stability params: L must equal floor(1/rho)");
  }
  if (!(alpha > 0.0) ||
      std::abs(alpha - (r - 1.0 / static_cast<double>(list_size + 1))) > 1e-12) {
    throw std::invalid_argument(
        "stability params: alpha must equal rho - 1/(L+1) > 0");
  }
  if (t < 1) throw std::invalid_argument("stability params: t must be >= 1");
  if (n1 < 1) throw std::invalid_argument("stability params: n1 must be >= 1");
  if (n0 < 1) throw std::invalid_argument("stability params: n0 must be >= 1");
}

// ---------------------------------------------------------------------------
// Closed forms

std::uint64_t random_threshold_sample_complexity(std::size_t class_size,
                                                 double epsilon) {
  if (class_size == 0) throw std::invalid_argument("empty class");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must be in (0, 1)");
  }
  const double h = static_cast<double>(class_size);
  return ceil_to_count(512.0 * h * h / (epsilon * epsilon) * std::log(8.0 * h),
                       "sample complexity");
}

double agnostic_rho(int d, std::uint64_t n) {
  if (d < 0 || d > 60) throw std::invalid_argument("agnostic_rho: d out of range");
  const double exponent = std::ldexp(1.0, d) + 1.0 + 2.0 * static_cast<double>(n);
  return std::ldexp(1.0 / static_cast<double>(d + 1),
                    -static_cast<int>(std::min(exponent, 1e9)));
}

double agnostic_log2_rho(int d, std::uint64_t n) {
  if (d < 0 || d > 60) throw std::invalid_argument("agnostic_rho: d out of range");
  return -std::log2(static_cast<double>(d + 1)) - std::ldexp(1.0, d) - 1.0 -
         2.0 * static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Block utilities

std::vector<Sample> split_sample(const Sample& sample,
                                 std::span<const std::uint64_t> sizes,
                                 RandomSeed seed) {
  std::uint64_t total = 0;
  for (auto s : sizes) total += s;
  if (total != sample.size()) {
    throw std::invalid_argument("split_sample: block sizes add up to " +
                                std::to_string(total) + ", sample has " +
                                std::to_string(sample.size()));
  }
  Rng rng(seed);
  const auto entries = sample.entries();
  std::vector<std::uint64_t> left(entries.size());
  for (std::size_t j = 0; j < entries.size(); ++j) left[j] = entries[j].count;
  std::uint64_t remaining = total;

  std::vector<Sample> blocks;
  blocks.reserve(sizes.size());
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    std::vector<Sample::Entry> block;
    if (b + 1 == sizes.size()) {
      for (std::size_t j = 0; j < entries.size(); ++j) {
        block.push_back({entries[j].example, left[j]});
      }
    } else {
      std::uint64_t need = sizes[b];
      std::uint64_t pool = remaining;
      for (std::size_t j = 0; j < entries.size() && need > 0; ++j) {
        pool -= left[j];
        const std::uint64_t x = rng.hypergeometric(left[j], pool, need);
        if (x > 0) block.push_back({entries[j].example, x});
        left[j] -= x;
        need -= x;
      }
      remaining -= sizes[b];
    }
    blocks.push_back(Sample::from_entries(std::move(block)));
  }
  return blocks;
}

Replacement replace_examples(const Sample& sample, Example star,
                             double gamma_prime, RandomSeed seed) {
  if (!(gamma_prime > 0.0 && gamma_prime <= 1.0)) {
    throw std::invalid_argument("replace_examples: gamma' must be in (0, 1]");
  }
  Rng rng(seed);
  std::vector<Sample::Entry> kept;
  std::uint64_t replaced = 0;
  for (const auto& e : sample.entries()) {
    const std::uint64_t keep = rng.binomial(e.count, gamma_prime);
    kept.push_back({e.example, keep});
    replaced += e.count - keep;
  }
  kept.push_back({star, replaced});
  return {Sample::from_entries(std::move(kept)), replaced};
}

// ---------------------------------------------------------------------------
// Learning rules

Hypothesis erm(const HypothesisClass& hclass, const Sample& sample) {
  if (hclass.empty()) throw std::invalid_argument("erm: empty class");
  if (sample.empty()) throw std::invalid_argument("erm: empty sample");
  std::size_t best = 0;
  std::uint64_t best_mistakes = mistakes(hclass[0], sample);
  for (std::size_t i = 1; i < hclass.size(); ++i) {
    const std::uint64_t m = mistakes(hclass[i], sample);
    if (m < best_mistakes) {
      best = i;
      best_mistakes = m;
    }
  }
  return hclass[best];
}

Learner erm_learner(const HypothesisClass& hclass, std::uint64_t n) {
  if (hclass.empty()) throw std::invalid_argument("erm: empty class");
  return Learner(
      "erm", hclass.domain_size(), 0.0, [n](double) { return n; },
      [hclass](const Sample& s, RandomSeed) {
        return LearnerOutput{erm(hclass, s)};
      });
}

Learner constant_learner(const Hypothesis& h, std::uint64_t n) {
  return Learner(
      "constant", h.domain_size(), 0.0, [n](double) { return n; },
      [h](const Sample&, RandomSeed) { return LearnerOutput{h}; });
}

Learner random_threshold_stable(const HypothesisClass& hclass, double epsilon) {
  if (hclass.empty()) {
    throw std::invalid_argument("random_threshold_stable: empty class");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("random_threshold_stable: epsilon must be in (0, 1)");
  }
  const std::size_t size = hclass.size();
  const std::uint64_t grid = 2 * static_cast<std::uint64_t>(size);
  return Learner(
      "random_threshold", hclass.domain_size(), epsilon,
      [size](double eps) { return random_threshold_sample_complexity(size, eps); },
      [hclass, epsilon, grid](const Sample& s, RandomSeed seed) {
        if (s.empty()) {
          throw std::invalid_argument("random_threshold_stable: empty sample");
        }
        const double n = static_cast<double>(s.size());
        std::vector<double> losses;
        losses.reserve(hclass.size());
        for (const auto& h : hclass) {
          losses.push_back(static_cast<double>(mistakes(h, s)) / n);
        }
        const double best = *std::min_element(losses.begin(), losses.end());
        Rng rng(seed);
        const std::uint64_t j = 1 + rng.uniform_index(grid);
        const double tau = epsilon / 4.0 +
                           static_cast<double>(j) * epsilon /
                               (4.0 * static_cast<double>(grid));
        for (std::size_t i = 0; i < losses.size(); ++i) {
          if (losses[i] <= best + tau) return LearnerOutput{hclass[i]};
        }
        // Unreachable: the minimizer always qualifies.
        throw std::logic_error("random_threshold_stable: no member qualified");
      });
}

Learner majority_boost(const Learner& base, std::uint64_t k) {
  if (k < 1) throw std::invalid_argument("majority_boost: k must be >= 1");
  const std::uint64_t n0 = base.sample_complexity();
  return Learner(
      "boost(" + base.name() + ")", base.domain_size(), base.epsilon(),
      [base, k](double eps) { return k * base.sample_complexity(eps); },
      [base, k, n0](const Sample& s, RandomSeed seed) {
        if (s.size() != k * n0) {
          throw std::invalid_argument(
              "majority_boost: sample size " + std::to_string(s.size()) +
              " != k * n0 = " + std::to_string(k * n0));
        }
        const std::vector<std::uint64_t> sizes(k, n0);
        const auto blocks = split_sample(s, sizes, seed.derive("boost.split"));
        OutputCounts counts;
        for (std::uint64_t i = 0; i < k; ++i) {
          ++counts[base.run(blocks[i], seed.derive("boost.run", i)).hypothesis];
        }
        const auto& [h, c] = most_frequent(counts);
        return LearnerOutput{h, false,
                             static_cast<double>(c) / static_cast<double>(k)};
      });
}

Learner list_from_stable(const Learner& base, const StabilityParams& params,
                         const HypothesisClass& hclass, double delta) {
  params.validate();
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("list_from_stable: delta must be in (0, 1)");
  }
  if (hclass.empty()) throw std::invalid_argument("list_from_stable: empty class");
  if (hclass.domain_size() != base.domain_size()) {
    throw std::invalid_argument("list_from_stable: class and base domains differ");
  }
  const std::uint64_t total = params.t * params.n0 + params.n1;
  return Learner(
      "list(" + base.name() + ")", base.domain_size(), params.epsilon,
      [total](double) { return total; },
      [base, params, hclass, total](const Sample& s, RandomSeed seed) {
        if (s.size() != total) {
          throw std::invalid_argument(
              "list_from_stable: sample size " + std::to_string(s.size()) +
              " != t * n0 + n1 = " + std::to_string(total));
        }
        std::vector<std::uint64_t> sizes(params.t, params.n0);
        sizes.push_back(params.n1);
        const auto blocks = split_sample(s, sizes, seed.derive("list.split"));
        const Sample& holdout = blocks.back();

        OutputCounts counts;
        for (std::uint64_t i = 0; i < params.t; ++i) {
          ++counts[base.run(blocks[i], seed.derive("list.run", i)).hypothesis];
        }
        const double t = static_cast<double>(params.t);
        const double rho = params.rho_value();
        const double frequency_floor = rho - params.alpha / 2.0;

        double best_holdout = 1.0;
        for (const auto& h : hclass) {
          best_holdout = std::min(best_holdout, empirical_loss(h, holdout));
        }
        const double risk_ceiling = best_holdout + 3.0 * params.epsilon / 4.0;

        const Hypothesis* chosen = nullptr;
        std::uint64_t chosen_count = 0;
        for (const auto& [h, c] : counts) {
          const double p_hat = static_cast<double>(c) / t;
          if (p_hat < frequency_floor) continue;
          if (empirical_loss(h, holdout) > risk_ceiling) continue;
          if (chosen == nullptr || c > chosen_count) {
            chosen = &h;
            chosen_count = c;
          }
        }
        if (chosen != nullptr) {
          return LearnerOutput{*chosen, false,
                               static_cast<double>(chosen_count) / t};
        }
        Hypothesis fallback = erm(hclass, holdout);
        const auto it = counts.find(fallback);
        const double p_hat =
            it == counts.end() ? 0.0 : static_cast<double>(it->second) / t;
        return LearnerOutput{std::move(fallback), true, p_hat};
      });
}

Learner three_way_rule(const Learner& inner) {
  const std::size_t n = inner.domain_size();
  return Learner(
      "three_way(" + inner.name() + ")", n, inner.epsilon(),
      [inner](double eps) { return inner.sample_complexity(eps); },
      [inner, n](const Sample& s, RandomSeed seed) {
        Rng rng(seed.derive("three_way.branch"));
        switch (rng.uniform_index(3)) {
          case 0:
            return LearnerOutput{Hypothesis(n, true)};
          case 1:
            return LearnerOutput{Hypothesis(n, false)};
          default:
            return inner.run(s, seed.derive("three_way.inner"));
        }
      });
}

Learner class_error_wrapper(const Learner& inner, DomainPoint x_star,
                            bool b_star, double gamma_prime) {
  if (!(gamma_prime > 0.0 && gamma_prime <= 1.0)) {
    throw std::invalid_argument("class_error_wrapper: gamma' must be in (0, 1]");
  }
  if (x_star.index >= inner.domain_size()) {
    throw std::invalid_argument("class_error_wrapper: x* outside the domain");
  }
  if (gamma_prime == 1.0) return inner;
  const Example star{x_star, b_star};
  return Learner(
      "class_error(" + inner.name() + ")", inner.domain_size(), inner.epsilon(),
      [inner](double eps) { return inner.sample_complexity(eps); },
      [inner, star, gamma_prime](const Sample& s, RandomSeed seed) {
        const auto modified =
            replace_examples(s, star, gamma_prime, seed.derive("wrapper.replace"));
        return inner.run(modified.sample, seed.derive("wrapper.inner"));
      });
}

AgnosticStableLearner agnostic_from_realizable(const Learner& inner, int d,
                                               double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("agnostic_from_realizable: epsilon must be in (0, 1)");
  }
  const std::uint64_t n = inner.sample_complexity(epsilon / 2.0);
  return {inner.with_sample_size(n), n, agnostic_rho(d, n),
          agnostic_log2_rho(d, n)};
}

}  // namespace stablelab
