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

#ifndef STABLELAB_RANDOM_HPP_
#define STABLELAB_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace stablelab {

/// Master seed of an experiment. Every random choice in the library is
/// reached through `derive`, which is a stateless hash of (seed, label,
/// index), so trial i of a loop sees the same stream regardless of how many
/// trials run or in which order they execute.
class RandomSeed {
 public:
  constexpr RandomSeed() = default;
  constexpr explicit RandomSeed(std::uint64_t master) : master_(master) {}

  constexpr std::uint64_t value() const { return master_; }

  RandomSeed derive(std::string_view label, std::uint64_t index = 0) const;

  friend constexpr bool operator==(RandomSeed, RandomSeed) = default;

 private:
  std::uint64_t master_ = 0;
};

/// Seeded stream. The engine is std::mt19937_64, whose output sequence is
/// fixed by the standard; the variates below are written out here (binomial
/// excepted) so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(RandomSeed seed) : engine_(seed.value()) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Number of successes in n Bernoulli(p) trials.
  std::uint64_t binomial(std::uint64_t n, double p);

  /// Number of marked items when `draws` items are taken without
  /// replacement from `marked + unmarked` items.
  std::uint64_t hypergeometric(std::uint64_t marked, std::uint64_t unmarked,
                               std::uint64_t draws);

 private:
  std::mt19937_64 engine_;
};

/// log(k!) with a table for small k and a Stirling series beyond it.
double log_factorial(std::uint64_t k);

}  // namespace stablelab

#endif  // STABLELAB_RANDOM_HPP_
