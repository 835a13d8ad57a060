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

#include "stablelab/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace stablelab {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::size_t kLogFactorialTable = 126;

const std::array<double, kLogFactorialTable>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTable> t{};
    double acc = 0.0;
    for (std::size_t k = 1; k < kLogFactorialTable; ++k) {
      acc += std::log(static_cast<double>(k));
      t[k] = acc;
    }
    return t;
  }();
  return table;
}

// Small-sample path: draw one item at a time.
std::uint64_t hypergeometric_direct(Rng& rng, std::uint64_t marked,
                                    std::uint64_t unmarked,
                                    std::uint64_t draws) {
  const std::uint64_t total = marked + unmarked;
  const bool complement = draws > total / 2;
  std::uint64_t remaining_draws = complement ? total - draws : draws;
  std::uint64_t remaining_total = total;
  std::uint64_t remaining_marked = marked;
  while (remaining_draws > 0 && remaining_marked > 0 &&
         remaining_total > remaining_marked) {
    if (rng.uniform_index(remaining_total) < remaining_marked) {
      --remaining_marked;
    }
    --remaining_total;
    --remaining_draws;
  }
  if (remaining_total == remaining_marked) remaining_marked -= remaining_draws;
  const std::uint64_t taken = marked - remaining_marked;
  return complement ? marked - taken : taken;
}

// Ratio-of-uniforms sampler (Stadlober's HRUA) for large draw counts.
std::uint64_t hypergeometric_hrua(Rng& rng, std::uint64_t marked,
                                  std::uint64_t unmarked,
                                  std::uint64_t draws) {
  constexpr double kD1 = 1.7155277699214135;  // 2 sqrt(2/e)
  constexpr double kD2 = 0.8989161620588988;  // 3 - 2 sqrt(3/e)

  const std::uint64_t total = marked + unmarked;
  const std::uint64_t sample = std::min(draws, total - draws);
  const std::uint64_t small = std::min(marked, unmarked);
  const std::uint64_t large = std::max(marked, unmarked);
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(small) / n;
  const double q = static_cast<double>(large) / n;
  const double s = static_cast<double>(sample);

  const double mu = s * p;
  const double a = mu + 0.5;
  const double var = (n - s) * s * p * q / (n - 1.0);
  const double c = std::sqrt(var + 0.5);
  const double h = kD1 * c + kD2;
  const auto mode = static_cast<std::uint64_t>(
      std::floor((s + 1.0) * (static_cast<double>(small) + 1.0) / (n + 2.0)));
  const double g = log_factorial(mode) + log_factorial(small - mode) +
                   log_factorial(sample - mode) +
                   log_factorial(large - sample + mode);
  const double bound =
      std::min(static_cast<double>(std::min(sample, small) + 1),
               std::floor(a + 16.0 * c));

  std::uint64_t k = 0;
  while (true) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    if (u == 0.0) continue;
    const double x = a + h * (v - 0.5) / u;
    if (x < 0.0 || x >= bound) continue;
    k = static_cast<std::uint64_t>(std::floor(x));
    const double gk = log_factorial(k) + log_factorial(small - k) +
                      log_factorial(sample - k) +
                      log_factorial(large - sample + k);
    const double t = g - gk;
    if (u * (4.0 - u) - 3.0 <= t) break;
    if (u * (u - t) >= 1.0) continue;
    if (2.0 * std::log(u) <= t) break;
  }

  if (marked > unmarked) k = sample - k;
  if (sample < draws) k = marked - k;
  return k;
}

}  // namespace

RandomSeed RandomSeed::derive(std::string_view label,
                              std::uint64_t index) const {
  std::uint64_t h = splitmix64(master_ ^ fnv1a(label));
  h = splitmix64(h + index * 0xd1b54a32d192ed03ULL);
  return RandomSeed(h);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % n;
  }
}

std::uint64_t Rng::binomial(std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(static_cast<std::int64_t>(n),
                                                p);
  return static_cast<std::uint64_t>(dist(engine_));
}

std::uint64_t Rng::hypergeometric(std::uint64_t marked, std::uint64_t unmarked,
                                  std::uint64_t draws) {
  const std::uint64_t total = marked + unmarked;
  if (draws > total) {
    throw std::invalid_argument("hypergeometric: more draws than items");
  }
  if (draws == 0 || marked == 0) return 0;
  if (unmarked == 0) return draws;
  if (draws == total) return marked;
  if (draws >= 10 && draws <= total - 10) {
    return hypergeometric_hrua(*this, marked, unmarked, draws);
  }
  return hypergeometric_direct(*this, marked, unmarked, draws);
}

double log_factorial(std::uint64_t k) {
  if (k < kLogFactorialTable) return log_factorial_table()[k];
  constexpr double kHalfLog2Pi = 0.91893853320467267;
  const double x = static_cast<double>(k);
  return (x + 0.5) * std::log(x) - x +
         (kHalfLog2Pi + (1.0 / x) * (1.0 / 12.0 - 1.0 / (360.0 * x * x)));
}

}  // namespace stablelab
