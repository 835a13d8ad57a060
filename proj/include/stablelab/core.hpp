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

// Domain model: hypotheses over a finite domain {0, ..., N-1}, hypothesis
// classes, labeled examples, samples (as multisets), and finite
// distributions over (point, label) pairs.

#ifndef STABLELAB_CORE_HPP_
#define STABLELAB_CORE_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stablelab/random.hpp"

namespace stablelab {

/// Zero-based index into the domain.
struct DomainPoint {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(DomainPoint, DomainPoint) = default;
};

/// Total boolean labeling of a finite domain; bit i is the label of point i.
class Hypothesis {
 public:
  Hypothesis() = default;
  explicit Hypothesis(std::size_t domain_size, bool fill = false);

  /// Parses a 0/1 string; character i is the label of point i.
  static Hypothesis from_string(std::string_view bits);

  std::size_t domain_size() const { return size_; }

  bool label(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1U;
  }
  bool operator()(DomainPoint x) const { return label(x.index); }

  void set(std::size_t i, bool value);

  /// Every label inverted.
  Hypothesis flipped() const;

  std::size_t count_ones() const;

  std::string to_string() const;

  std::size_t hash() const;

  friend bool operator==(const Hypothesis& a, const Hypothesis& b) {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }
  /// Lexicographic order on the bit string. This is the canonical order used
  /// for every tie-break in the library.
  friend std::strong_ordering operator<=>(const Hypothesis& a,
                                          const Hypothesis& b);

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Canonically ordered set of distinct hypotheses over one domain.
class HypothesisClass {
 public:
  HypothesisClass() = default;
  /// Sorts the members and drops duplicates. All members must share
  /// `domain_size`.
  HypothesisClass(std::size_t domain_size, std::vector<Hypothesis> members);

  std::size_t domain_size() const { return domain_size_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  std::span<const Hypothesis> members() const { return members_; }
  const Hypothesis& operator[](std::size_t i) const { return members_[i]; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  bool contains(const Hypothesis& h) const;

  friend bool operator==(const HypothesisClass&,
                         const HypothesisClass&) = default;

 private:
  std::size_t domain_size_ = 0;
  std::vector<Hypothesis> members_;
};

struct Example {
  DomainPoint point;
  bool label = false;

  friend constexpr auto operator<=>(const Example&, const Example&) = default;
};

/// Multiset of examples. Stored as (example, multiplicity) entries sorted by
/// point then label, so two samples holding the same examples in any draw
/// order compare equal. Large samples never materialize one entry per draw.
class Sample {
 public:
  struct Entry {
    Example example;
    std::uint64_t count = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  Sample() = default;
  explicit Sample(std::span<const Example> examples);
  Sample(std::initializer_list<Example> examples)
      : Sample(std::span<const Example>(examples.begin(), examples.size())) {}

  /// Merges duplicate examples and drops zero counts.
  static Sample from_entries(std::vector<Entry> entries);

  std::uint64_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::span<const Entry> entries() const { return entries_; }

  /// One Example per draw, in canonical order.
  std::vector<Example> expand() const;

  /// Multiset union.
  Sample merged(const Sample& other) const;

  friend bool operator==(const Sample&, const Sample&) = default;

 private:
  std::vector<Entry> entries_;
  std::uint64_t size_ = 0;
};

/// Probability table over (point, label) pairs.
class FiniteDistribution {
 public:
  struct Atom {
    Example example;
    double probability = 0.0;

    friend bool operator==(const Atom&, const Atom&) = default;
  };

  static constexpr double kTolerance = 1e-9;

  FiniteDistribution() = default;
  /// Validates: points inside the domain, distinct pairs, nonnegative
  /// probabilities summing to 1 within kTolerance. Atoms are stored sorted by
  /// (point, label).
  FiniteDistribution(std::size_t domain_size, std::vector<Atom> atoms);

  static FiniteDistribution point_mass(std::size_t domain_size,
                                       Example example);
  static FiniteDistribution uniform(std::size_t domain_size,
                                    std::span<const Example> support);

  std::size_t domain_size() const { return domain_size_; }
  std::span<const Atom> atoms() const { return atoms_; }

  /// Probability of an exact (point, label) pair; 0 when absent.
  double probability(const Example& e) const;

  friend bool operator==(const FiniteDistribution&,
                         const FiniteDistribution&) = default;

 private:
  std::size_t domain_size_ = 0;
  std::vector<Atom> atoms_;
};

/// Pr_{(x,y)~D}[h(x) != y].
double population_loss(const Hypothesis& h, const FiniteDistribution& dist);

/// Fraction of the sample mislabeled by h. Throws on an empty sample.
double empirical_loss(const Hypothesis& h, const Sample& sample);

/// Number of draws in the sample mislabeled by h.
std::uint64_t mistakes(const Hypothesis& h, const Sample& sample);

/// Minimum population loss over the class. Throws on an empty class.
double class_loss(const HypothesisClass& hclass,
                  const FiniteDistribution& dist);

/// n i.i.d. draws from dist. Small n uses inverse-CDF lookups per draw;
/// large n draws the multiplicities directly (conditional binomials).
Sample draw_sample(const FiniteDistribution& dist, std::uint64_t n,
                   RandomSeed seed);

/// gamma' D + (1 - gamma') * point mass at (x_star, b_star).
FiniteDistribution mix_with_point_mass(const FiniteDistribution& dist,
                                       DomainPoint x_star, bool b_star,
                                       double gamma_prime);

/// dist conditioned on y = h_star(x). Throws when that event has mass 0.
FiniteDistribution condition_on_consistency(const FiniteDistribution& dist,
                                            const Hypothesis& h_star);

/// The N+1 thresholds over [N]: h_t(i) = 1 iff i >= t (1-indexed, so
/// position i is domain point i-1), t = 1, ..., N+1.
HypothesisClass threshold_class(std::size_t n);

/// threshold_class(n) pulled back to an M-point domain through the
/// order-preserving block map x -> ceil(x * n / M) (both 1-indexed). Keeps
/// the n+1 members and their order structure on a larger domain.
HypothesisClass threshold_class_on(std::size_t n, std::size_t domain_size);

/// All 2^n labelings of [n].
HypothesisClass full_cube(std::size_t n);

/// Uniform over (x, 1[x >= m*]) for x in [M], m* = floor(M/2), 1-indexed.
FiniteDistribution median_threshold_distribution(std::size_t m);

// Text formats.
//
// Class file: first line N, then one 0/1 string per member.
// Distribution file: optional "domain N" line, then "point label probability"
// lines. Lines starting with '#' are ignored in both.
std::string format_class(const HypothesisClass& hclass);
HypothesisClass parse_class(std::string_view text);
std::string format_distribution(const FiniteDistribution& dist);
FiniteDistribution parse_distribution(std::string_view text);

HypothesisClass load_class(const std::string& path);
FiniteDistribution load_distribution(const std::string& path);

std::ostream& operator<<(std::ostream& os, const Hypothesis& h);

}  // namespace stablelab

template <>
struct std::hash<stablelab::Hypothesis> {
  std::size_t operator()(const stablelab::Hypothesis& h) const {
    return h.hash();
  }
};

#endif  // STABLELAB_CORE_HPP_
