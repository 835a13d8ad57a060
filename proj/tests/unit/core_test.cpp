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

#include "stablelab/core.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"

namespace stablelab {
namespace {

Hypothesis H(std::string_view bits) { return Hypothesis::from_string(bits); }
Example E(std::uint32_t x, bool y) { return {DomainPoint{x}, y}; }

FiniteDistribution uniform_over(std::size_t n, std::vector<Example> support) {
  return FiniteDistribution::uniform(n, support);
}

TEST(Hypothesis, StringRoundTrip) {
  for (const char* s : {"0", "1", "0110", "1010101010101010101010101010101010101010101010101010101010101010111"}) {
    EXPECT_EQ(H(s).to_string(), s);
  }
  EXPECT_THROW(H("01x"), std::invalid_argument);
  EXPECT_EQ(H("").domain_size(), 0u);
}

TEST(Hypothesis, CanonicalOrderIsLexicographic) {
  EXPECT_LT(H("000"), H("001"));
  EXPECT_LT(H("001"), H("010"));
  EXPECT_LT(H("011"), H("100"));
  std::vector<Hypothesis> v = {H("110"), H("001"), H("101"), H("000")};
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v.front(), H("000"));
  EXPECT_EQ(v.back(), H("110"));
}

TEST(Hypothesis, FlipAndCount) {
  EXPECT_EQ(H("0110").flipped(), H("1001"));
  EXPECT_EQ(H("0111").count_ones(), 3u);
  Hypothesis h(70);
  h.set(69, true);
  EXPECT_TRUE(h.label(69));
  EXPECT_EQ(h.count_ones(), 1u);
}

TEST(HypothesisClass, SortsAndDeduplicates) {
  const HypothesisClass c(2, {H("11"), H("00"), H("11"), H("01")});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], H("00"));
  EXPECT_EQ(c[2], H("11"));
  EXPECT_TRUE(c.contains(H("01")));
  EXPECT_FALSE(c.contains(H("10")));
  EXPECT_THROW(HypothesisClass(3, {H("11")}), std::invalid_argument);
}

TEST(Sample, CanonicalUnderReordering) {
  std::vector<Example> draws = {E(2, true), E(0, false), E(2, true), E(1, true), E(0, true)};
  const Sample base(draws);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(draws.begin(), draws.end(), rng);
    EXPECT_EQ(Sample(draws), base);
  }
  EXPECT_EQ(base.size(), 5u);
  const auto expanded = base.expand();
  EXPECT_TRUE(std::is_sorted(expanded.begin(), expanded.end()));
  EXPECT_EQ(Sample(expanded), base);
}

TEST(Sample, MergeAndEntries) {
  const Sample a{E(0, true), E(1, false)};
  const Sample b{E(0, true)};
  const Sample m = a.merged(b);
  EXPECT_EQ(m.size(), 3u);
  ASSERT_EQ(m.entries().size(), 2u);
  EXPECT_EQ(m.entries()[0].count, 2u);
  EXPECT_EQ(Sample::from_entries({{E(1, false), 1}, {E(0, true), 2}, {E(3, true), 0}}), m);
}

TEST(Distribution, Validation) {
  EXPECT_THROW(FiniteDistribution(2, {{E(0, true), 0.5}, {E(1, true), 0.4}}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution(2, {{E(0, true), 1.2}, {E(1, true), -0.2}}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution(2, {{E(0, true), 0.5}, {E(0, true), 0.5}}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution(2, {{E(2, true), 1.0}}), std::invalid_argument);
  EXPECT_NO_THROW(FiniteDistribution(2, {{E(0, true), 0.5}, {E(1, true), 0.5 + 5e-10}}));
}

TEST(PopulationLoss, WorkedExamples) {
  const auto d = uniform_over(3, {E(0, true), E(1, false), E(2, true)});
  EXPECT_NEAR(population_loss(H("000"), d), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(population_loss(H("101"), FiniteDistribution::point_mass(3, E(2, true))), 0.0);
  EXPECT_EQ(population_loss(H("0111"), median_threshold_distribution(4)), 0.0);
  EXPECT_THROW(population_loss(H("00"), d), std::invalid_argument);
}

TEST(PopulationLoss, BoundedAndFlipComplement) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<FiniteDistribution::Atom> atoms;
    double total = 0.0;
    for (std::uint32_t x = 0; x < n; ++x) {
      for (bool y : {false, true}) {
        const double w = static_cast<double>(rng() % 5);
        if (w > 0) atoms.push_back({E(x, y), w});
        total += w;
      }
    }
    if (atoms.empty()) continue;
    for (auto& a : atoms) a.probability /= total;
    const FiniteDistribution d(n, atoms);
    Hypothesis h(n);
    for (std::size_t x = 0; x < n; ++x) h.set(x, rng() & 1U);
    const double l = population_loss(h, d);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
    EXPECT_NEAR(population_loss(h.flipped(), d), 1.0 - l, 1e-12);
    EXPECT_NEAR(l, oracle::loss(h.to_string(), d), 1e-12);
  }
}

TEST(EmpiricalLoss, WorkedExamples) {
  EXPECT_EQ(empirical_loss(H("11"), Sample{E(0, true), E(1, true)}), 0.0);
  EXPECT_EQ(empirical_loss(H("00"), Sample{E(0, true), E(1, true)}), 1.0);
  EXPECT_NEAR(empirical_loss(H("01"), Sample{E(0, false), E(0, true), E(1, true)}), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(empirical_loss(H("01"), Sample{}), std::invalid_argument);
}

TEST(ClassLoss, WorkedExamples) {
  EXPECT_EQ(class_loss(threshold_class(4), median_threshold_distribution(4)), 0.0);
  const HypothesisClass constants(2, {H("00"), H("11")});
  EXPECT_NEAR(class_loss(constants, uniform_over(2, {E(0, false), E(1, true)})), 0.5, 1e-12);
  EXPECT_THROW(class_loss(HypothesisClass(2, {}), uniform_over(2, {E(0, false)})), std::invalid_argument);
}

TEST(ClassLoss, IsMinimumOverMembers) {
  const auto c = full_cube(3);
  const auto d = uniform_over(3, {E(0, true), E(0, false), E(1, true), E(2, false)});
  const double cl = class_loss(c, d);
  for (const auto& h : c) EXPECT_LE(cl, population_loss(h, d));
  EXPECT_NEAR(cl, 0.25, 1e-12);
}

TEST(DrawSample, DeterministicAndSized) {
  const auto d = median_threshold_distribution(16);
  for (std::uint64_t n : {1ull, 17ull, 4096ull, 4097ull, 1000000ull}) {
    const auto a = draw_sample(d, n, RandomSeed(5));
    EXPECT_EQ(a.size(), n);
    EXPECT_EQ(a, draw_sample(d, n, RandomSeed(5)));
  }
  EXPECT_NE(draw_sample(d, 100, RandomSeed(5)), draw_sample(d, 100, RandomSeed(6)));
  EXPECT_THROW(draw_sample(d, 0, RandomSeed(5)), std::invalid_argument);
}

TEST(DrawSample, PointMassAndFrequencies) {
  const auto pm = FiniteDistribution::point_mass(4, E(2, true));
  const auto s = draw_sample(pm, 250, RandomSeed(1));
  ASSERT_EQ(s.entries().size(), 1u);
  EXPECT_EQ(s.entries()[0].count, 250u);
  EXPECT_EQ(empirical_loss(H("0010"), s), 0.0);

  const auto two = uniform_over(2, {E(0, false), E(1, true)});
  const auto big = draw_sample(two, 10000, RandomSeed(42));
  ASSERT_EQ(big.entries().size(), 2u);
  EXPECT_NEAR(static_cast<double>(big.entries()[0].count) / 10000.0, 0.5, 0.02);
}

TEST(DrawSample, LargeSampleMatchesAtomMasses) {
  // The multinomial path: every count within 5 sd of its mean.
  const FiniteDistribution d(3, {{E(0, false), 0.1}, {E(1, true), 0.3}, {E(2, true), 0.6}});
  const std::uint64_t n = 10'000'000;
  const auto s = draw_sample(d, n, RandomSeed(8));
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = d.atoms()[i].probability;
    const double sd = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(s.entries()[i].count), n * p, 5 * sd);
  }
}

TEST(MixWithPointMass, WorkedExample) {
  const auto d = uniform_over(2, {E(0, true), E(1, false)});
  const auto m = mix_with_point_mass(d, DomainPoint{0}, false, 0.1);
  EXPECT_NEAR(m.probability(E(0, false)), 0.9, 1e-12);
  EXPECT_NEAR(m.probability(E(0, true)), 0.05, 1e-12);
  EXPECT_NEAR(m.probability(E(1, false)), 0.05, 1e-12);
  const auto same = mix_with_point_mass(d, DomainPoint{0}, false, 1.0);
  ASSERT_EQ(same.atoms().size(), d.atoms().size());
  for (std::size_t i = 0; i < d.atoms().size(); ++i) {
    EXPECT_EQ(same.atoms()[i].example, d.atoms()[i].example);
    EXPECT_NEAR(same.atoms()[i].probability, d.atoms()[i].probability, 1e-15);
  }
  EXPECT_THROW(mix_with_point_mass(d, DomainPoint{0}, false, 0.0), std::invalid_argument);
  EXPECT_THROW(mix_with_point_mass(d, DomainPoint{0}, false, 1.5), std::invalid_argument);
}

TEST(MixWithPointMass, ClassLossBoundedByGamma) {
  const auto c = threshold_class(6);
  const auto d = uniform_over(6, {E(0, true), E(1, false), E(2, true), E(3, false), E(4, true), E(5, false)});
  for (double g : {0.05, 0.3, 0.7, 1.0}) {
    for (std::uint32_t x = 0; x < 6; ++x) {
      for (bool b : {false, true}) {
        const auto m = mix_with_point_mass(d, DomainPoint{x}, b, g);
        double total = 0.0;
        for (const auto& a : m.atoms()) total += a.probability;
        EXPECT_NEAR(total, 1.0, 1e-9);
        EXPECT_LE(class_loss(c, m), g + 1e-12);
      }
    }
  }
}

TEST(ConditionOnConsistency, WorkedExamples) {
  const auto d = uniform_over(2, {E(0, true), E(1, false), E(1, true)});
  const auto c = condition_on_consistency(d, H("11"));
  ASSERT_EQ(c.atoms().size(), 2u);
  EXPECT_NEAR(c.probability(E(0, true)), 0.5, 1e-12);
  EXPECT_NEAR(c.probability(E(1, true)), 0.5, 1e-12);
  EXPECT_EQ(population_loss(H("11"), c), 0.0);
  const auto realizable = median_threshold_distribution(8);
  EXPECT_EQ(condition_on_consistency(realizable, H("00011111")), realizable);
  EXPECT_THROW(condition_on_consistency(uniform_over(1, {E(0, true)}), H("0")), std::invalid_argument);
}

TEST(ThresholdClass, Members) {
  EXPECT_EQ(threshold_class(3), HypothesisClass(3, {H("111"), H("011"), H("001"), H("000")}));
  EXPECT_EQ(threshold_class(1), HypothesisClass(1, {H("1"), H("0")}));
  for (std::size_t n = 1; n <= 12; ++n) EXPECT_EQ(threshold_class(n).size(), n + 1);
}

TEST(ThresholdClass, PulledBackKeepsStaircase) {
  const auto c = threshold_class_on(7, 64);
  EXPECT_EQ(c.size(), 8u);
  EXPECT_EQ(c.domain_size(), 64u);
  for (const auto& h : c) {
    // Every member is a single 0-block followed by a 1-block.
    const auto s = h.to_string();
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end())) << s;
  }
  EXPECT_EQ(threshold_class_on(5, 5), threshold_class(5));
}

TEST(MedianThreshold, Atoms) {
  const auto d = median_threshold_distribution(4);
  ASSERT_EQ(d.atoms().size(), 4u);
  EXPECT_NEAR(d.probability(E(0, false)), 0.25, 1e-15);
  for (std::uint32_t x = 1; x < 4; ++x) EXPECT_NEAR(d.probability(E(x, true)), 0.25, 1e-15);
  // m* = 1 at M = 2, so both points are labeled 1.
  const auto two = median_threshold_distribution(2);
  EXPECT_NEAR(two.probability(E(0, true)), 0.5, 1e-15);
  EXPECT_NEAR(two.probability(E(1, true)), 0.5, 1e-15);
  for (std::size_t m = 2; m <= 40; ++m) {
    EXPECT_EQ(class_loss(threshold_class(m), median_threshold_distribution(m)), 0.0) << m;
  }
  EXPECT_THROW(median_threshold_distribution(1), std::invalid_argument);
}

TEST(TextFormats, ClassRoundTrip) {
  const auto c = threshold_class(5);
  EXPECT_EQ(parse_class(format_class(c)), c);
  EXPECT_EQ(parse_class("# comment\n3\n101\n\n010\n"), HypothesisClass(3, {H("101"), H("010")}));
  EXPECT_THROW(parse_class("3\n10\n"), std::invalid_argument);
  EXPECT_THROW(parse_class(""), std::invalid_argument);
}

TEST(TextFormats, DistributionRoundTripIsBitExact) {
  const FiniteDistribution d(5, {{E(0, false), 0.1}, {E(3, true), 0.2}, {E(4, true), 0.7}});
  const auto back = parse_distribution(format_distribution(d));
  EXPECT_EQ(back, d);
  const auto m = mix_with_point_mass(median_threshold_distribution(7), DomainPoint{2}, true, 0.3);
  EXPECT_EQ(parse_distribution(format_distribution(m)), m);
  EXPECT_THROW(parse_distribution("0 2 1.0\n"), std::invalid_argument);
}

TEST(TextFormats, LoadFromFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "stablelab-core-test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "h.txt") << format_class(full_cube(2));
    std::ofstream(dir / "d.txt") << format_distribution(median_threshold_distribution(6));
  }
  EXPECT_EQ(load_class((dir / "h.txt").string()), full_cube(2));
  EXPECT_EQ(load_distribution((dir / "d.txt").string()), median_threshold_distribution(6));
  EXPECT_THROW(load_class((dir / "missing.txt").string()), std::runtime_error);
}

}  // namespace
}  // namespace stablelab
