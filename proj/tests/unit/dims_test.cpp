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

#include "stablelab/dims.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace stablelab {
namespace {

Hypothesis H(std::string_view bits) { return Hypothesis::from_string(bits); }
DomainPoint P(std::uint32_t x) { return DomainPoint{x}; }

TEST(MistakeTree, PathsFollowHeapOrder) {
  const MistakeTree t(2, {P(0), P(1), P(2)});
  const auto left = t.path(0b00);
  ASSERT_EQ(left.size(), 2u);
  EXPECT_EQ(left[0].point, P(0));
  EXPECT_FALSE(left[0].label);
  EXPECT_EQ(left[1].point, P(1));
  const auto right = t.path(0b11);
  EXPECT_EQ(right[1].point, P(2));
  EXPECT_TRUE(right[1].label);
  EXPECT_THROW(MistakeTree(2, {P(0)}), std::invalid_argument);
}

TEST(ShattersTree, WorkedExamples) {
  EXPECT_TRUE(shatters_tree(HypothesisClass(1, {H("0")}), MistakeTree(0, {})));
  const auto t = MistakeTree::uniform_levels(std::vector<DomainPoint>{P(0), P(1)});
  EXPECT_TRUE(shatters_tree(full_cube(2), t));
  EXPECT_FALSE(shatters_tree(HypothesisClass(2, {H("00"), H("11")}), t));
}

TEST(Littlestone, WorkedExamples) {
  EXPECT_EQ(littlestone_dimension(HypothesisClass(3, {H("010")})), 0);
  EXPECT_EQ(littlestone_dimension(HypothesisClass(3, {})), -1);
  EXPECT_EQ(littlestone_dimension(threshold_class(3)), 2);
  EXPECT_EQ(littlestone_dimension(threshold_class(7)), 3);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_EQ(littlestone_dimension(full_cube(n)), static_cast<int>(n));
}

TEST(Littlestone, ThresholdStaircase) {
  for (std::size_t n = 1; n <= 16; ++n) {
    EXPECT_EQ(littlestone_dimension(threshold_class(n)), oracle::floor_log2(static_cast<int>(n) + 1)) << n;
  }
}

TEST(Vc, WorkedExamples) {
  EXPECT_EQ(vc_dimension(HypothesisClass(2, {H("01")})), 0);
  EXPECT_EQ(vc_dimension(threshold_class(3)), 1);
  EXPECT_EQ(vc_dimension(full_cube(3)), 3);
  EXPECT_EQ(vc_dimension(HypothesisClass(2, {})), 0);
}

TEST(Threshold, WorkedExamples) {
  for (std::size_t n = 1; n <= 8; ++n) EXPECT_EQ(threshold_dimension(threshold_class(n)), static_cast<int>(n));
  EXPECT_EQ(threshold_dimension(HypothesisClass(3, {H("010")})), 1);
  EXPECT_EQ(threshold_dimension(HypothesisClass(3, {H("000")})), 0);
  EXPECT_EQ(threshold_dimension(HypothesisClass(2, {H("00")})), 0);
  // Points need not appear in index order: 100, 110 realize a staircase on
  // the tuple (1, 0).
  EXPECT_EQ(threshold_dimension(HypothesisClass(2, {H("10"), H("11")})), 2);
}

TEST(LogThresholdBound, WorkedExamples) {
  EXPECT_TRUE(check_log_threshold_bound(threshold_class(7)));
  EXPECT_TRUE(check_log_threshold_bound(HypothesisClass(2, {H("00"), H("10")})));
  EXPECT_TRUE(check_log_threshold_bound(HypothesisClass(2, {H("00")})));
  EXPECT_EQ(floor_log2(1), 0);
  EXPECT_EQ(floor_log2(7), 2);
  EXPECT_EQ(floor_log2(8), 3);
}

TEST(Limits, RejectOversizedInputs) {
  EXPECT_THROW(littlestone_dimension(threshold_class(17)), LimitExceeded);
  EXPECT_THROW(vc_dimension(full_cube(13)), LimitExceeded);
}

// Property sweep against the brute-force oracles.
TEST(DimsSweep, AgreesWithOracles) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto h = oracle::random_class(rng, 8, 32);
    const auto bits = oracle::bits_of(h);
    const auto n = h.domain_size();
    const int ld = littlestone_dimension(h);
    const int vc = vc_dimension(h);
    const int td = threshold_dimension(h);
    if (n <= 6) ASSERT_EQ(ld, oracle::TreeSearch(bits, n).dimension()) << format_class(h);
    ASSERT_EQ(vc, oracle::vc(bits, n)) << format_class(h);
    ASSERT_EQ(td, oracle::threshold(bits, n)) << format_class(h);
    ASSERT_LE(vc, ld);
    ASSERT_TRUE(check_log_threshold_bound(h)) << format_class(h);
    const auto report = dimension_report(h);
    EXPECT_EQ(report.vc, vc);
    EXPECT_EQ(report.littlestone, ld);
    EXPECT_EQ(report.threshold, td);
  }
}

TEST(DimsSweep, LittlestoneIsMonotone) {
  std::mt19937_64 rng(78);
  for (int i = 0; i < 300; ++i) {
    const auto h = oracle::random_class(rng, 6, 20);
    std::vector<Hypothesis> sub;
    for (const auto& m : h) {
      if (rng() & 1U) sub.push_back(m);
    }
    EXPECT_LE(littlestone_dimension(HypothesisClass(h.domain_size(), sub)), littlestone_dimension(h));
  }
}

TEST(DimsSweep, ShatteredSetGivesShatteredTree) {
  std::mt19937_64 rng(79);
  for (int i = 0; i < 300; ++i) {
    const auto h = oracle::random_class(rng, 6, 20);
    const auto n = h.domain_size();
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
      std::vector<DomainPoint> pts;
      for (std::uint32_t x = 0; x < n; ++x) {
        if (mask >> x & 1U) pts.push_back(P(x));
      }
      const HypothesisClass restricted = h;
      bool shattered = true;
      for (std::uint32_t pattern = 0; pattern < (1U << pts.size()) && shattered; ++pattern) {
        shattered = std::any_of(h.begin(), h.end(), [&](const Hypothesis& m) {
          for (std::size_t j = 0; j < pts.size(); ++j) {
            if (m(pts[j]) != ((pattern >> j & 1U) != 0)) return false;
          }
          return true;
        });
      }
      if (shattered) EXPECT_TRUE(shatters_tree(h, MistakeTree::uniform_levels(pts)));
    }
  }
}

TEST(DimsSweep, OracleWitnessTreesAreShattered) {
  std::mt19937_64 rng(80);
  for (int i = 0; i < 200; ++i) {
    const auto h = oracle::random_class(rng, 5, 16);
    const int ld = littlestone_dimension(h);
    oracle::TreeSearch search(oracle::bits_of(h), h.domain_size());
    for (int d = 0; d <= ld; ++d) {
      const auto nodes = search.witness(static_cast<std::size_t>(d));
      ASSERT_TRUE(nodes.has_value()) << d << " " << ld << "\n" << format_class(h);
      std::vector<DomainPoint> pts;
      for (auto x : *nodes) pts.push_back(P(x));
      EXPECT_TRUE(shatters_tree(h, MistakeTree(static_cast<std::size_t>(d), pts)));
    }
    EXPECT_FALSE(search.witness(static_cast<std::size_t>(ld) + 1).has_value());
  }
}

}  // namespace
}  // namespace stablelab
