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

// Exact combinatorial dimensions of finite classes. All calculators are
// exponential and refuse classes beyond kMaxDomain points or kMaxClassSize
// members.

#ifndef STABLELAB_DIMS_HPP_
#define STABLELAB_DIMS_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stablelab/core.hpp"

namespace stablelab {

inline constexpr std::size_t kMaxDomain = 16;
inline constexpr std::size_t kMaxClassSize = 4096;

class LimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Complete binary tree of depth d with domain points on the 2^d - 1
/// internal nodes, stored in heap order: node i has its 0-child at 2i+1 and
/// its 1-child at 2i+2.
class MistakeTree {
 public:
  MistakeTree() = default;
  MistakeTree(std::size_t depth, std::vector<DomainPoint> nodes);

  /// Every node at level i carries points[i]; the tree a shattered set
  /// induces.
  static MistakeTree uniform_levels(std::span<const DomainPoint> points);

  std::size_t depth() const { return depth_; }
  std::span<const DomainPoint> nodes() const { return nodes_; }

  /// The (point, bit) pairs along the path selected by the low `depth` bits
  /// of `branches` (bit i chooses the edge leaving level i).
  std::vector<Example> path(std::uint64_t branches) const;

 private:
  std::size_t depth_ = 0;
  std::vector<DomainPoint> nodes_;
};

struct DimensionReport {
  int vc = 0;
  int littlestone = -1;
  int threshold = 0;
  bool bound_holds = true;
};

/// True iff each of the 2^d root-to-leaf paths is realized by some member.
bool shatters_tree(const HypothesisClass& hclass, const MistakeTree& tree);

/// Depth of the deepest shattered mistake tree; -1 for the empty class.
int littlestone_dimension(const HypothesisClass& hclass);

int vc_dimension(const HypothesisClass& hclass);

/// Largest k with points x_1..x_k and members h_1..h_k such that
/// h_t(x_i) = 1 iff i >= t. The all-zero class (and the empty class) has 0.
int threshold_dimension(const HypothesisClass& hclass);

/// threshold_dimension(H) >= floor(log2 Ldim(H)). Vacuously true when
/// Ldim(H) < 1.
bool check_log_threshold_bound(const HypothesisClass& hclass);

DimensionReport dimension_report(const HypothesisClass& hclass);

/// floor(log2 d) for d >= 1.
int floor_log2(int d);

}  // namespace stablelab

#endif  // STABLELAB_DIMS_HPP_
