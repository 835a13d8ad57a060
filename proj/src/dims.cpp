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

#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_map>

namespace stablelab {
namespace {

// Subset of class members, one bit per member index.
using MemberSet = std::vector<std::uint64_t>;

struct MemberSetHash {
  std::size_t operator()(const MemberSet& s) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto w : s) {
      h ^= w;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

std::size_t popcount(const MemberSet& s) {
  std::size_t n = 0;
  for (auto w : s) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

// The class as point masks: bit x of masks[i] is member i's label at x.
struct CompactClass {
  std::size_t domain = 0;
  std::vector<std::uint32_t> masks;

  MemberSet all() const {
    MemberSet s((masks.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < masks.size(); ++i) s[i / 64] |= 1ULL << (i % 64);
    return s;
  }

  template <typename F>
  void for_each(const MemberSet& s, F&& f) const {
    for (std::size_t w = 0; w < s.size(); ++w) {
      std::uint64_t bits = s[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        f(w * 64 + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }
};

CompactClass compact(const HypothesisClass& hclass) {
  if (hclass.domain_size() > kMaxDomain) {
    throw LimitExceeded("dimension calculators support domains of at most " +
                        std::to_string(kMaxDomain) + " points, got " +
                        std::to_string(hclass.domain_size()));
  }
  if (hclass.size() > kMaxClassSize) {
    throw LimitExceeded("dimension calculators support at most " +
                        std::to_string(kMaxClassSize) + " hypotheses, got " +
                        std::to_string(hclass.size()));
  }
  CompactClass c;
  c.domain = hclass.domain_size();
  for (const auto& h : hclass) {
    std::uint32_t m = 0;
    for (std::size_t x = 0; x < c.domain; ++x) {
      if (h.label(x)) m |= 1U << x;
    }
    c.masks.push_back(m);
  }
  return c;
}

class LittlestoneSolver {
 public:
  explicit LittlestoneSolver(const CompactClass& c) : c_(c) {}

  int solve(const MemberSet& s) {
    const std::size_t size = popcount(s);
    if (size == 0) return -1;
    if (size == 1) return 0;
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;

    const int bound = floor_log2(static_cast<int>(size));
    int best = 0;
    MemberSet zero(s.size()), one(s.size());
    for (std::size_t x = 0; x < c_.domain && best < bound; ++x) {
      std::fill(zero.begin(), zero.end(), 0);
      std::fill(one.begin(), one.end(), 0);
      std::size_t zeros = 0, ones = 0;
      c_.for_each(s, [&](std::size_t i) {
        if ((c_.masks[i] >> x) & 1U) {
          one[i / 64] |= 1ULL << (i % 64);
          ++ones;
        } else {
          zero[i / 64] |= 1ULL << (i % 64);
          ++zeros;
        }
      });
      if (zeros == 0 || ones == 0) continue;
      // A split can only help if its smaller side could reach depth `best`.
      if (1 + floor_log2(static_cast<int>(std::min(zeros, ones))) <= best) {
        continue;
      }
      const bool zero_first = zeros <= ones;
      MemberSet first = zero_first ? zero : one;
      MemberSet second = zero_first ? one : zero;
      const int a = solve(first);
      if (1 + a <= best) continue;
      const int b = solve(second);
      best = std::max(best, 1 + std::min(a, b));
    }
    memo_.emplace(s, best);
    return best;
  }

 private:
  const CompactClass& c_;
  std::unordered_map<MemberSet, int, MemberSetHash> memo_;
};

class ThresholdSolver {
 public:
  explicit ThresholdSolver(const CompactClass& c) : c_(c) {}

  // Longest staircase continuation when `free` members may still serve as
  // later hypotheses and `points` may still serve as later points.
  int solve(const MemberSet& free, std::uint32_t points) {
    const std::size_t bound =
        std::min(popcount(free), static_cast<std::size_t>(std::popcount(points)));
    if (bound == 0) return 0;
    MemberSet key = free;
    key.push_back(points);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    int best = 0;
    std::vector<std::size_t> members;
    c_.for_each(free, [&](std::size_t i) { members.push_back(i); });
    for (std::size_t h : members) {
      if (static_cast<std::size_t>(best) >= bound) break;
      const std::uint32_t hm = c_.masks[h];
      std::uint32_t candidates = points & hm;
      while (candidates != 0 && static_cast<std::size_t>(best) < bound) {
        const int x = std::countr_zero(candidates);
        candidates &= candidates - 1;
        // Later hypotheses must be 0 at x; later points must be 1 under h.
        MemberSet next(free.size(), 0);
        for (std::size_t j : members) {
          if (((c_.masks[j] >> x) & 1U) == 0) next[j / 64] |= 1ULL << (j % 64);
        }
        const std::uint32_t next_points = (points & hm) & ~(1U << x);
        best = std::max(best, 1 + solve(next, next_points));
      }
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

 private:
  const CompactClass& c_;
  std::unordered_map<MemberSet, int, MemberSetHash> memo_;
};

}  // namespace

MistakeTree::MistakeTree(std::size_t depth, std::vector<DomainPoint> nodes)
    : depth_(depth), nodes_(std::move(nodes)) {
  if (depth_ > 30) throw std::invalid_argument("mistake tree too deep");
  if (nodes_.size() != (std::size_t{1} << depth_) - 1) {
    throw std::invalid_argument("mistake tree of depth " +
                                std::to_string(depth_) + " needs " +
                                std::to_string((std::size_t{1} << depth_) - 1) +
                                " internal nodes");
  }
}

MistakeTree MistakeTree::uniform_levels(std::span<const DomainPoint> points) {
  const std::size_t depth = points.size();
  std::vector<DomainPoint> nodes((std::size_t{1} << depth) - 1);
  for (std::size_t level = 0; level < depth; ++level) {
    for (std::size_t i = (std::size_t{1} << level) - 1;
         i < (std::size_t{1} << (level + 1)) - 1; ++i) {
      nodes[i] = points[level];
    }
  }
  return MistakeTree(depth, std::move(nodes));
}

std::vector<Example> MistakeTree::path(std::uint64_t branches) const {
  std::vector<Example> out;
  out.reserve(depth_);
  std::size_t node = 0;
  for (std::size_t level = 0; level < depth_; ++level) {
    const bool bit = (branches >> level) & 1U;
    out.push_back({nodes_[node], bit});
    node = 2 * node + (bit ? 2 : 1);
  }
  return out;
}

bool shatters_tree(const HypothesisClass& hclass, const MistakeTree& tree) {
  for (const auto& p : tree.nodes()) {
    if (p.index >= hclass.domain_size()) {
      throw std::invalid_argument("mistake tree point outside the class domain");
    }
  }
  const std::uint64_t paths = std::uint64_t{1} << tree.depth();
  for (std::uint64_t b = 0; b < paths; ++b) {
    const auto path = tree.path(b);
    const bool realized =
        std::any_of(hclass.begin(), hclass.end(), [&](const Hypothesis& h) {
          return std::all_of(path.begin(), path.end(), [&](const Example& e) {
            return h(e.point) == e.label;
          });
        });
    if (!realized) return false;
  }
  return true;
}

int floor_log2(int d) {
  if (d < 1) throw std::invalid_argument("floor_log2 of a nonpositive value");
  return std::bit_width(static_cast<unsigned>(d)) - 1;
}

int littlestone_dimension(const HypothesisClass& hclass) {
  const auto c = compact(hclass);
  LittlestoneSolver solver(c);
  return solver.solve(c.all());
}

int vc_dimension(const HypothesisClass& hclass) {
  const auto c = compact(hclass);
  if (c.masks.size() < 2) return 0;
  const int max_size =
      std::min(static_cast<int>(c.domain),
               floor_log2(static_cast<int>(c.masks.size())));
  int vc = 0;
  std::vector<std::uint32_t> patterns;
  patterns.reserve(c.masks.size());
  for (int s = 1; s <= max_size; ++s) {
    bool found = false;
    for (std::uint32_t set = 0; set < (1U << c.domain) && !found; ++set) {
      if (std::popcount(set) != s) continue;
      patterns.clear();
      for (auto m : c.masks) patterns.push_back(m & set);
      std::sort(patterns.begin(), patterns.end());
      const auto distinct = static_cast<std::size_t>(
          std::unique(patterns.begin(), patterns.end()) - patterns.begin());
      found = distinct == (std::size_t{1} << s);
    }
    // Subsets of shattered sets are shattered, so the first miss is final.
    if (!found) break;
    vc = s;
  }
  return vc;
}

int threshold_dimension(const HypothesisClass& hclass) {
  const auto c = compact(hclass);
  if (c.masks.empty()) return 0;
  ThresholdSolver solver(c);
  const std::uint32_t points =
      c.domain == 32 ? ~0U : static_cast<std::uint32_t>((1ULL << c.domain) - 1);
  return solver.solve(c.all(), points);
}

bool check_log_threshold_bound(const HypothesisClass& hclass) {
  const int d = littlestone_dimension(hclass);
  if (d < 1) return true;
  return threshold_dimension(hclass) >= floor_log2(d);
}

DimensionReport dimension_report(const HypothesisClass& hclass) {
  DimensionReport r;
  r.vc = vc_dimension(hclass);
  r.littlestone = littlestone_dimension(hclass);
  r.threshold = threshold_dimension(hclass);
  r.bound_holds = r.littlestone < 1 || r.threshold >= floor_log2(r.littlestone);
  return r;
}

}  // namespace stablelab
