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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stablelab {
namespace {

constexpr std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

// Samples at or below this size are drawn one example at a time.
constexpr std::uint64_t kPerDrawLimit = 4096;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> content_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

std::size_t parse_count(const std::string& token, const char* what) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || token.empty() || token.front() == '-') {
    throw std::invalid_argument(std::string("expected ") + what + ", got '" +
                                token + "'");
  }
  return static_cast<std::size_t>(value);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Hypothesis

Hypothesis::Hypothesis(std::size_t domain_size, bool fill)
    : size_(domain_size), words_(words_for(domain_size), 0) {
  if (fill) {
    for (std::size_t i = 0; i < size_; ++i) set(i, true);
  }
}

Hypothesis Hypothesis::from_string(std::string_view bits) {
  Hypothesis h(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      h.set(i, true);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("hypothesis string must be 0/1, got '" +
                                  std::string(bits) + "'");
    }
  }
  return h;
}

void Hypothesis::set(std::size_t i, bool value) {
  if (i >= size_) throw std::out_of_range("hypothesis bit index");
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (value) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

Hypothesis Hypothesis::flipped() const {
  Hypothesis out(size_);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] = ~words_[w];
  if (size_ % 64 != 0 && !out.words_.empty()) {
    out.words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }
  return out;
}

std::size_t Hypothesis::count_ones() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string Hypothesis::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (label(i)) s[i] = '1';
  }
  return s;
}

std::size_t Hypothesis::hash() const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ size_;
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::strong_ordering operator<=>(const Hypothesis& a, const Hypothesis& b) {
  const std::size_t common = std::min(a.size_, b.size_);
  const std::size_t full_words = common / 64;
  for (std::size_t w = 0; w <= full_words && w < a.words_.size() &&
                          w < b.words_.size();
       ++w) {
    std::uint64_t diff = a.words_[w] ^ b.words_[w];
    if (w == full_words) {
      const std::size_t tail = common % 64;
      diff &= tail == 0 ? 0 : (std::uint64_t{1} << tail) - 1;
    }
    if (diff != 0) {
      const int bit = std::countr_zero(diff);
      // The string holding '0' at the first difference sorts first.
      return ((a.words_[w] >> bit) & 1U) ? std::strong_ordering::greater
                                         : std::strong_ordering::less;
    }
  }
  return a.size_ <=> b.size_;
}

std::ostream& operator<<(std::ostream& os, const Hypothesis& h) {
  return os << h.to_string();
}

// ---------------------------------------------------------------------------
// HypothesisClass

HypothesisClass::HypothesisClass(std::size_t domain_size,
                                 std::vector<Hypothesis> members)
    : domain_size_(domain_size), members_(std::move(members)) {
  for (const auto& h : members_) {
    if (h.domain_size() != domain_size_) {
      throw std::invalid_argument("class member '" + h.to_string() +
                                  "' does not match domain size " +
                                  std::to_string(domain_size_));
    }
  }
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()),
                 members_.end());
}

bool HypothesisClass::contains(const Hypothesis& h) const {
  return std::binary_search(members_.begin(), members_.end(), h);
}

// ---------------------------------------------------------------------------
// Sample

Sample::Sample(std::span<const Example> examples) {
  std::vector<Entry> entries;
  entries.reserve(examples.size());
  for (const auto& e : examples) entries.push_back({e, 1});
  *this = from_entries(std::move(entries));
}

Sample Sample::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.example < b.example; });
  Sample out;
  for (const auto& e : entries) {
    if (e.count == 0) continue;
    if (!out.entries_.empty() && out.entries_.back().example == e.example) {
      out.entries_.back().count += e.count;
    } else {
      out.entries_.push_back(e);
    }
    out.size_ += e.count;
  }
  return out;
}

std::vector<Example> Sample::expand() const {
  std::vector<Example> out;
  out.reserve(static_cast<std::size_t>(size_));
  for (const auto& e : entries_) {
    for (std::uint64_t c = 0; c < e.count; ++c) out.push_back(e.example);
  }
  return out;
}

Sample Sample::merged(const Sample& other) const {
  std::vector<Entry> all(entries_.begin(), entries_.end());
  all.insert(all.end(), other.entries_.begin(), other.entries_.end());
  return from_entries(std::move(all));
}

// ---------------------------------------------------------------------------
// FiniteDistribution

FiniteDistribution::FiniteDistribution(std::size_t domain_size,
                                       std::vector<Atom> atoms)
    : domain_size_(domain_size), atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) {
    return a.example < b.example;
  });
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& a = atoms_[i];
    if (a.example.point.index >= domain_size_) {
      throw std::invalid_argument(
          "distribution atom point " + std::to_string(a.example.point.index) +
          " outside domain of size " + std::to_string(domain_size_));
    }
    if (!(a.probability >= 0.0) || !std::isfinite(a.probability)) {
      throw std::invalid_argument("distribution atom has negative probability");
    }
    if (i > 0 && atoms_[i - 1].example == a.example) {
      throw std::invalid_argument("distribution has duplicate atom (" +
                                  std::to_string(a.example.point.index) + ", " +
                                  (a.example.label ? "1" : "0") + ")");
    }
    total += a.probability;
  }
  if (std::abs(total - 1.0) > kTolerance) {
    throw std::invalid_argument("distribution probabilities sum to " +
                                std::to_string(total) + ", not 1");
  }
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t domain_size,
                                                  Example example) {
  return FiniteDistribution(domain_size, {{example, 1.0}});
}

FiniteDistribution FiniteDistribution::uniform(
    std::size_t domain_size, std::span<const Example> support) {
  if (support.empty()) {
    throw std::invalid_argument("uniform distribution needs a nonempty support");
  }
  const double p = 1.0 / static_cast<double>(support.size());
  std::vector<Atom> atoms;
  atoms.reserve(support.size());
  for (const auto& e : support) atoms.push_back({e, p});
  return FiniteDistribution(domain_size, std::move(atoms));
}

double FiniteDistribution::probability(const Example& e) const {
  auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), e,
      [](const Atom& a, const Example& x) { return a.example < x; });
  return (it != atoms_.end() && it->example == e) ? it->probability : 0.0;
}

// ---------------------------------------------------------------------------
// Losses

double population_loss(const Hypothesis& h, const FiniteDistribution& dist) {
  if (h.domain_size() != dist.domain_size()) {
    throw std::invalid_argument(
        "population_loss: hypothesis domain " +
        std::to_string(h.domain_size()) + " does not match distribution domain " +
        std::to_string(dist.domain_size()));
  }
  double loss = 0.0;
  for (const auto& a : dist.atoms()) {
    if (h(a.example.point) != a.example.label) loss += a.probability;
  }
  return std::clamp(loss, 0.0, 1.0);
}

std::uint64_t mistakes(const Hypothesis& h, const Sample& sample) {
  std::uint64_t wrong = 0;
  for (const auto& e : sample.entries()) {
    if (e.example.point.index >= h.domain_size()) {
      throw std::invalid_argument("sample point outside hypothesis domain");
    }
    if (h(e.example.point) != e.example.label) wrong += e.count;
  }
  return wrong;
}

double empirical_loss(const Hypothesis& h, const Sample& sample) {
  if (sample.empty()) throw std::invalid_argument("empirical_loss: empty sample");
  return static_cast<double>(mistakes(h, sample)) /
         static_cast<double>(sample.size());
}

double class_loss(const HypothesisClass& hclass,
                  const FiniteDistribution& dist) {
  if (hclass.empty()) throw std::invalid_argument("class_loss: empty class");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : hclass) best = std::min(best, population_loss(h, dist));
  return best;
}

// ---------------------------------------------------------------------------
// Sampling

Sample draw_sample(const FiniteDistribution& dist, std::uint64_t n,
                   RandomSeed seed) {
  if (n == 0) throw std::invalid_argument("draw_sample: n must be at least 1");
  const auto atoms = dist.atoms();
  Rng rng(seed);
  std::vector<Sample::Entry> entries;
  entries.reserve(atoms.size());

  if (n <= kPerDrawLimit) {
    std::vector<double> cdf(atoms.size());
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      acc += atoms[i].probability;
      cdf[i] = acc;
      if (atoms[i].probability > 0.0) last_positive = i;
    }
    std::vector<std::uint64_t> counts(atoms.size(), 0);
    for (std::uint64_t d = 0; d < n; ++d) {
      const double u = rng.uniform() * acc;
      auto idx = static_cast<std::size_t>(
          std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (idx > last_positive) idx = last_positive;
      ++counts[idx];
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      entries.push_back({atoms[i].example, counts[i]});
    }
  } else {
    std::uint64_t remaining = n;
    double mass = 0.0;
    for (const auto& a : atoms) mass += a.probability;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].probability > 0.0) last_positive = i;
    }
    for (std::size_t i = 0; i < atoms.size() && remaining > 0; ++i) {
      const double p = atoms[i].probability;
      std::uint64_t c = 0;
      if (i == last_positive) {
        c = remaining;
      } else if (p > 0.0) {
        c = rng.binomial(remaining, std::clamp(p / mass, 0.0, 1.0));
      }
      entries.push_back({atoms[i].example, c});
      remaining -= c;
      mass -= p;
      if (mass <= 0.0) mass = 0.0;
    }
  }
  return Sample::from_entries(std::move(entries));
}

// ---------------------------------------------------------------------------
// Distribution constructions

FiniteDistribution mix_with_point_mass(const FiniteDistribution& dist,
                                       DomainPoint x_star, bool b_star,
                                       double gamma_prime) {
  if (!(gamma_prime > 0.0 && gamma_prime <= 1.0)) {
    throw std::invalid_argument("mix_with_point_mass: gamma' must be in (0, 1]");
  }
  if (x_star.index >= dist.domain_size()) {
    throw std::invalid_argument("mix_with_point_mass: x* outside the domain");
  }
  const Example star{x_star, b_star};
  std::vector<FiniteDistribution::Atom> atoms;
  bool merged = false;
  for (const auto& a : dist.atoms()) {
    double p = gamma_prime * a.probability;
    if (a.example == star) {
      p += 1.0 - gamma_prime;
      merged = true;
    }
    atoms.push_back({a.example, p});
  }
  if (!merged && gamma_prime < 1.0) atoms.push_back({star, 1.0 - gamma_prime});
  double total = 0.0;
  for (const auto& a : atoms) total += a.probability;
  for (auto& a : atoms) a.probability /= total;
  return FiniteDistribution(dist.domain_size(), std::move(atoms));
}

FiniteDistribution condition_on_consistency(const FiniteDistribution& dist,
                                            const Hypothesis& h_star) {
  if (h_star.domain_size() != dist.domain_size()) {
    throw std::invalid_argument("condition_on_consistency: domain mismatch");
  }
  std::vector<FiniteDistribution::Atom> kept;
  double mass = 0.0;
  for (const auto& a : dist.atoms()) {
    if (h_star(a.example.point) == a.example.label && a.probability > 0.0) {
      kept.push_back(a);
      mass += a.probability;
    }
  }
  if (mass <= 0.0) {
    throw std::invalid_argument(
        "condition_on_consistency: no probability mass is consistent with h*");
  }
  for (auto& a : kept) a.probability /= mass;
  return FiniteDistribution(dist.domain_size(), std::move(kept));
}

HypothesisClass threshold_class(std::size_t n) {
  return threshold_class_on(n, n);
}

HypothesisClass threshold_class_on(std::size_t n, std::size_t domain_size) {
  if (n == 0) throw std::invalid_argument("threshold_class: N must be at least 1");
  if (domain_size < n) {
    throw std::invalid_argument("threshold_class: domain smaller than N");
  }
  std::vector<Hypothesis> members;
  members.reserve(n + 1);
  for (std::size_t t = 1; t <= n + 1; ++t) {
    Hypothesis h(domain_size);
    for (std::size_t x = 1; x <= domain_size; ++x) {
      // Block map: 1-indexed domain position x lands on class position
      // ceil(x * n / M); the identity when M == n.
      const std::size_t position = (x * n + domain_size - 1) / domain_size;
      if (position >= t) h.set(x - 1, true);
    }
    members.push_back(std::move(h));
  }
  return HypothesisClass(domain_size, std::move(members));
}

HypothesisClass full_cube(std::size_t n) {
  if (n > 20) throw std::invalid_argument("full_cube: n too large");
  std::vector<Hypothesis> members;
  members.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Hypothesis h(n);
    for (std::size_t i = 0; i < n; ++i) h.set(i, (mask >> i) & 1U);
    members.push_back(std::move(h));
  }
  return HypothesisClass(n, std::move(members));
}

FiniteDistribution median_threshold_distribution(std::size_t m) {
  if (m < 2) {
    throw std::invalid_argument("median_threshold_distribution: M must be >= 2");
  }
  const std::size_t median = m / 2;
  std::vector<Example> support;
  support.reserve(m);
  for (std::size_t x = 1; x <= m; ++x) {
    support.push_back(
        {DomainPoint{static_cast<std::uint32_t>(x - 1)}, x >= median});
  }
  return FiniteDistribution::uniform(m, support);
}

// ---------------------------------------------------------------------------
// Text formats

std::string format_class(const HypothesisClass& hclass) {
  std::string out = std::to_string(hclass.domain_size()) + "\n";
  for (const auto& h : hclass) out += h.to_string() + "\n";
  return out;
}

HypothesisClass parse_class(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw std::invalid_argument("class file: missing domain size");
  const std::size_t n = parse_count(lines[0], "domain size");
  std::vector<Hypothesis> members;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto h = Hypothesis::from_string(lines[i]);
    if (h.domain_size() != n) {
      throw std::invalid_argument("class file line " + std::to_string(i + 1) +
                                  ": expected " + std::to_string(n) +
                                  " bits, got " +
                                  std::to_string(h.domain_size()));
    }
    members.push_back(std::move(h));
  }
  return HypothesisClass(n, std::move(members));
}

std::string format_distribution(const FiniteDistribution& dist) {
  std::string out = "domain " + std::to_string(dist.domain_size()) + "\n";
  char buf[64];
  for (const auto& a : dist.atoms()) {
    std::snprintf(buf, sizeof(buf), "%u %d %.17g\n", a.example.point.index,
                  a.example.label ? 1 : 0, a.probability);
    out += buf;
  }
  return out;
}

FiniteDistribution parse_distribution(std::string_view text) {
  const auto lines = content_lines(text);
  std::size_t domain = 0;
  bool explicit_domain = false;
  std::vector<FiniteDistribution::Atom> atoms;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::istringstream in(lines[i]);
    std::string a, b, c, extra;
    in >> a >> b >> c;
    if (a == "domain" && i == 0 && c.empty()) {
      domain = parse_count(b, "domain size");
      explicit_domain = true;
      continue;
    }
    if (c.empty() || (in >> extra)) {
      throw std::invalid_argument("distribution line '" + lines[i] +
                                  "': expected 'point label probability'");
    }
    const std::size_t point = parse_count(a, "point index");
    if (b != "0" && b != "1") {
      throw std::invalid_argument("distribution line '" + lines[i] +
                                  "': label must be 0 or 1");
    }
    double p = 0.0;
    std::size_t used = 0;
    try {
      p = std::stod(c, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != c.size()) {
      throw std::invalid_argument("distribution line '" + lines[i] +
                                  "': bad probability");
    }
    atoms.push_back(
        {{DomainPoint{static_cast<std::uint32_t>(point)}, b == "1"}, p});
    if (!explicit_domain) domain = std::max(domain, point + 1);
  }
  return FiniteDistribution(domain, std::move(atoms));
}

HypothesisClass load_class(const std::string& path) {
  return parse_class(read_file(path));
}

FiniteDistribution load_distribution(const std::string& path) {
  return parse_distribution(read_file(path));
}

}  // namespace stablelab
