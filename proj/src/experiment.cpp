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

#include "stablelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stablelab/core.hpp"
#include "stablelab/dims.hpp"
#include "stablelab/harness.hpp"
#include "stablelab/learners.hpp"

namespace stablelab {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"dims", {"class"}},
      {"stability",
       {"class", "distribution", "learner", "epsilon", "n", "trials", "seed",
        "three_way"}},
      {"listrep",
       {"class", "distribution", "learner", "epsilon", "delta", "rho",
        "rho_trials", "t", "n1", "n", "trials", "seed"}},
      {"boost",
       {"class", "distribution", "learner", "epsilon", "n", "k", "trials",
        "seed"}},
      {"reduction",
       {"class", "distribution", "learner", "epsilon", "n", "gamma_prime",
        "x_star", "b_star", "trials", "seed"}},
      {"jumpprobe",
       {"class", "learner", "epsilon", "n", "trials", "seed"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    parts.push_back(trim(s.substr(pos, next == std::string_view::npos
                                           ? std::string_view::npos
                                           : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Typed access to one experiment's fields with named diagnostics.
class Fields {
 public:
  explicit Fields(const ExperimentConfig& c) : c_(c) {}

  bool has(const std::string& key) const { return lookup(key) != nullptr; }

  std::string str(const std::string& key) const {
    const auto* v = lookup(key);
    if (v == nullptr) fail(key, "is required");
    return *v;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    const auto* v = lookup(key);
    return v == nullptr ? fallback : *v;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t min = 0) const {
    const std::string v = str(key);
    std::uint64_t out = 0;
    std::size_t used = 0;
    try {
      if (!v.empty() && v.front() != '-') out = std::stoull(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) fail(key, "expected a nonnegative integer, got '" + v + "'");
    if (out < min) fail(key, "must be >= " + std::to_string(min) + ", got " + v);
    return out;
  }
  std::uint64_t u64(const std::string& key, std::uint64_t fallback,
                    std::uint64_t min) const {
    return has(key) ? u64(key, min) : fallback;
  }

  double real(const std::string& key, double lo, double hi, bool lo_open,
              bool hi_open) const {
    const std::string v = str(key);
    double out = 0.0;
    std::size_t used = 0;
    try {
      out = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(out)) {
      fail(key, "expected a real number, got '" + v + "'");
    }
    const bool low_ok = lo_open ? out > lo : out >= lo;
    const bool high_ok = hi_open ? out < hi : out <= hi;
    if (!low_ok || !high_ok) {
      fail(key, "must lie in " + std::string(lo_open ? "(" : "[") +
                    format_real(lo) + ", " + format_real(hi) +
                    (hi_open ? ")" : "]") + ", got " + v);
    }
    return out;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& reason) const {
    throw ConfigError(c_.id, key, reason);
  }

  const ExperimentConfig& config() const { return c_; }

 private:
  const std::string* lookup(const std::string& key) const {
    const auto it = c_.fields.find(key);
    return it == c_.fields.end() ? nullptr : &it->second;
  }

  const ExperimentConfig& c_;
};

// "name(a, b; c)" -> {"name", "a, b; c"}; a bare word has empty arguments.
std::pair<std::string, std::string> split_call(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos) return {trim(spec), ""};
  if (spec.back() != ')') return {"", ""};
  return {trim(spec.substr(0, open)),
          trim(spec.substr(open + 1, spec.size() - open - 2))};
}

std::uint64_t parse_u64_arg(const Fields& f, const std::string& key,
                            const std::string& token) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (!token.empty() && token.front() != '-') v = std::stoull(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size()) {
    f.fail(key, "expected an integer argument, got '" + token + "'");
  }
  return v;
}

fs::path resolve(const Fields& f, const std::string& rel) {
  fs::path p(rel);
  return p.is_absolute() ? p : f.config().base_dir / p;
}

HypothesisClass build_class(const Fields& f) {
  const std::string spec = f.str("class");
  try {
    if (spec.rfind("file:", 0) == 0) return load_class(resolve(f, spec.substr(5)).string());
    const auto [name, args] = split_call(spec);
    if (name == "members") {
      const auto semi = args.find(';');
      if (semi == std::string::npos) f.fail("class", "members(N; bits, ...) expected");
      const std::size_t n = parse_u64_arg(f, "class", trim(args.substr(0, semi)));
      std::vector<Hypothesis> members;
      for (const auto& tok : split(args.substr(semi + 1), ',')) {
        auto h = Hypothesis::from_string(tok);
        if (h.domain_size() != n) f.fail("class", "member '" + tok + "' is not " + std::to_string(n) + " bits");
        members.push_back(std::move(h));
      }
      return HypothesisClass(n, std::move(members));
    }
    const auto parts = args.empty() ? std::vector<std::string>{} : split(args, ',');
    if (name == "threshold" && parts.size() == 1) {
      return threshold_class(parse_u64_arg(f, "class", parts[0]));
    }
    if (name == "threshold" && parts.size() == 2) {
      return threshold_class_on(parse_u64_arg(f, "class", parts[0]),
                                parse_u64_arg(f, "class", parts[1]));
    }
    if (name == "cube" && parts.size() == 1) {
      return full_cube(parse_u64_arg(f, "class", parts[0]));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    f.fail("class", e.what());
  }
  f.fail("class", "unknown class spec '" + spec +
                      "' (threshold(N), threshold(N, M), cube(N), members(N; ...), file:PATH)");
}

FiniteDistribution build_distribution(const Fields& f) {
  const std::string spec = f.str("distribution");
  try {
    if (spec.rfind("file:", 0) == 0) {
      return load_distribution(resolve(f, spec.substr(5)).string());
    }
    const auto [name, args] = split_call(spec);
    if (name == "median") {
      return median_threshold_distribution(parse_u64_arg(f, "distribution", args));
    }
    if (name == "uniform" || name == "table") {
      // uniform(N; x:y, ...) or table(N; x:y=p, ...)
      const auto semi = args.find(';');
      if (semi == std::string::npos) f.fail("distribution", name + "(N; ...) expected");
      const std::size_t n = parse_u64_arg(f, "distribution", trim(args.substr(0, semi)));
      std::vector<FiniteDistribution::Atom> atoms;
      for (const auto& tok : split(args.substr(semi + 1), ',')) {
        const auto colon = tok.find(':');
        const auto eq = tok.find('=');
        if (colon == std::string::npos || (name == "table") != (eq != std::string::npos)) {
          f.fail("distribution", "bad atom '" + tok + "'");
        }
        const auto x = parse_u64_arg(f, "distribution", trim(tok.substr(0, colon)));
        const std::string label = trim(tok.substr(colon + 1, eq == std::string::npos ? std::string::npos : eq - colon - 1));
        if (label != "0" && label != "1") f.fail("distribution", "bad label in '" + tok + "'");
        double p = 1.0;
        if (eq != std::string::npos) p = std::stod(tok.substr(eq + 1));
        atoms.push_back({{DomainPoint{static_cast<std::uint32_t>(x)}, label == "1"}, p});
      }
      if (name == "uniform") {
        for (auto& a : atoms) a.probability = 1.0 / static_cast<double>(atoms.size());
      }
      return FiniteDistribution(n, std::move(atoms));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    f.fail("distribution", e.what());
  }
  f.fail("distribution", "unknown distribution spec '" + spec +
                             "' (median(M), uniform(N; x:y, ...), table(N; x:y=p, ...), file:PATH)");
}

// Learner named by the `learner` field at accuracy epsilon, with the `n`
// override applied when present.
Learner build_learner(const Fields& f, const HypothesisClass& hclass,
                      double epsilon, bool apply_n = true) {
  const std::string spec = f.str("learner", "random_threshold");
  const auto [name, args] = split_call(spec);
  std::optional<Learner> learner;
  if (name == "random_threshold") {
    learner = random_threshold_stable(hclass, epsilon);
  } else if (name == "erm") {
    learner = erm_learner(hclass, random_threshold_sample_complexity(hclass.size(), epsilon));
  } else if (name == "constant") {
    Hypothesis h;
    try {
      h = Hypothesis::from_string(args);
    } catch (const std::exception& e) {
      f.fail("learner", e.what());
    }
    if (h.domain_size() != hclass.domain_size()) f.fail("learner", "constant hypothesis has the wrong length");
    learner = constant_learner(h);
  } else {
    f.fail("learner", "unknown learner '" + spec + "' (random_threshold, erm, constant(BITS))");
  }
  if (apply_n && f.has("n")) *learner = learner->with_sample_size(f.u64("n", 1));
  return *learner;
}

double epsilon_of(const Fields& f) { return f.real("epsilon", 0.0, 1.0, true, true); }

std::uint64_t trials_of(const Fields& f) { return f.u64("trials", 1); }

class Rows {
 public:
  void add(const std::string& metric, double v) {
    rows_.push_back({metric, format_real(v), v});
  }
  void add_bool(const std::string& metric, bool v) {
    rows_.push_back({metric, v ? "true" : "false", v ? 1.0 : 0.0});
  }
  void add_text(const std::string& metric, const std::string& v) {
    rows_.push_back({metric, v, std::nan("")});
  }
  std::vector<MetricRow> take() { return std::move(rows_); }

 private:
  std::vector<MetricRow> rows_;
};

void run_dims(const Fields& f, Rows& rows) {
  const auto hclass = build_class(f);
  const auto r = dimension_report(hclass);
  rows.add("vc", r.vc);
  rows.add("littlestone", r.littlestone);
  rows.add("threshold", r.threshold);
  rows.add_bool("bound_holds", r.bound_holds);
}

void run_stability(const Fields& f, const RunOptions&, RandomSeed seed,
                   std::uint64_t trials, Rows& rows) {
  const auto hclass = build_class(f);
  const auto dist = build_distribution(f);
  const double eps = epsilon_of(f);
  Learner learner = build_learner(f, hclass, eps);
  const bool three_way = f.boolean("three_way", false);
  if (three_way) learner = three_way_rule(learner);
  const std::uint64_t n = learner.sample_complexity();
  const auto table = output_distribution(learner, dist, n, trials, seed);
  const auto r = empirical_stability(table, dist, hclass, eps);
  rows.add("sample_size", static_cast<double>(n));
  rows.add("class_loss", r.class_loss);
  rows.add("distinct_outputs", static_cast<double>(table.counts().size()));
  rows.add("max_frequency", table.max_frequency());
  rows.add_bool("found", r.found);
  rows.add("best_frequency", r.best_frequency);
  rows.add("best_loss", r.found ? r.best_loss : std::nan(""));
  rows.add("best_excess_loss", r.found ? r.best_loss - r.class_loss : std::nan(""));
  rows.add_text("best_hypothesis", r.found ? r.best_hypothesis.to_string() : "none");
  if (three_way) {
    const std::size_t d = hclass.domain_size();
    double best_constant = 0.0;
    for (bool label : {false, true}) {
      const Hypothesis c(d, label);
      const double freq = table.frequency(c);
      const double loss = population_loss(c, dist);
      rows.add(label ? "all_ones_frequency" : "all_zeros_frequency", freq);
      rows.add(label ? "all_ones_loss" : "all_zeros_loss", loss);
      if (loss <= 0.5) best_constant = std::max(best_constant, freq);
    }
    rows.add("constant_low_loss_frequency", best_constant);
  }
}

void run_listrep(const Fields& f, const RunOptions& options, RandomSeed seed,
                 std::uint64_t trials, Rows& rows) {
  const auto hclass = build_class(f);
  const auto dist = build_distribution(f);
  const double eps = epsilon_of(f);
  const double delta = f.real("delta", 0.0, 1.0, true, true);
  // The base is run for accuracy eps/4.
  const Learner base = build_learner(f, hclass, eps / 4.0);
  const std::uint64_t n0 = base.sample_complexity();

  double rho = 0.0;
  const std::string rho_spec = f.str("rho", "measure");
  if (rho_spec == "measure") {
    const std::uint64_t rho_trials = f.u64("rho_trials", trials, 1);
    const auto table =
        output_distribution(base, dist, n0, rho_trials, seed.derive("listrep.rho"));
    rho = empirical_stability(table, dist, hclass, eps / 4.0).best_frequency;
    if (rho <= 0.0) f.fail("rho", "measured stability of the base learner is 0");
  } else {
    rho = f.real("rho", 0.0, 1.0, true, false);
  }
  std::optional<std::uint64_t> t_override, n1_override;
  if (f.has("t")) t_override = f.u64("t", 1);
  if (f.has("n1")) n1_override = f.u64("n1", 1);
  const auto params = StabilityParams::make([rho](double) { return rho; }, eps,
                                            delta, n0, hclass.size(),
                                            t_override, n1_override);
  const Learner learner = list_from_stable(base, params, hclass, delta);
  const auto all = output_distribution(learner, dist, learner.sample_complexity(),
                                       trials, seed.derive("listrep.run"));
  const auto table = options.include_failures ? all : all.without_failures();
  const auto list = empirical_list(table, dist, hclass, eps, delta);

  double max_list_frequency = 0.0;
  for (double q : list.frequencies) max_list_frequency = std::max(max_list_frequency, q);
  rows.add("rho", rho);
  rows.add("list_bound", static_cast<double>(params.list_size));
  rows.add("alpha", params.alpha);
  rows.add("t", static_cast<double>(params.t));
  rows.add("n0", static_cast<double>(params.n0));
  rows.add("n1", static_cast<double>(params.n1));
  rows.add("failure_rate", static_cast<double>(all.failures()) / static_cast<double>(trials));
  rows.add_bool("failures_included", options.include_failures);
  rows.add("distinct_outputs", static_cast<double>(table.counts().size()));
  rows.add("list_size", static_cast<double>(list.list.size()));
  rows.add("covered_mass", list.covered_mass);
  rows.add_bool("list_success", list.success);
  rows.add("max_list_frequency", max_list_frequency);
  rows.add("covered_over_list_bound",
           list.covered_mass / static_cast<double>(params.list_size));
  std::string members;
  for (const auto& h : list.list) members += (members.empty() ? "" : " ") + h.to_string();
  rows.add_text("list", members.empty() ? "none" : members);
}

void run_boost(const Fields& f, const RunOptions&, RandomSeed seed,
               std::uint64_t trials, Rows& rows) {
  const auto hclass = build_class(f);
  const auto dist = build_distribution(f);
  const double eps = epsilon_of(f);
  const Learner base = build_learner(f, hclass, eps);
  std::vector<std::uint64_t> ks;
  for (const auto& tok : split(f.str("k"), ',')) {
    const std::uint64_t k = parse_u64_arg(f, "k", tok);
    if (k < 1) f.fail("k", "every k must be >= 1");
    ks.push_back(k);
  }
  rows.add("base_sample_size", static_cast<double>(base.sample_complexity()));
  std::vector<double> freqs;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const Learner boosted = majority_boost(base, ks[i]);
    const auto table = output_distribution(boosted, dist, boosted.sample_complexity(),
                                           trials, seed.derive("boost.k", ks[i]));
    freqs.push_back(out_of_list_frequency(table, dist, hclass, eps));
    rows.add("out_of_list_frequency@k=" + std::to_string(ks[i]), freqs.back());
  }
  bool nonincreasing = true;
  for (std::size_t i = 1; i < freqs.size(); ++i) nonincreasing &= freqs[i] <= freqs[i - 1];
  rows.add_bool("nonincreasing", nonincreasing);
  rows.add("last_over_first", freqs.front() > 0.0 ? freqs.back() / freqs.front() : std::nan(""));
}

void run_reduction(const Fields& f, const RunOptions&, RandomSeed seed,
                   std::uint64_t trials, Rows& rows) {
  const auto hclass = build_class(f);
  const auto dist = build_distribution(f);
  const double eps = epsilon_of(f);
  const double gamma = f.real("gamma_prime", 0.0, 1.0, true, false);
  const std::uint64_t x = f.u64("x_star");
  if (x >= hclass.domain_size()) f.fail("x_star", "outside the domain");
  const bool b = f.u64("b_star") != 0;
  if (f.u64("b_star") > 1) f.fail("b_star", "must be 0 or 1");
  const DomainPoint x_star{static_cast<std::uint32_t>(x)};

  // Stability under the mixed distribution is read at excess eps * gamma'.
  const Learner inner = build_learner(f, hclass, eps * gamma);
  const Learner wrapped = class_error_wrapper(inner, x_star, b, gamma);
  const auto mixed = mix_with_point_mass(dist, x_star, b, gamma);
  const std::uint64_t n = inner.sample_complexity();

  const auto via_wrapper =
      output_distribution(wrapped, dist, n, trials, seed.derive("reduction.wrapped"));
  const auto direct =
      output_distribution(inner, mixed, n, trials, seed.derive("reduction.direct"));
  const auto report = empirical_stability(via_wrapper, mixed, hclass, eps * gamma);

  double replaced = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto s = draw_sample(dist, n, seed.derive("reduction.sample", i));
    replaced += static_cast<double>(
        replace_examples(s, {x_star, b}, gamma, seed.derive("reduction.replace", i)).replaced);
  }
  rows.add("sample_size", static_cast<double>(n));
  rows.add("tv_distance", total_variation(via_wrapper, direct));
  rows.add("mean_replaced", replaced / static_cast<double>(trials));
  rows.add("mixed_class_loss", report.class_loss);
  rows.add("best_frequency", report.best_frequency);
  rows.add_text("best_hypothesis", report.found ? report.best_hypothesis.to_string() : "none");
  rows.add_bool("best_matches_b_star", report.found && report.best_hypothesis(x_star) == b);
}

void run_jumpprobe(const Fields& f, const RunOptions&, RandomSeed seed,
                   std::uint64_t trials, Rows& rows) {
  const auto hclass = build_class(f);
  const double eps = epsilon_of(f);
  const Learner learner = build_learner(f, hclass, eps, false);
  const std::uint64_t n = f.u64("n", 2);
  if (n % 2 != 0) f.fail("n", "must be even");
  if (hclass.domain_size() < n) f.fail("n", "exceeds the domain size");
  const auto r = jump_probe(learner, hclass.domain_size(), n, trials, seed);
  rows.add("domain", static_cast<double>(r.domain));
  rows.add("t0", static_cast<double>(r.t0));
  for (std::size_t k = 0; k < r.p.size(); ++k) {
    rows.add("p[" + std::to_string(k + 1) + "]", r.p[k]);
  }
  for (std::size_t k = 0; k < r.observations.size(); ++k) {
    rows.add("observations[" + std::to_string(k + 1) + "]",
             static_cast<double>(r.observations[k]));
  }
  double max_decrease = 0.0;
  for (std::size_t k = 1; k < r.p.size(); ++k) {
    if (r.observations[k] > 0 && r.observations[k - 1] > 0) {
      max_decrease = std::max(max_decrease, r.p[k - 1] - r.p[k]);
    }
  }
  rows.add("p_first", r.p.front());
  rows.add("p_last", r.p.back());
  rows.add("max_adjacent_gap", r.max_adjacent_gap);
  rows.add("gap_location", static_cast<double>(r.gap_location));
  rows.add("max_decrease", max_decrease);
  rows.add_bool("undersized_domain", r.undersized_domain);
}

std::string config_hash(const ExperimentConfig& c, std::uint64_t seed) {
  std::string canon = c.kind + "\n";
  for (const auto& [k, v] : c.fields) canon += k + "=" + v + "\n";
  canon += "seed=" + std::to_string(seed) + "\n";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : canon) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

std::vector<Check> checks_of(const ExperimentConfig& c) {
  std::vector<Check> out;
  for (const auto& [k, v] : c.fields) {
    if (k.rfind("check.", 0) != 0) continue;
    const std::string metric = k.substr(6);
    static const char* ops[] = {">=", "<=", "==", ">", "<"};
    bool parsed = false;
    for (const char* op : ops) {
      if (v.rfind(op, 0) == 0) {
        out.push_back({metric, op, trim(v.substr(std::string(op).size()))});
        parsed = true;
        break;
      }
    }
    if (!parsed || out.back().value.empty()) {
      throw ConfigError(c.id, k, "expected '<op> <value>' with op in >=, <=, ==, >, <");
    }
  }
  return out;
}

bool check_passes(const Check& check, const std::string& actual) {
  char* end = nullptr;
  const double a = std::strtod(actual.c_str(), &end);
  const bool a_numeric = end != actual.c_str() && *end == '\0';
  const double e = std::strtod(check.value.c_str(), &end);
  const bool e_numeric = end != check.value.c_str() && *end == '\0';
  if (!a_numeric || !e_numeric) {
    return check.op == "==" && actual == check.value;
  }
  if (check.op == ">=") return a >= e;
  if (check.op == "<=") return a <= e;
  if (check.op == ">") return a > e;
  if (check.op == "<") return a < e;
  return a == e;
}

}  // namespace

ConfigError::ConfigError(std::string experiment, std::string field,
                         const std::string& reason)
    : std::runtime_error("experiment '" + experiment + "': field '" + field +
                         "': " + reason),
      experiment_(std::move(experiment)),
      field_(std::move(field)) {}

double ExperimentResult::metric(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.metric == name) return r.numeric;
  }
  throw std::out_of_range("no metric '" + std::string(name) + "' in " + id);
}

const std::string& ExperimentResult::text(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.metric == name) return r.value;
  }
  throw std::out_of_range("no metric '" + std::string(name) + "' in " + id);
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::vector<ExperimentConfig> parse_config(std::string_view text,
                                           const fs::path& base_dir,
                                           std::string_view default_kind) {
  std::map<std::string, std::string> defaults;
  std::vector<ExperimentConfig> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError("", where, "malformed section header");
      ExperimentConfig c;
      c.id = trim(line.substr(1, line.size() - 2));
      if (c.id.find_first_of(" \t,/\\") != std::string::npos) {
        throw ConfigError(c.id, where, "experiment ids may not contain spaces, commas or slashes");
      }
      if (!seen.insert(c.id).second) throw ConfigError(c.id, where, "duplicate experiment section");
      c.base_dir = base_dir;
      out.push_back(std::move(c));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(out.empty() ? "" : out.back().id, where, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(out.empty() ? "" : out.back().id, where, "empty key");
    auto& target = out.empty() ? defaults : out.back().fields;
    if (!target.emplace(key, value).second) {
      throw ConfigError(out.empty() ? "" : out.back().id, key, "given twice");
    }
  }
  for (auto& c : out) {
    if (auto it = c.fields.find("kind"); it != c.fields.end()) {
      c.kind = it->second;
    } else if (auto d = defaults.find("kind"); d != defaults.end()) {
      c.kind = d->second;
    } else {
      c.kind = std::string(default_kind);
    }
    // Section keys are validated against the kind; inherited defaults that a
    // kind does not use are ignored.
    if (!c.kind.empty()) {
      const auto allowed = allowed_keys().find(c.kind);
      if (allowed == allowed_keys().end()) throw ConfigError(c.id, "kind", "unknown kind '" + c.kind + "'");
      for (const auto& [k, v] : c.fields) {
        if (k == "kind" || k.rfind("check.", 0) == 0) continue;
        if (allowed->second.count(k) == 0) throw ConfigError(c.id, k, "not a valid key for kind " + c.kind);
      }
      for (const auto& [k, v] : defaults) {
        if (allowed->second.count(k) != 0 && c.fields.count(k) == 0) c.fields.emplace(k, v);
      }
    } else {
      for (const auto& [k, v] : defaults) c.fields.emplace(k, v);
    }
    c.fields.erase("kind");
    checks_of(c);
  }
  return out;
}

std::vector<ExperimentConfig> load_config(const fs::path& path,
                                          std::string_view default_kind) {
  const auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_config(read_text(path), base, default_kind);
}

ExperimentResult evaluate_experiment(const ExperimentConfig& config,
                                     const RunOptions& options) {
  const auto allowed = allowed_keys().find(config.kind);
  if (allowed == allowed_keys().end()) {
    throw ConfigError(config.id, "kind", "unknown kind '" + config.kind + "'");
  }
  const Fields f(config);
  ExperimentResult result;
  result.id = config.id;
  result.kind = config.kind;
  Rows rows;
  if (config.kind == "dims") {
    run_dims(f, rows);
  } else {
    result.seed = options.seed.value_or(f.u64("seed", 0, 0));
    result.trials = trials_of(f);
    const RandomSeed seed(result.seed);
    if (config.kind == "stability") {
      run_stability(f, options, seed, result.trials, rows);
    } else if (config.kind == "listrep") {
      run_listrep(f, options, seed, result.trials, rows);
    } else if (config.kind == "boost") {
      run_boost(f, options, seed, result.trials, rows);
    } else if (config.kind == "reduction") {
      run_reduction(f, options, seed, result.trials, rows);
    } else {
      run_jumpprobe(f, options, seed, result.trials, rows);
    }
  }
  result.rows = rows.take();
  return result;
}

std::string format_csv(const ExperimentResult& result) {
  std::string out = "experiment_id,metric,value,trials,seed\n";
  for (const auto& r : result.rows) {
    out += result.id + "," + r.metric + "," + r.value + "," +
           std::to_string(result.trials) + "," + std::to_string(result.seed) + "\n";
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunManifest run_experiment(const ExperimentConfig& config,
                           const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto checks = checks_of(config);
  const ExperimentResult result = evaluate_experiment(config, options);

  RunManifest m;
  m.id = config.id;
  m.kind = config.kind;
  m.config_hash = config_hash(config, result.seed);
  m.tool_version = std::string(kToolVersion);
  m.checks = checks;
  m.out_dir = options.out_dir;

  const std::string csv_name = config.id + ".csv";
  write_file_atomic(options.out_dir / csv_name, format_csv(result));
  m.outputs.push_back(csv_name);

  if (config.kind == "dims") {
    std::string row = "vc,littlestone,threshold,bound_holds\n";
    row += result.text("vc") + "," + result.text("littlestone") + "," +
           result.text("threshold") + "," + result.text("bound_holds") + "\n";
    const std::string name = config.id + "_dims.csv";
    write_file_atomic(options.out_dir / name, row);
    m.outputs.push_back(name);
  }
  if (options.json) {
    json j;
    j["experiment_id"] = result.id;
    j["kind"] = result.kind;
    j["trials"] = result.trials;
    j["seed"] = result.seed;
    json metrics = json::object();
    for (const auto& r : result.rows) {
      if (std::isnan(r.numeric) || r.value == "true" || r.value == "false") {
        metrics[r.metric] = r.value == "true"    ? json(true)
                            : r.value == "false" ? json(false)
                                                 : json(r.value);
      } else {
        metrics[r.metric] = r.numeric;
      }
    }
    j["metrics"] = std::move(metrics);
    const std::string name = config.id + ".json";
    write_file_atomic(options.out_dir / name, j.dump(2) + "\n");
    m.outputs.push_back(name);
  }

  m.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start).count();
  json mj;
  mj["experiment_id"] = m.id;
  mj["kind"] = m.kind;
  mj["config_hash"] = m.config_hash;
  mj["tool_version"] = m.tool_version;
  mj["wall_seconds"] = m.wall_seconds;
  mj["outputs"] = m.outputs;
  json cj = json::array();
  for (const auto& c : m.checks) cj.push_back({{"metric", c.metric}, {"op", c.op}, {"value", c.value}});
  mj["checks"] = std::move(cj);
  write_file_atomic(options.out_dir / (config.id + ".manifest.json"), mj.dump(2) + "\n");
  return m;
}

RunManifest read_manifest(const fs::path& path) {
  const json j = json::parse(read_text(path));
  RunManifest m;
  m.id = j.at("experiment_id").get<std::string>();
  m.kind = j.at("kind").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.wall_seconds = j.at("wall_seconds").get<double>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  for (const auto& c : j.at("checks")) {
    m.checks.push_back({c.at("metric").get<std::string>(), c.at("op").get<std::string>(),
                        c.at("value").get<std::string>()});
  }
  m.out_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return m;
}

ReportSummary emit_report(std::span<const RunManifest> manifests,
                          const fs::path& out_dir) {
  if (manifests.empty()) throw std::invalid_argument("emit_report: no manifests");
  ReportSummary s;
  s.csv = "experiment_id,metric,value,trials,seed\n";
  std::ostringstream text;
  for (const auto& m : manifests) {
    const fs::path csv_path = m.out_dir / (m.id + ".csv");
    if (!fs::exists(csv_path)) {
      throw std::runtime_error("emit_report: missing output " + csv_path.string());
    }
    for (const auto& name : m.outputs) {
      if (!fs::exists(m.out_dir / name)) {
        throw std::runtime_error("emit_report: missing output " + (m.out_dir / name).string());
      }
    }
    const std::string body = read_text(csv_path);
    std::map<std::string, std::string> values;
    std::istringstream lines(body);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      s.csv += line + "\n";
      const auto parts = split(line, ',');
      if (parts.size() >= 3) values[parts[1]] = parts[2];
    }
    std::size_t failed = 0;
    std::ostringstream detail;
    for (const auto& c : m.checks) {
      const auto it = values.find(c.metric);
      const bool ok = it != values.end() && check_passes(c, it->second);
      failed += ok ? 0 : 1;
      detail << "  " << (ok ? "PASS " : "FAIL ") << c.metric << " = "
             << (it == values.end() ? "<missing>" : it->second) << " (want "
             << c.op << " " << c.value << ")\n";
    }
    s.checks += m.checks.size();
    s.failures += failed;
    text << m.id << " [" << m.kind << "]: " << m.checks.size() << " checks, "
         << failed << " failed\n"
         << detail.str();
  }
  text << "total: " << manifests.size() << " experiments, " << s.checks
       << " checks, " << s.failures << " failed\n";
  s.text = text.str();
  write_file_atomic(out_dir / "report.csv", s.csv);
  write_file_atomic(out_dir / "summary.txt", s.text);
  return s;
}

}  // namespace stablelab
