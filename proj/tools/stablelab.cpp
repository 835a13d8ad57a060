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

// stablelab command line front end.
//
//   stablelab <kind> --config FILE [--seed N] [--out DIR] [--json]
//   stablelab run --config FILE ...      every section, then a report
//   stablelab report [--config FILE] [--out DIR]
//
// Exit status: 0 success, 1 runtime failure, 2 invalid configuration or
// usage, 3 desk-scale limit exceeded. Errors go to stderr as one JSON line.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stablelab/dims.hpp"
#include "stablelab/experiment.hpp"

namespace fs = std::filesystem;
using stablelab::ConfigError;
using stablelab::ExperimentConfig;
using stablelab::RunManifest;
using stablelab::RunOptions;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool include_failures = false;
  bool json = false;
  std::string class_spec;  // dims only
};

int report_error(const std::string& kind, const std::string& message,
                 const std::string& experiment = "", const std::string& field = "") {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  if (!experiment.empty()) j["experiment"] = experiment;
  if (!field.empty()) j["field"] = field;
  std::cerr << j.dump() << "\n";
  return kind == "config" ? 2 : kind == "limit" ? 3 : 1;
}

fs::path out_dir_of(const Flags& f) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv(std::string(stablelab::kOutputDirEnv).c_str());
      env != nullptr && *env != '\0') {
    return env;
  }
  return "stablelab-out";
}

RunOptions options_of(const Flags& f) {
  RunOptions o;
  o.out_dir = out_dir_of(f);
  o.seed = f.seed;
  o.include_failures = f.include_failures;
  o.json = f.json;
  return o;
}

std::vector<ExperimentConfig> select(const std::string& kind, const Flags& f) {
  std::vector<ExperimentConfig> configs;
  if (kind == "dims" && !f.class_spec.empty()) {
    ExperimentConfig c;
    c.id = "dims";
    c.kind = "dims";
    c.fields["class"] = f.class_spec;
    c.base_dir = ".";
    configs.push_back(std::move(c));
    return configs;
  }
  if (f.config.empty()) throw ConfigError("", "--config", "a config file is required");
  for (auto& c : stablelab::load_config(f.config, kind == "run" ? "" : kind)) {
    if (c.kind.empty()) throw ConfigError(c.id, "kind", "is required for 'run'");
    if (kind == "run" || c.kind == kind) configs.push_back(std::move(c));
  }
  if (configs.empty()) {
    throw ConfigError("", "--config", "no experiment of kind '" + kind + "' in " + f.config);
  }
  return configs;
}

void print_summary(const stablelab::ReportSummary& s) { std::cout << s.text; }

int run_kind(const std::string& kind, const Flags& f) {
  const RunOptions options = options_of(f);
  std::vector<RunManifest> manifests;
  for (const auto& c : select(kind, f)) {
    manifests.push_back(stablelab::run_experiment(c, options));
    const auto& m = manifests.back();
    std::cout << m.id << " [" << m.kind << "] -> "
              << (options.out_dir / (m.id + ".csv")).string() << " ("
              << stablelab::format_real(m.wall_seconds) << " s)\n";
  }
  if (kind == "run") print_summary(stablelab::emit_report(manifests, options.out_dir));
  return 0;
}

int run_report(const Flags& f) {
  const fs::path dir = out_dir_of(f);
  std::vector<RunManifest> manifests;
  if (!f.config.empty()) {
    for (const auto& c : stablelab::load_config(f.config)) {
      const fs::path p = dir / (c.id + ".manifest.json");
      if (!fs::exists(p)) throw std::runtime_error("missing manifest " + p.string());
      manifests.push_back(stablelab::read_manifest(p));
    }
  } else if (fs::is_directory(dir)) {
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (name.size() > 14 && name.ends_with(".manifest.json")) paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) manifests.push_back(stablelab::read_manifest(p));
  }
  if (manifests.empty()) throw std::runtime_error("no manifests found in " + dir.string());
  print_summary(stablelab::emit_report(manifests, dir));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability and list-replicability experiments on finite classes"};
  app.set_version_flag("--version", std::string(stablelab::kToolVersion));
  app.require_subcommand(1);

  Flags flags;
  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Experiment config file");
    sub->add_option("--seed", flags.seed, "Master seed (overrides the config)");
    sub->add_option("--out", flags.out,
                    "Output directory (default $" + std::string(stablelab::kOutputDirEnv) +
                        " or ./stablelab-out)");
    sub->add_flag("--include-failures", flags.include_failures,
                  "Count failure-flagged outputs in list mass");
    sub->add_flag("--json", flags.json, "Also write JSON mirrors of each report");
  };

  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"dims", "VC, Littlestone and threshold dimensions of a class"},
      {"stability", "Empirical global stability of a learner"},
      {"listrep", "List replicability of the stable-to-list construction"},
      {"boost", "Out-of-list frequency of the majority booster"},
      {"reduction", "Class-error reduction wrapper"},
      {"jumpprobe", "Order-statistic jump probe"},
      {"run", "Run every experiment in a config and write the report"},
  };
  std::string chosen;
  for (const auto& [name, help] : kinds) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (name == "dims") {
      sub->add_option("--class", flags.class_spec,
                      "Class spec instead of a config, e.g. threshold(3) or file:H.txt");
    }
    sub->callback([&chosen, n = name] { chosen = n; });
  }
  auto* report = app.add_subcommand("report", "Combine outputs and evaluate checks");
  report->add_option("--config", flags.config, "Restrict to this config's experiments");
  report->add_option("--out", flags.out, "Directory holding the run outputs");
  report->callback([&chosen] { chosen = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    return chosen == "report" ? run_report(flags) : run_kind(chosen, flags);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), e.experiment(), e.field());
  } catch (const stablelab::LimitExceeded& e) {
    return report_error("limit", e.what());
  } catch (const std::exception& e) {
    return report_error("runtime", e.what());
  }
}
