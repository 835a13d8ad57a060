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

// Config-driven experiment runner.
//
// Config files are flat `key = value` text. Keys before the first
// `[section]` header are defaults for every section; each section is one
// experiment whose id is the section name. See README.md for the key list.

#ifndef STABLELAB_EXPERIMENT_HPP_
#define STABLELAB_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stablelab {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kOutputDirEnv = "STABLELAB_OUT";

/// Invalid configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string experiment, std::string field, const std::string& reason);

  const std::string& experiment() const { return experiment_; }
  const std::string& field() const { return field_; }

 private:
  std::string experiment_;
  std::string field_;
};

struct ExperimentConfig {
  std::string id;
  std::string kind;  // dims | stability | listrep | boost | reduction | jumpprobe
  std::map<std::string, std::string> fields;
  std::filesystem::path base_dir;  // relative file specs resolve here
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool include_failures = false;
  bool json = false;
};

struct Check {
  std::string metric;
  std::string op;  // >=, <=, >, <, ==
  std::string value;
};

struct MetricRow {
  std::string metric;
  std::string value;  // formatted for CSV
  double numeric = 0.0;
};

struct ExperimentResult {
  std::string id;
  std::string kind;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<MetricRow> rows;

  /// Numeric value of a metric; throws std::out_of_range when absent.
  double metric(std::string_view name) const;
  const std::string& text(std::string_view name) const;
};

struct RunManifest {
  std::string id;
  std::string kind;
  std::string config_hash;
  std::string tool_version;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;  // file names inside out_dir
  std::vector<Check> checks;
  std::filesystem::path out_dir;
};

struct ReportSummary {
  std::string text;
  std::string csv;
  std::size_t checks = 0;
  std::size_t failures = 0;
};

/// Parses config text. Unknown kinds, duplicate sections and malformed
/// lines raise ConfigError. Sections without a `kind` take default_kind.
std::vector<ExperimentConfig> parse_config(std::string_view text,
                                           const std::filesystem::path& base_dir,
                                           std::string_view default_kind = {});
std::vector<ExperimentConfig> load_config(const std::filesystem::path& path,
                                          std::string_view default_kind = {});

/// Runs one experiment and returns its metrics without touching the disk.
ExperimentResult evaluate_experiment(const ExperimentConfig& config,
                                     const RunOptions& options);

/// Runs one experiment, writes <id>.csv (plus <id>_dims.csv for dims and
/// <id>.json with options.json) and <id>.manifest.json into out_dir.
RunManifest run_experiment(const ExperimentConfig& config,
                           const RunOptions& options);

/// CSV with header experiment_id,metric,value,trials,seed.
std::string format_csv(const ExperimentResult& result);

/// Concatenates the per-experiment CSVs under one header and evaluates each
/// manifest's checks against them. Writes report.csv and summary.txt into
/// out_dir.
ReportSummary emit_report(std::span<const RunManifest> manifests,
                          const std::filesystem::path& out_dir);

RunManifest read_manifest(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

/// printf("%.12g").
std::string format_real(double value);

}  // namespace stablelab

#endif  // STABLELAB_EXPERIMENT_HPP_
