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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace stablelab {
namespace {

namespace fs = std::filesystem;

const fs::path kData = STABLELAB_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stablelab-exp-" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig one(std::string_view text) {
  auto cs = parse_config(text, kData);
  EXPECT_EQ(cs.size(), 1u);
  return cs.at(0);
}

std::string error_field(std::string_view text, const RunOptions& o = {}) {
  try {
    evaluate_experiment(one(text), o);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(ParseConfig, SectionsDefaultsAndComments) {
  const auto cs = parse_config(
      "# comment\nseed = 5\ntrials = 10\n\n[a]\nkind = dims\nclass = threshold(3)\n"
      "[b]\nkind = stability\nclass = threshold(3)\ndistribution = median(3)\nepsilon = 0.3\n"
      "trials = 20\n",
      ".");
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].id, "a");
  EXPECT_EQ(cs[0].kind, "dims");
  // dims takes no seed or trials, so the defaults are not inherited.
  EXPECT_EQ(cs[0].fields.count("seed"), 0u);
  EXPECT_EQ(cs[1].fields.at("seed"), "5");
  EXPECT_EQ(cs[1].fields.at("trials"), "20");
}

TEST(ParseConfig, DefaultKindApplies) {
  const auto cs = parse_config("[x]\nclass = cube(2)\n", ".", "dims");
  EXPECT_EQ(cs.at(0).kind, "dims");
  EXPECT_THROW(parse_config("[x]\nclass = cube(2)\ntrials = 3\n", ".", "dims"), ConfigError);
}

TEST(ParseConfig, NamedDiagnostics) {
  auto field_of = [](std::string_view text) {
    try {
      parse_config(text, ".");
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(field_of("[a]\nkind = dims\nbogus = 1\n"), "bogus");
  EXPECT_EQ(field_of("[a]\nkind = nope\n"), "kind");
  EXPECT_EQ(field_of("[a]\nkind = dims\nclass = cube(2)\nclass = cube(3)\n"), "class");
  EXPECT_EQ(field_of("[a]\nkind = dims\n[a]\nkind = dims\n"), "line 3");
  EXPECT_EQ(field_of("[a]\nkind = dims\njust words\n"), "line 3");
  EXPECT_EQ(field_of("[a]\nkind = dims\ncheck.vc = about 3\n"), "check.vc");
  EXPECT_EQ(field_of("[a b]\n"), "line 1");
}

TEST(Evaluate, DimsOnThresholdThree) {
  const auto r = evaluate_experiment(one("[d]\nkind = dims\nclass = threshold(3)\n"), {});
  EXPECT_EQ(r.metric("vc"), 1);
  EXPECT_EQ(r.metric("littlestone"), 2);
  EXPECT_EQ(r.metric("threshold"), 3);
  EXPECT_EQ(r.text("bound_holds"), "true");
  const auto from_file = evaluate_experiment(one("[d]\nkind = dims\nclass = file:threshold3.txt\n"), {});
  EXPECT_EQ(from_file.metric("threshold"), 3);
  EXPECT_THROW(r.metric("missing"), std::out_of_range);
}

TEST(Evaluate, ValidationErrorsNameTheField) {
  const std::string base = "[s]\nkind = stability\nclass = threshold(3)\ndistribution = median(3)\nepsilon = 0.3\n";
  EXPECT_EQ(error_field(base + "trials = 0\n"), "trials");
  EXPECT_EQ(error_field(base + "trials = many\n"), "trials");
  EXPECT_EQ(error_field(base), "trials");
  EXPECT_EQ(error_field("[s]\nkind = stability\nclass = threshold(3)\ndistribution = median(3)\nepsilon = 1.5\ntrials = 3\n"), "epsilon");
  EXPECT_EQ(error_field("[s]\nkind = stability\nclass = triangle(3)\ndistribution = median(3)\nepsilon = 0.3\ntrials = 3\n"), "class");
  EXPECT_EQ(error_field("[s]\nkind = stability\nclass = threshold(3)\ndistribution = median(1)\nepsilon = 0.3\ntrials = 3\n"), "distribution");
  EXPECT_EQ(error_field("[s]\nkind = stability\nclass = file:nope.txt\ndistribution = median(3)\nepsilon = 0.3\ntrials = 3\n"), "class");
  EXPECT_EQ(error_field(base + "trials = 3\nlearner = magic\n"), "learner");
  EXPECT_EQ(error_field(base + "trials = 3\nthree_way = maybe\n"), "three_way");
  EXPECT_EQ(error_field("[r]\nkind = reduction\nclass = cube(2)\ndistribution = median(2)\nepsilon = 0.2\nn = 3\ngamma_prime = 0\nx_star = 0\nb_star = 1\ntrials = 5\n"), "gamma_prime");
  EXPECT_EQ(error_field("[j]\nkind = jumpprobe\nclass = threshold(16)\nepsilon = 0.1\nn = 5\ntrials = 5\n"), "n");
  EXPECT_EQ(error_field("[b]\nkind = boost\nclass = threshold(3)\ndistribution = median(3)\nepsilon = 0.2\nn = 2\nk = 1, 0\ntrials = 5\n"), "k");
}

TEST(Evaluate, DistributionSpecs) {
  const std::string head = "[s]\nkind = stability\nclass = threshold(3)\nlearner = erm\nepsilon = 0.3\nn = 20\ntrials = 5\n";
  const auto a = evaluate_experiment(one(head + "distribution = file:skewed3.txt\n"), {});
  EXPECT_EQ(a.metric("class_loss"), 0.0);
  const auto b = evaluate_experiment(one(head + "distribution = table(3; 0:0=0.5, 1:0=0.25, 2:1=0.25)\n"), {});
  EXPECT_EQ(b.text("best_hypothesis"), "001");
  const auto c = evaluate_experiment(one(head + "distribution = uniform(3; 0:1, 2:0)\n"), {});
  EXPECT_NEAR(c.metric("class_loss"), 0.5, 1e-12);
}

TEST(Evaluate, SeedOverrideAndDeterminism) {
  const auto cfg = one("[s]\nkind = stability\nclass = threshold(5)\ndistribution = median(5)\nepsilon = 0.3\nn = 6\ntrials = 200\nseed = 4\n");
  const auto a = evaluate_experiment(cfg, {});
  EXPECT_EQ(a.seed, 4u);
  EXPECT_EQ(format_csv(a), format_csv(evaluate_experiment(cfg, {})));
  RunOptions o;
  o.seed = 99;
  EXPECT_EQ(evaluate_experiment(cfg, o).seed, 99u);
}

TEST(RunExperiment, WritesCsvManifestAndJson) {
  const auto dir = fresh_dir("run");
  RunOptions o;
  o.out_dir = dir;
  o.json = true;
  const auto cfg = one("[d]\nkind = dims\nclass = threshold(3)\ncheck.vc = == 1\n");
  const auto m = run_experiment(cfg, o);
  EXPECT_EQ(slurp(dir / "d.csv"),
            "experiment_id,metric,value,trials,seed\n"
            "d,vc,1,0,0\nd,littlestone,2,0,0\nd,threshold,3,0,0\nd,bound_holds,true,0,0\n");
  EXPECT_EQ(slurp(dir / "d_dims.csv"), "vc,littlestone,threshold,bound_holds\n1,2,3,true\n");
  const auto j = nlohmann::json::parse(slurp(dir / "d.json"));
  EXPECT_EQ(j["metrics"]["littlestone"], 2);
  EXPECT_EQ(j["metrics"]["bound_holds"], true);
  const auto back = read_manifest(dir / "d.manifest.json");
  EXPECT_EQ(back.config_hash, m.config_hash);
  EXPECT_EQ(back.tool_version, kToolVersion);
  EXPECT_EQ(back.outputs, m.outputs);
  ASSERT_EQ(back.checks.size(), 1u);
  EXPECT_EQ(back.checks[0].metric, "vc");
  EXPECT_FALSE(fs::exists(dir / "d.csv.tmp"));
}

TEST(RunExperiment, RerunIsByteIdentical) {
  const auto cfg = one("[s]\nkind = stability\nclass = threshold(6)\ndistribution = median(6)\nepsilon = 0.25\nn = 9\ntrials = 300\nseed = 12\nthree_way = true\n");
  RunOptions a, b;
  a.out_dir = fresh_dir("a");
  b.out_dir = fresh_dir("b");
  const auto ma = run_experiment(cfg, a);
  const auto mb = run_experiment(cfg, b);
  EXPECT_EQ(slurp(a.out_dir / "s.csv"), slurp(b.out_dir / "s.csv"));
  EXPECT_EQ(ma.config_hash, mb.config_hash);
}

TEST(EmitReport, PassFailAndErrors) {
  const auto dir = fresh_dir("report");
  RunOptions o;
  o.out_dir = dir;
  const auto cs = parse_config(
      "[good]\nkind = dims\nclass = threshold(3)\ncheck.vc = == 1\ncheck.bound_holds = == true\n"
      "[bad]\nkind = dims\nclass = cube(2)\ncheck.vc = < 2\ncheck.nothing = >= 0\n",
      ".");
  std::vector<RunManifest> ms;
  for (const auto& c : cs) ms.push_back(run_experiment(c, o));

  const auto single = emit_report(std::span(ms).first(1), dir);
  EXPECT_EQ(single.checks, 2u);
  EXPECT_EQ(single.failures, 0u);

  const auto both = emit_report(ms, dir);
  EXPECT_EQ(both.checks, 4u);
  EXPECT_EQ(both.failures, 2u);
  EXPECT_NE(both.text.find("2 failed"), std::string::npos);
  EXPECT_EQ(slurp(dir / "report.csv"), both.csv);
  EXPECT_EQ(both.csv.rfind("experiment_id,metric,value,trials,seed\n", 0), 0u);
  EXPECT_EQ(std::count(both.csv.begin(), both.csv.end(), '\n'), 9);

  EXPECT_THROW(emit_report({}, dir), std::invalid_argument);
  fs::remove(dir / "bad.csv");
  EXPECT_THROW(emit_report(ms, dir), std::runtime_error);
}

TEST(FormatReal, TwelveSignificantDigits) {
  EXPECT_EQ(format_real(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_real(54511313.0), "54511313");
  EXPECT_EQ(format_real(0.0625), "0.0625");
}

}  // namespace
}  // namespace stablelab
