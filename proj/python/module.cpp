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

#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>

#include "stablelab/core.hpp"
#include "stablelab/dims.hpp"
#include "stablelab/experiment.hpp"
#include "stablelab/harness.hpp"
#include "stablelab/learners.hpp"

namespace py = pybind11;
using namespace stablelab;

namespace {

// Python passes seeds as plain integers.
RandomSeed S(std::uint64_t v) { return RandomSeed(v); }

py::dict stability_dict(const StabilityReport& r) {
  py::dict d;
  d["epsilon"] = r.epsilon;
  d["found"] = r.found;
  d["best_hypothesis"] = r.found ? py::object(py::cast(r.best_hypothesis)) : py::none();
  d["best_frequency"] = r.best_frequency;
  d["best_loss"] = r.best_loss;
  d["class_loss"] = r.class_loss;
  return d;
}

py::dict result_dict(const ExperimentResult& r) {
  py::dict metrics;
  for (const auto& row : r.rows) {
    if (row.value == "true" || row.value == "false") {
      metrics[py::str(row.metric)] = row.value == "true";
    } else if (std::isnan(row.numeric)) {
      metrics[py::str(row.metric)] = row.value;
    } else {
      metrics[py::str(row.metric)] = row.numeric;
    }
  }
  py::dict d;
  d["id"] = r.id;
  d["kind"] = r.kind;
  d["trials"] = r.trials;
  d["seed"] = r.seed;
  d["metrics"] = metrics;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-domain stability and list-replicability experiments";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<LimitExceeded>(m, "LimitExceeded", PyExc_RuntimeError);

  py::class_<Hypothesis>(m, "Hypothesis")
      .def(py::init([](const std::string& bits) { return Hypothesis::from_string(bits); }))
      .def_static("constant", [](std::size_t n, bool v) { return Hypothesis(n, v); })
      .def_property_readonly("domain_size", &Hypothesis::domain_size)
      .def("label", [](const Hypothesis& h, std::size_t i) {
        if (i >= h.domain_size()) throw py::index_error("point outside the domain");
        return h.label(i);
      })
      .def("flipped", &Hypothesis::flipped)
      .def("__str__", &Hypothesis::to_string)
      .def("__repr__", [](const Hypothesis& h) { return "Hypothesis('" + h.to_string() + "')"; })
      .def("__len__", &Hypothesis::domain_size)
      .def("__hash__", &Hypothesis::hash)
      .def(py::self == py::self)
      .def("__lt__", [](const Hypothesis& a, const Hypothesis& b) { return a < b; });

  py::class_<HypothesisClass>(m, "HypothesisClass")
      .def(py::init([](std::size_t n, const std::vector<std::string>& members) {
             std::vector<Hypothesis> hs;
             for (const auto& s : members) hs.push_back(Hypothesis::from_string(s));
             return HypothesisClass(n, std::move(hs));
           }),
           py::arg("domain_size"), py::arg("members"))
      .def_property_readonly("domain_size", &HypothesisClass::domain_size)
      .def("members", [](const HypothesisClass& c) {
        return std::vector<Hypothesis>(c.begin(), c.end());
      })
      .def("__len__", &HypothesisClass::size)
      .def("__contains__", &HypothesisClass::contains)
      .def("__str__", &format_class)
      .def(py::self == py::self);

  py::class_<FiniteDistribution>(m, "FiniteDistribution")
      .def(py::init([](std::size_t n, const std::vector<std::tuple<std::uint32_t, bool, double>>& atoms) {
             std::vector<FiniteDistribution::Atom> as;
             for (const auto& [x, y, p] : atoms) as.push_back({{DomainPoint{x}, y}, p});
             return FiniteDistribution(n, std::move(as));
           }),
           py::arg("domain_size"), py::arg("atoms"))
      .def_property_readonly("domain_size", &FiniteDistribution::domain_size)
      .def("atoms", [](const FiniteDistribution& d) {
        std::vector<std::tuple<std::uint32_t, bool, double>> out;
        for (const auto& a : d.atoms()) out.emplace_back(a.example.point.index, a.example.label, a.probability);
        return out;
      })
      .def("__str__", &format_distribution)
      .def(py::self == py::self);

  py::class_<Sample>(m, "Sample")
      .def(py::init([](const std::vector<std::pair<std::uint32_t, bool>>& examples) {
        std::vector<Example> ex;
        for (const auto& [x, y] : examples) ex.push_back({DomainPoint{x}, y});
        return Sample(ex);
      }))
      .def("__len__", &Sample::size)
      .def("entries", [](const Sample& s) {
        std::vector<std::tuple<std::uint32_t, bool, std::uint64_t>> out;
        for (const auto& e : s.entries()) out.emplace_back(e.example.point.index, e.example.label, e.count);
        return out;
      })
      .def(py::self == py::self);

  m.def("threshold_class", &threshold_class, py::arg("n"));
  m.def("threshold_class_on", &threshold_class_on, py::arg("n"), py::arg("domain_size"));
  m.def("full_cube", &full_cube, py::arg("n"));
  m.def("median_threshold_distribution", &median_threshold_distribution, py::arg("m"));
  m.def("parse_class", &parse_class);
  m.def("parse_distribution", &parse_distribution);
  m.def("population_loss", &population_loss);
  m.def("empirical_loss", &empirical_loss);
  m.def("class_loss", &class_loss);
  m.def("draw_sample", [](const FiniteDistribution& d, std::uint64_t n, std::uint64_t seed) {
    return draw_sample(d, n, S(seed));
  }, py::arg("dist"), py::arg("n"), py::arg("seed"));
  m.def("mix_with_point_mass", [](const FiniteDistribution& d, std::uint32_t x, bool b, double g) {
    return mix_with_point_mass(d, DomainPoint{x}, b, g);
  }, py::arg("dist"), py::arg("x_star"), py::arg("b_star"), py::arg("gamma_prime"));
  m.def("condition_on_consistency", &condition_on_consistency);

  m.def("vc_dimension", &vc_dimension);
  m.def("littlestone_dimension", &littlestone_dimension);
  m.def("threshold_dimension", &threshold_dimension);
  m.def("check_log_threshold_bound", &check_log_threshold_bound);
  m.def("dimension_report", [](const HypothesisClass& c) {
    const auto r = dimension_report(c);
    py::dict d;
    d["vc"] = r.vc;
    d["littlestone"] = r.littlestone;
    d["threshold"] = r.threshold;
    d["bound_holds"] = r.bound_holds;
    return d;
  });

  py::class_<Learner>(m, "Learner")
      .def_property_readonly("name", &Learner::name)
      .def_property_readonly("domain_size", &Learner::domain_size)
      .def_property_readonly("epsilon", &Learner::epsilon)
      .def("sample_complexity", [](const Learner& l, std::optional<double> eps) {
        return eps ? l.sample_complexity(*eps) : l.sample_complexity();
      }, py::arg("epsilon") = py::none())
      .def("with_sample_size", &Learner::with_sample_size)
      .def("run", [](const Learner& l, const Sample& s, std::uint64_t seed) {
        const auto out = l.run(s, S(seed));
        return py::make_tuple(out.hypothesis, out.failed, out.p_hat);
      }, py::arg("sample"), py::arg("seed"))
      .def("__call__", [](const Learner& l, const Sample& s, std::uint64_t seed) {
        return l(s, S(seed));
      });

  m.def("erm", &erm);
  m.def("erm_learner", &erm_learner, py::arg("hclass"), py::arg("n"));
  m.def("constant_learner", &constant_learner, py::arg("h"), py::arg("n") = 1);
  m.def("random_threshold_stable", &random_threshold_stable, py::arg("hclass"), py::arg("epsilon"));
  m.def("random_threshold_sample_complexity", &random_threshold_sample_complexity);
  m.def("majority_boost", &majority_boost, py::arg("base"), py::arg("k"));
  m.def("three_way_rule", &three_way_rule);
  m.def("class_error_wrapper", [](const Learner& l, std::uint32_t x, bool b, double g) {
    return class_error_wrapper(l, DomainPoint{x}, b, g);
  }, py::arg("inner"), py::arg("x_star"), py::arg("b_star"), py::arg("gamma_prime"));
  m.def("list_from_stable",
        [](const Learner& base, double rho, double epsilon, double delta, const HypothesisClass& c,
           std::optional<std::uint64_t> t, std::optional<std::uint64_t> n1) {
          const auto p = StabilityParams::make([rho](double) { return rho; }, epsilon, delta,
                                               base.sample_complexity(), c.size(), t, n1);
          return list_from_stable(base, p, c, delta);
        },
        py::arg("base"), py::arg("rho"), py::arg("epsilon"), py::arg("delta"), py::arg("hclass"),
        py::arg("t") = py::none(), py::arg("n1") = py::none(),
        "Base must already be configured at epsilon / 4.");
  m.def("agnostic_rho", &agnostic_rho, py::arg("d"), py::arg("n"));
  m.def("agnostic_log2_rho", &agnostic_log2_rho, py::arg("d"), py::arg("n"));

  py::class_<OutputFrequencyTable>(m, "OutputFrequencyTable")
      .def_property_readonly("trials", &OutputFrequencyTable::trials)
      .def_property_readonly("failures", &OutputFrequencyTable::failures)
      .def("counts", [](const OutputFrequencyTable& t) {
        py::dict d;
        for (const auto& [h, n] : t.counts()) d[py::str(h.to_string())] = n;
        return d;
      })
      .def("frequency", &OutputFrequencyTable::frequency)
      .def("max_frequency", &OutputFrequencyTable::max_frequency)
      .def("without_failures", &OutputFrequencyTable::without_failures);

  m.def("output_distribution",
        [](const Learner& l, const FiniteDistribution& d, std::uint64_t n, std::uint64_t trials,
           std::uint64_t seed) {
          py::gil_scoped_release release;
          return output_distribution(l, d, n, trials, S(seed));
        },
        py::arg("learner"), py::arg("dist"), py::arg("n"), py::arg("trials"), py::arg("seed"));
  m.def("empirical_stability", [](const OutputFrequencyTable& t, const FiniteDistribution& d,
                                  const HypothesisClass& c, double eps) {
    return stability_dict(empirical_stability(t, d, c, eps));
  });
  m.def("empirical_list", [](const OutputFrequencyTable& t, const FiniteDistribution& d,
                             const HypothesisClass& c, double eps, double delta) {
    const auto r = empirical_list(t, d, c, eps, delta);
    py::dict out;
    out["list"] = r.list;
    out["frequencies"] = r.frequencies;
    out["covered_mass"] = r.covered_mass;
    out["success"] = r.success;
    return out;
  });
  m.def("total_variation", &total_variation);
  m.def("out_of_list_frequency", &out_of_list_frequency);
  m.def("ord_statistic", [](const std::vector<std::uint32_t>& r, std::uint32_t x) {
    std::vector<DomainPoint> pts;
    for (auto v : r) pts.push_back(DomainPoint{v});
    return ord_statistic(pts, DomainPoint{x});
  });
  m.def("jump_probe",
        [](const Learner& l, std::uint64_t domain, std::uint64_t n, std::uint64_t trials,
           std::uint64_t seed) {
          JumpProbeReport r;
          {
            py::gil_scoped_release release;
            r = jump_probe(l, domain, n, trials, S(seed));
          }
          py::dict d;
          d["n"] = r.n;
          d["t0"] = r.t0;
          d["p"] = r.p;
          d["observations"] = r.observations;
          d["max_adjacent_gap"] = r.max_adjacent_gap;
          d["gap_location"] = r.gap_location;
          d["undersized_domain"] = r.undersized_domain;
          return d;
        },
        py::arg("learner"), py::arg("domain"), py::arg("n"), py::arg("trials"), py::arg("seed"));

  m.def("evaluate_config",
        [](const std::string& text, const std::string& base_dir, std::optional<std::uint64_t> seed) {
          RunOptions o;
          o.seed = seed;
          py::list out;
          for (const auto& c : parse_config(text, base_dir)) out.append(result_dict(evaluate_experiment(c, o)));
          return out;
        },
        py::arg("text"), py::arg("base_dir") = ".", py::arg("seed") = py::none(),
        "Runs every section of a config string and returns its metrics.");
  m.def("run_config",
        [](const std::filesystem::path& path, const std::filesystem::path& out_dir,
           std::optional<std::uint64_t> seed, bool include_failures, bool json) {
          RunOptions o;
          o.out_dir = out_dir;
          o.seed = seed;
          o.include_failures = include_failures;
          o.json = json;
          std::vector<RunManifest> ms;
          for (const auto& c : load_config(path)) ms.push_back(run_experiment(c, o));
          const auto s = emit_report(ms, out_dir);
          py::dict d;
          d["summary"] = s.text;
          d["checks"] = s.checks;
          d["failures"] = s.failures;
          return d;
        },
        py::arg("path"), py::arg("out_dir"), py::arg("seed") = py::none(),
        py::arg("include_failures") = false, py::arg("json") = false);
}
