# Copyright 2026 The stablelab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import stablelab as sl


def test_threshold_dimensions():
    c = sl.threshold_class(3)
    assert len(c) == 4
    r = sl.dimension_report(c)
    assert r == {"vc": 1, "littlestone": 2, "threshold": 3, "bound_holds": True}


def test_cube_dimensions():
    c = sl.full_cube(3)
    assert sl.vc_dimension(c) == 3
    assert sl.littlestone_dimension(c) == 3


def test_hypothesis_roundtrip():
    h = sl.Hypothesis("0111")
    assert str(h) == "0111"
    assert h.label(0) is False and h.label(3) is True
    assert h == sl.Hypothesis("0111")
    with pytest.raises(IndexError):
        h.label(4)


def test_median_losses():
    d = sl.median_threshold_distribution(8)
    c = sl.threshold_class(8)
    assert sl.class_loss(c, d) == 0.0
    assert sl.population_loss(sl.Hypothesis("00011111"), d) == 0.0
    assert math.isclose(sl.population_loss(sl.Hypothesis("00000000"), d), 0.625)


def test_agnostic_rho_exact():
    assert sl.agnostic_rho(1, 2) == 1.0 / (2 * 8 * 16)


def test_stability_is_reproducible():
    c = sl.threshold_class(16)
    d = sl.median_threshold_distribution(16)
    learner = sl.random_threshold_stable(c, 0.2)
    a = sl.output_distribution(learner, d, learner.sample_complexity(), 200, 5)
    b = sl.output_distribution(learner, d, learner.sample_complexity(), 200, 5)
    assert a.counts() == b.counts()
    s = sl.empirical_stability(a, d, c, 0.2)
    assert s["found"]
    assert 0.0 < s["best_frequency"] <= 1.0


def test_evaluate_config_text():
    text = "[t]\nkind = dims\nclass = threshold(4)\n"
    (r,) = sl.evaluate_config(text)
    assert r["id"] == "t"
    assert r["metrics"]["littlestone"] == 2


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        sl.evaluate_config("[t]\nkind = dims\nbogus = 1\n")
