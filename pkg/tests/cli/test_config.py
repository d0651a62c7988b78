# -*- coding: utf-8 -*-
#
# Copyright 2026 The mlmcdrop developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os

import numpy as np
import pytest

from mlmcdrop.cli.config import *
from mlmcdrop.core.schema import Allocation, MomentSet
from mlmcdrop.core.streams import expand_seeds
from mlmcdrop.layer.analytic import AnalyticEvaluator
from mlmcdrop.layer.mlp import DropoutMLP

RESOURCES = os.path.join(os.path.dirname(__file__), "..", "resources")

GAUSSIAN = {"type": "analytic", "kind": "gaussian_location"}


def config_with(**sections):
    document = {"evaluator": dict(GAUSSIAN)}
    document.update(sections)
    return document


def assert_config_error(document, path, environ=None):
    with pytest.raises(ConfigError) as excinfo:
        load_config(document, environ={} if environ is None else environ)
    assert excinfo.value.path == path


def test_defaults():
    config = load_config(config_with(), environ={})
    assert config.evaluator == {"type": "analytic", "kind": "gaussian_location", "sigma": 1.0, "mu": 0.0}
    assert config.grid == {"n_points": 101, "domain": [0.0, 1.0]}
    assert config.ladder is None
    assert config.allocation is None
    assert config.study == {
        "t_list": [10, 100, 1000, 10000],
        "m_outer": 10,
        "confidence": 0.99,
        "threshold": 0.1,
        "bands_t": 100,
        "workers": 1,
    }
    assert config.seeds == [0]
    assert config.output == {"directory": "results", "timestamp": True}
    assert "ladder" not in config.to_dict()
    assert len(config.grid_points()) == 101
    assert isinstance(config.build_evaluator(), AnalyticEvaluator)

    with pytest.raises(ConfigError):
        config.build_ladder()
    with pytest.raises(ConfigError):
        config.build_allocation()


@pytest.mark.parametrize("name", ["config_analytic.json", "config_mlp.json"])
def test_canonical_form_is_a_fixpoint(name):
    config = load_config(os.path.join(RESOURCES, name), environ={})
    document = config.to_dict()
    again = load_config(document, environ={})
    assert again == config
    assert again.to_dict() == document
    assert json.loads(json.dumps(document)) == document


def test_mlp_weights_resolve_relative_to_config():
    config = load_config(os.path.join(RESOURCES, "config_mlp.json"), environ={})
    expected = os.path.normpath(os.path.join(os.path.abspath(RESOURCES), "mlp_1_3_1.txt"))
    assert config.evaluator["weights"] == expected
    evaluator = config.build_evaluator()
    assert isinstance(evaluator, DropoutMLP)
    assert evaluator.spec.layer_widths == [1, 3, 1]
    assert config.grid_points() == [0.0, 0.25, 0.5]
    assert config.build_allocation() == Allocation([6, 4, 2])
    assert config.continuous_allocation() is None


def test_analytic_config():
    config = load_config(os.path.join(RESOURCES, "config_analytic.json"), environ={})
    assert config.evaluator == {"type": "analytic", "kind": "uniform_scaled_sine_u", "delta": 0.5}
    assert config.build_ladder().ts == (4, 8, 16)
    assert config.allocation == {
        "budget": 1000,
        "target": "variance",
        "kind": "coupled",
        "moments": "closure",
        "min_m": 2,
    }
    assert config.moments() == "closure"
    np.testing.assert_allclose(config.continuous_allocation().ms, (102.81, 77.71, 34.76), atol=0.02)
    alloc = config.build_allocation()
    assert alloc.is_integral
    assert config.seed_list() == [int(s) for s in expand_seeds(7, 3)]
    assert config.study["t_list"] == [4, 16, 64]
    assert config.study["m_outer"] == 4


def test_random_mlp_config():
    config = load_config(
        config_with(evaluator={"type": "random_mlp", "layer_widths": [1, 4, 1], "p_drop": 0.2}),
        environ={},
    )
    assert config.evaluator["weight_seed"] == 0
    assert config.evaluator["scale"] == 1.0
    assert config.evaluator["p_drop"] == 0.2
    a = config.build_evaluator()
    b = load_config(config.to_dict(), environ={}).build_evaluator()
    for wa, wb in zip(a.weights.weights, b.weights.weights):
        np.testing.assert_array_equal(wa, wb)


def test_explicit_moments():
    config = load_config(
        config_with(
            ladder={"ts": [4, 8, 16]},
            allocation={"budget": 500, "target": "variance", "moments": {"mu2": 1.0, "mu4": 9.0}},
        ),
        environ={},
    )
    assert config.moments() == MomentSet(0.0, 1.0, 9.0)
    assert config.continuous_allocation().target == "variance"


def test_ladder_forms():
    config = load_config(config_with(ladder={"dyadic_levels": 3}), environ={})
    assert config.build_ladder().ts == (2, 4, 8, 16)
    config = load_config(config_with(ladder={"t0": 3, "r": 1.2, "t_max": 9}), environ={})
    assert config.build_ladder().ts == (3, 5, 7, 9)


@pytest.mark.parametrize(
    "sections,path",
    [
        ({"extra": {}}, "config.extra"),
        ({"grid": {"npoints": 5}}, "grid.npoints"),
        ({"grid": {"points": [0.1], "n_points": 3}}, "grid.n_points"),
        ({"grid": {"points": []}}, "grid.points"),
        ({"grid": {"n_points": 5, "domain": [1, 0]}}, "grid.domain"),
        ({"ladder": {"t0": 4, "r": 2, "t_max": 3}}, "ladder"),
        ({"ladder": {"ts": [4, 5]}}, "ladder"),
        ({"ladder": {"t0": 4, "r": 2}}, "ladder.t_max"),
        ({"ladder": {"ts": [4, 8], "t0": 4}}, "ladder.t0"),
        ({"ladder": {"ts": [4, 8]}, "allocation": {"ms": [4, 2, 2]}}, "allocation.ms"),
        ({"allocation": {"ms": [4, 1]}}, "allocation.ms[1]"),
        ({"allocation": {"target": "mean"}}, "allocation.budget"),
        ({"allocation": {"budget": 100, "target": "median"}}, "allocation.target"),
        ({"allocation": {"budget": 100, "kind": "free"}}, "allocation.kind"),
        ({"allocation": {"budget": -1}}, "allocation.budget"),
        ({"allocation": {"budget": 100, "moments": {"mu2": 1.0, "mu4": 0.5}}}, "allocation.moments"),
        ({"study": {"t_lists": [4]}}, "study.t_lists"),
        ({"study": {"confidence": 1.5}}, "study.confidence"),
        ({"study": {"m_outer": 1}}, "study.m_outer"),
        ({"seeds": []}, "seeds"),
        ({"seeds": [1, -2]}, "seeds[1]"),
        ({"seeds": {"master": 1, "count": 0}}, "seeds.count"),
        ({"output": {"timestamp": "yes"}}, "output.timestamp"),
        ({"output": {"dir": "x"}}, "output.dir"),
    ],
)
def test_invalid_sections(sections, path):
    assert_config_error(config_with(**sections), path)


@pytest.mark.parametrize(
    "evaluator,path",
    [
        ({"type": "gp"}, "evaluator.type"),
        ({"type": "analytic", "kind": "gaussian_location", "foo": 1}, "evaluator.foo"),
        ({"type": "analytic", "kind": "cauchy"}, "evaluator"),
        ({"type": "analytic", "kind": "gaussian_location", "sigma": -1.0}, "evaluator"),
        ({"type": "mlp"}, "evaluator.weights"),
        ({"type": "random_mlp", "layer_widths": [1, 4, 1], "weight_seed": -1}, "evaluator.weight_seed"),
        ({"type": "random_mlp", "layer_widths": [1, 4, 1], "p_drop": 1.5}, "evaluator"),
    ],
)
def test_invalid_evaluator(evaluator, path):
    assert_config_error({"evaluator": evaluator}, path)


def test_missing_evaluator():
    assert_config_error({"grid": {"n_points": 3}}, "evaluator")


def test_seed_environment_override():
    config = load_config(config_with(seeds=[1, 2, 3]), environ={"MLMCDROP_SEED": "11"})
    assert config.seeds == {"master": 11, "count": 3}
    assert config.seed_list() == [int(s) for s in expand_seeds(11, 3)]

    config = load_config(config_with(seeds={"master": 1, "count": 1}), environ={"MLMCDROP_SEED": "5"})
    assert config.seed_list() == [5]

    assert_config_error(config_with(), "MLMCDROP_SEED", environ={"MLMCDROP_SEED": "abc"})
    assert_config_error(config_with(), "MLMCDROP_SEED", environ={"MLMCDROP_SEED": "-3"})


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        load_config(str(tmp_path / "missing.json"), environ={})
    assert excinfo.value.path == "config"

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError) as excinfo:
        load_config(str(broken), environ={})
    assert excinfo.value.path == "config"

    with pytest.raises(ConfigError):
        RunConfig(["not", "a", "dict"])
