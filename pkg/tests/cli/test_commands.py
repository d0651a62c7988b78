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
import pandas as pd
import pytest

from mlmcdrop import __version__
from mlmcdrop.cli.commands import *
from mlmcdrop.cli.commands import _jsonable
from mlmcdrop.cli.config import ConfigError, load_config
from mlmcdrop.layer.analytic import exact_boundary_layer

RESOURCES = os.path.join(os.path.dirname(__file__), "..", "resources")

BOUNDARY_LAYER = {"type": "analytic", "kind": "boundary_layer_noisefree", "epsilon": 0.1}


def make_config(**sections):
    document = {
        "evaluator": BOUNDARY_LAYER,
        "grid": {"n_points": 5},
        "ladder": {"ts": [4, 8, 16]},
        "allocation": {"ms": [3, 2, 2]},
        "seeds": [1, 2],
    }
    document.update(sections)
    return load_config(document, environ={})


def read_json(directory, name):
    with open(os.path.join(directory, name)) as fh:
        return json.load(fh)


def read_bytes(directory, name):
    with open(os.path.join(directory, name), "rb") as fh:
        return fh.read()


def test_jsonable():
    document = _jsonable(
        {"a": np.float64(np.nan), "b": np.arange(3), "c": (np.int64(4), float("inf")), 5: 1.5}
    )
    assert document == {"a": None, "b": [0, 1, 2], "c": [4, None], "5": 1.5}


def test_prepare_output_dir(tmp_path):
    config = make_config()
    plain = prepare_output_dir(config, "estimate", str(tmp_path / "plain"), timestamp=False)
    assert plain == str(tmp_path / "plain")
    assert read_json(plain, "config.json") == config.to_dict()

    stamped = prepare_output_dir(config, "estimate", str(tmp_path / "stamped"), timestamp=True)
    assert os.path.dirname(stamped) == str(tmp_path / "stamped")
    assert os.path.basename(stamped).startswith("estimate-")
    assert os.path.exists(os.path.join(stamped, "config.json"))


def test_cmd_ladder(tmp_path):
    config = make_config(ladder={"dyadic_levels": 3})
    envelope = cmd_ladder(config, str(tmp_path), timestamp=False)
    document = read_json(str(tmp_path), "ladder.json")
    assert document["ts"] == [2, 4, 8, 16]
    assert document["n_levels"] == 3
    assert document["increments"] == [2, 2, 4, 8]
    np.testing.assert_allclose(document["level_variances_mean"], [0.5, 0.25, 0.125, 0.0625])
    assert envelope.files == ["ladder.json", "result.json"]

    result = read_json(str(tmp_path), "result.json")
    assert result["command"] == "ladder"
    assert result["version"] == __version__
    assert result["wall_clock"] is None
    assert result["config"] == config.to_dict()


def test_cmd_allocate(tmp_path):
    config = load_config(os.path.join(RESOURCES, "config_analytic.json"), environ={})
    cmd_allocate(config, str(tmp_path), timestamp=False)
    document = read_json(str(tmp_path), "allocation.json")
    assert document["ladder"] == [4, 8, 16]
    assert document["target"] == "variance"
    assert document["kind"] == "coupled"
    assert document["budget"] == 1000
    np.testing.assert_allclose(document["continuous"], [102.81, 77.71, 34.76], atol=0.02)
    assert document["cost_continuous"]["coupled"] == pytest.approx(1000.0)
    assert document["cost_rounded"]["coupled"] <= 1000
    assert all(m >= 2 for m in document["rounded"])
    assert document["moments"] == "closure"
    np.testing.assert_allclose(document["predicted"]["variance_weights"], [2 / 3, 8 / 21, 16 / 105])
    np.testing.assert_allclose(document["predicted"]["mean_weights"], [1 / 4, 1 / 8, 1 / 16])


def test_cmd_allocate_uncoupled_variance(tmp_path):
    config = make_config(allocation={"budget": 1000, "target": "variance", "kind": "uncoupled"})
    cmd_allocate(config, str(tmp_path), timestamp=False)
    document = read_json(str(tmp_path), "allocation.json")
    np.testing.assert_allclose(document["continuous"], [82.64, 44.17, 19.76], atol=0.01)
    assert document["cost_rounded"]["uncoupled"] <= 1000


def test_cmd_estimate(tmp_path):
    config = make_config()
    envelope = cmd_estimate(config, str(tmp_path), timestamp=False)
    table = pd.read_csv(os.path.join(str(tmp_path), "estimates.csv"))
    assert list(table.columns[:6]) == ["x", "component", "y_mlmc", "v_mlmc", "s2_y", "s2_v"]
    assert list(table.columns[6:11]) == [
        "level_0_mean_dy",
        "level_0_var_dy",
        "level_0_mean_dv",
        "level_0_var_dv",
        "level_0_m",
    ]
    assert table.columns[-1] == "seed"
    assert "level_2_var_dv" in table.columns
    assert table["level_0_m"].tolist() == [3] * 10
    assert len(table) == 10
    assert (table["v_mlmc"] == 0).all()
    xs = table["x"].values[:5]
    np.testing.assert_allclose(table["y_mlmc"].values[:5], exact_boundary_layer(xs, 0.1), rtol=1e-14, atol=1e-15)

    assert envelope.costs == {
        "evals_coupled": 2 * (12 + 8 + 16),
        "evals_uncoupled_equivalent": 2 * (12 + 16 + 32),
        "forward_passes": 2 * (12 + 16 + 32),
        "point_evaluations": 5 * 2 * (12 + 16 + 32),
    }
    assert envelope.summary["allocation"] == [3, 2, 2]
    assert envelope.files == ["estimates.csv", "result.json"]


def test_cmd_estimate_is_reproducible(tmp_path):
    config = make_config(evaluator={"type": "analytic", "kind": "uniform_scaled_sine_pair", "delta": 0.3})
    first = cmd_estimate(config, str(tmp_path / "a"), timestamp=False)
    second = cmd_estimate(config, str(tmp_path / "b"), timestamp=False)
    for name in ("estimates.csv", "result.json", "config.json"):
        assert read_bytes(first.directory, name) == read_bytes(second.directory, name)


def test_cmd_estimate_with_budget(tmp_path):
    config = make_config(allocation={"budget": 200, "kind": "uncoupled"})
    envelope = cmd_estimate(config, str(tmp_path), timestamp=False)
    assert envelope.costs["evals_uncoupled_equivalent"] <= 2 * 200
    assert envelope.costs["forward_passes"] == envelope.costs["evals_uncoupled_equivalent"]


def test_cmd_estimate_timestamped(tmp_path):
    envelope = cmd_estimate(make_config(), str(tmp_path), timestamp=True)
    assert os.path.basename(envelope.directory).startswith("estimate-")
    assert isinstance(envelope.wall_clock, float)
    assert read_json(envelope.directory, "result.json")["wall_clock"] >= 0


def test_cmd_rate_study(tmp_path):
    config = make_config(
        evaluator={"type": "analytic", "kind": "gaussian_location"},
        grid={"points": [0.5]},
        study={"t_list": [4, 16, 64], "m_outer": 4},
    )
    envelope = cmd_rate_study(config, str(tmp_path), timestamp=False)
    with open(os.path.join(str(tmp_path), "rate.csv")) as fh:
        assert fh.readline().strip() == "seed,t,norm_s2_y,norm_s2_v"
    with open(os.path.join(str(tmp_path), "slopes.csv")) as fh:
        assert fh.readline().strip() == "target,slope,ci_lower,ci_upper,confidence"
    slopes = pd.read_csv(os.path.join(str(tmp_path), "slopes.csv"))
    assert slopes["target"].tolist() == ["s2_v", "s2_y"]
    assert not envelope.summary["degenerate"]
    assert envelope.costs["forward_passes"] == 2 * 4 * (4 + 16 + 64)


def test_cmd_rate_study_degenerate(tmp_path):
    config = make_config(study={"t_list": [4, 16, 64], "m_outer": 3})
    with pytest.warns(RuntimeWarning):
        envelope = cmd_rate_study(config, str(tmp_path), timestamp=False)
    assert envelope.summary["degenerate"]
    slopes = pd.read_csv(os.path.join(str(tmp_path), "slopes.csv"))
    assert len(slopes) == 0


def test_cmd_fixed_cost(tmp_path):
    config = make_config(allocation={"budget": 64, "kind": "uncoupled"})
    envelope = cmd_fixed_cost(config, str(tmp_path), timestamp=False)
    table = pd.read_csv(os.path.join(str(tmp_path), "surface.csv"))
    assert list(table.columns) == ["row", "m_0", "m_1", "m_2", "norm_s2_y", "norm_s2_v"]
    assert table["row"].tolist() == [
        "data",
        "data",
        "argmin_y",
        "argmin_y",
        "argmin_v",
        "argmin_v",
        "optimum_mean",
        "optimum_variance",
    ]
    assert table["norm_s2_y"].iloc[:2].tolist() == [0.0, 0.0]
    assert table["norm_s2_y"].iloc[6:].isna().all()
    assert envelope.summary["n_allocations"] == 2
    assert envelope.summary["argmin_y"] == [[4, 2, 2], [2, 3, 2]]


def test_cmd_fixed_cost_needs_budget(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        cmd_fixed_cost(make_config(), str(tmp_path), timestamp=False)
    assert excinfo.value.path == "allocation.budget"


def test_cmd_bands(tmp_path):
    config = make_config(
        evaluator={"type": "analytic", "kind": "uniform_scaled_sine_u", "delta": 0.2},
        study={"bands_t": 20},
    )
    envelope = cmd_bands(config, str(tmp_path), timestamp=False)
    bands = pd.read_csv(os.path.join(str(tmp_path), "bands.csv"))
    assert len(bands) == 5
    assert list(bands.columns) == [
        "x",
        "component",
        "y",
        "v",
        "lower_1sd",
        "upper_1sd",
        "lower_2sd",
        "upper_2sd",
        "reference",
    ]
    assert envelope.summary == {"t": 20, "seed": 1, "n_rows": 5}
    assert envelope.costs["forward_passes"] == 20


RERUN_CASES = {
    "estimate": (cmd_estimate, {}),
    "rate-study": (
        cmd_rate_study,
        dict(
            evaluator={"type": "analytic", "kind": "gaussian_location"},
            grid={"points": [0.5]},
            study={"t_list": [4, 16, 64], "m_outer": 4},
        ),
    ),
    "allocate": (
        cmd_allocate,
        dict(allocation={"budget": 1000, "target": "variance", "kind": "coupled"}),
    ),
    "fixed-cost": (
        cmd_fixed_cost,
        dict(
            evaluator={"type": "analytic", "kind": "uniform_scaled_sine_u", "delta": 0.2},
            allocation={"budget": 96, "kind": "uncoupled"},
        ),
    ),
    "ladder": (cmd_ladder, dict(ladder={"dyadic_levels": 3})),
    "bands": (
        cmd_bands,
        dict(
            evaluator={"type": "analytic", "kind": "uniform_scaled_sine_u", "delta": 0.2},
            study={"bands_t": 20},
        ),
    ),
}


@pytest.mark.parametrize("command", sorted(RERUN_CASES))
def test_commands_rerun_byte_identical(tmp_path, command):
    func, sections = RERUN_CASES[command]
    config = make_config(**sections)
    first = func(config, str(tmp_path / "a"), timestamp=False)
    second = func(config, str(tmp_path / "b"), timestamp=False)
    names = sorted(os.listdir(first.directory))
    assert names == sorted(os.listdir(second.directory))
    assert "config.json" in names and "result.json" in names
    for name in names:
        assert read_bytes(first.directory, name) == read_bytes(second.directory, name)


def test_cmd_fixed_cost_covers_every_allocation(tmp_path):
    budget = 120
    config = make_config(
        evaluator={"type": "analytic", "kind": "uniform_scaled_sine_u", "delta": 0.2},
        allocation={"budget": budget, "kind": "uncoupled"},
    )
    envelope = cmd_fixed_cost(config, str(tmp_path), timestamp=False)
    expected = sorted(
        (m0, m1, m2)
        for m0 in range(2, budget // 4 + 1)
        for m1 in range(2, budget // 8 + 1)
        for m2 in range(2, budget // 16 + 1)
        if 4 * m0 + 8 * m1 + 16 * m2 == budget
    )
    table = pd.read_csv(os.path.join(str(tmp_path), "surface.csv"))
    data = table[table["row"] == "data"]
    assert len(data) == len(expected) == envelope.summary["n_allocations"]
    assert sorted(map(tuple, data[["m_0", "m_1", "m_2"]].values.tolist())) == expected


def test_csv_floats_are_short(tmp_path):
    config = make_config(
        evaluator={"type": "analytic", "kind": "gaussian_location"},
        grid={"points": [0.5]},
        study={"t_list": [4, 16, 64], "m_outer": 4},
    )
    cmd_rate_study(config, str(tmp_path), timestamp=False)
    with open(os.path.join(str(tmp_path), "slopes.csv")) as fh:
        rows = fh.read().splitlines()[1:]
    assert len(rows) == 2
    assert all(row.endswith(",0.99") for row in rows)
