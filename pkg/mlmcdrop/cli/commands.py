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

"""
The commands behind the ``mlmcdrop`` entry point.

Every command takes a :class:`RunConfig`, writes its artifacts into one
output directory together with a copy of the configuration, and returns a
:class:`ResultEnvelope` that is also written as ``result.json``.

"""

__all__ = [
    "ResultEnvelope",
    "prepare_output_dir",
    "cmd_estimate",
    "cmd_rate_study",
    "cmd_allocate",
    "cmd_fixed_cost",
    "cmd_ladder",
    "cmd_bands",
]

import datetime
import json
import logging
import os
import time

import numpy as np
import pandas as pd

from .. import globalvar
from ..allocation.optimal import cost, predicted_variance, target_weights
from ..analysis.studies import (
    confidence_bands,
    grid_norm,
    rate_study,
    variance_surface,
)
from ..core.schema import CostModelKind, MomentSet
from ..core.utils import format_float
from ..estimators.multilevel import level_variances, mlmc_estimate
from ..layer.evaluator import CountingEvaluator
from ..version import __version__
from .config import ConfigError

logger = logging.getLogger(__name__)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if not np.isfinite(value) else float(value)
    return value


def _write_json(path, document):
    with open(path, "w") as fh:
        json.dump(_jsonable(document), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, table):
    table.to_csv(path, index=False, float_format=format_float)


class ResultEnvelope:
    """
    Summary of one command run.

    Args:
        command (str): Command name.
        config (RunConfig): The configuration that was run.
        summary (dict): Command-specific summary values.
        costs (dict): Cost counters.
        files (list of str): Artifact file names in the output directory.
        wall_clock (float or None): Run time in seconds, or ``None`` for
            reproducible output.
    """

    def __init__(self, command, config, summary, costs=None, files=None, wall_clock=None):
        self.command = command
        self.config = config
        self.summary = summary
        self.costs = costs or {}
        self.files = list(files or [])
        self.wall_clock = wall_clock

    def to_dict(self):
        return {
            "command": self.command,
            "version": __version__,
            "schema_version": globalvar.CSV_SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "summary": self.summary,
            "costs": self.costs,
            "files": self.files,
            "wall_clock": self.wall_clock,
        }

    def write(self, directory):
        _write_json(os.path.join(directory, "result.json"), self.to_dict())


def prepare_output_dir(config, command, directory=None, timestamp=None):
    """
    Creates the output directory of a run and copies the configuration into
    it.

    With timestamps enabled the artifacts go to
    ``<directory>/<command>-<YYYYmmdd-HHMMSS>``, otherwise to ``directory``
    itself.

    Returns:
        str, the directory path
    """
    directory = config.output["directory"] if directory is None else directory
    timestamp = config.output["timestamp"] if timestamp is None else timestamp
    if timestamp:
        stamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
        directory = os.path.join(directory, "{}-{}".format(command, stamp))
    os.makedirs(directory, exist_ok=True)
    _write_json(os.path.join(directory, "config.json"), config.to_dict())
    logger.info("writing %s artifacts to %s", command, directory)
    return directory


class _Run:
    def __init__(self, config, command, directory, timestamp):
        self.config = config
        self.command = command
        self.timestamp = config.output["timestamp"] if timestamp is None else timestamp
        self.directory = prepare_output_dir(config, command, directory, self.timestamp)
        self.files = []
        self.started = time.perf_counter()

    def csv(self, name, table):
        _write_csv(os.path.join(self.directory, name), table)
        self.files.append(name)

    def json(self, name, document):
        _write_json(os.path.join(self.directory, name), document)
        self.files.append(name)

    def finish(self, summary, costs=None):
        wall_clock = time.perf_counter() - self.started if self.timestamp else None
        envelope = ResultEnvelope(
            self.command, self.config, summary, costs, self.files + ["result.json"], wall_clock
        )
        envelope.write(self.directory)
        envelope.directory = self.directory
        return envelope


def _estimate_rows(seed, xs, estimate):
    n_points, n_outputs = np.shape(estimate.y_mlmc)
    columns = {
        "x": np.repeat(xs, n_outputs),
        "component": np.tile(np.arange(n_outputs), n_points),
        "y_mlmc": np.reshape(estimate.y_mlmc, -1),
        "v_mlmc": np.reshape(estimate.v_mlmc, -1),
        "s2_y": np.reshape(estimate.s2_y, -1),
        "s2_v": np.reshape(estimate.s2_v, -1),
    }
    for stats in estimate.level_stats:
        prefix = "level_{}_".format(stats.level)
        columns[prefix + "mean_dy"] = np.reshape(stats.mean_dy, -1)
        columns[prefix + "var_dy"] = np.reshape(stats.var_dy, -1)
        columns[prefix + "mean_dv"] = np.reshape(stats.mean_dv, -1)
        columns[prefix + "var_dv"] = np.reshape(stats.var_dv, -1)
        columns[prefix + "m"] = np.full(n_points * n_outputs, stats.m, dtype=np.int64)
    columns["seed"] = np.full(n_points * n_outputs, seed, dtype=object)
    return pd.DataFrame(columns)


def cmd_estimate(config, directory=None, timestamp=None):
    """
    Runs the configured MLMC estimator at every grid point for every seed.

    Writes ``estimates.csv`` with one row per seed, point and output component.
    """
    run = _Run(config, "estimate", directory, timestamp)
    evaluator = CountingEvaluator(config.build_evaluator())
    xs = np.asarray(config.grid_points(), dtype=np.float64)
    ladder = config.build_ladder()
    alloc = config.build_allocation(ladder)
    workers = config.study["workers"]

    tables, norms = [], []
    coupled = uncoupled = 0
    for seed in config.seed_list():
        estimate = mlmc_estimate(evaluator, xs, ladder, alloc, seed, workers=workers)
        tables.append(_estimate_rows(seed, xs, estimate))
        norms.append(
            {
                "seed": seed,
                "norm_s2_y": grid_norm(xs, estimate.s2_y),
                "norm_s2_v": grid_norm(xs, estimate.s2_v),
            }
        )
        coupled += estimate.evals_coupled
        uncoupled += estimate.evals_uncoupled_equivalent

    run.csv("estimates.csv", pd.concat(tables, ignore_index=True))
    summary = {
        "ladder": list(ladder.ts),
        "allocation": alloc.ms.tolist(),
        "norms": norms,
        "mean_norm_s2_y": float(np.mean([n["norm_s2_y"] for n in norms])),
        "mean_norm_s2_v": float(np.mean([n["norm_s2_v"] for n in norms])),
    }
    costs = {
        "evals_coupled": coupled,
        "evals_uncoupled_equivalent": uncoupled,
        "forward_passes": evaluator.passes,
        "point_evaluations": evaluator.point_evaluations,
    }
    return run.finish(summary, costs)


def cmd_rate_study(config, directory=None, timestamp=None):
    """
    Sweeps the configured inner fidelities and fits the log-log slopes.

    Writes ``rate.csv`` and ``slopes.csv``.
    """
    run = _Run(config, "rate-study", directory, timestamp)
    evaluator = CountingEvaluator(config.build_evaluator())
    xs = np.asarray(config.grid_points(), dtype=np.float64)
    study = config.study

    result = rate_study(
        evaluator,
        xs,
        study["t_list"],
        study["m_outer"],
        config.seed_list(),
        confidence=study["confidence"],
        workers=study["workers"],
    )
    run.csv("rate.csv", result.table)
    slopes = pd.DataFrame(
        [
            {
                "target": name,
                "slope": fit.slope,
                "ci_lower": fit.ci_lower,
                "ci_upper": fit.ci_upper,
                "confidence": fit.confidence,
            }
            for name, fit in sorted(result.fits.items())
        ],
        columns=["target", "slope", "ci_lower", "ci_upper", "confidence"],
    )
    run.csv("slopes.csv", slopes)

    summary = {
        "degenerate": result.degenerate,
        "slopes": {name: fit._asdict() for name, fit in result.fits.items()},
    }
    return run.finish(summary, {"forward_passes": evaluator.passes})


def _priced(ladder, ms):
    return {kind.value: cost(ladder, ms, kind) for kind in CostModelKind}


def cmd_allocate(config, directory=None, timestamp=None):
    """
    Continuous and rounded optimal allocations for the configured budget.

    Writes ``allocation.json``.
    """
    run = _Run(config, "allocate", directory, timestamp)
    ladder = config.build_ladder()
    continuous = config.continuous_allocation(ladder)
    alloc = config.build_allocation(ladder)

    moments = config.moments()
    mean_weights = target_weights(ladder, "mean")
    variance_weights = target_weights(ladder, "variance", moments)
    moment_set = MomentSet.closure(1.0) if moments == "closure" else moments

    document = {
        "ladder": list(ladder.ts),
        "target": None if continuous is None else continuous.target,
        "kind": alloc.kind.value,
        "budget": config.allocation.get("budget"),
        "continuous": None if continuous is None else continuous.ms.tolist(),
        "rounded": alloc.ms.tolist(),
        "cost_continuous": None if continuous is None else _priced(ladder, continuous.ms),
        "cost_rounded": _priced(ladder, alloc.ms),
        "moments": "closure" if moments == "closure" else {"mu2": moments.mu2, "mu4": moments.mu4},
        "predicted": {
            "mean_weights": mean_weights.tolist(),
            "variance_weights": variance_weights.tolist(),
            "e_s2_y": float(predicted_variance(ladder, alloc.ms, mean_weights) * moment_set.mu2),
            "e_s2_v": float(predicted_variance(ladder, alloc.ms, variance_weights)),
        },
    }
    run.json("allocation.json", document)
    return run.finish(document)


def cmd_fixed_cost(config, directory=None, timestamp=None):
    """
    Seed-averaged variance surface over every allocation of the budget.

    Writes ``surface.csv``: data rows, then rows marking the empirical
    argmins and the continuous optima.
    """
    run = _Run(config, "fixed-cost", directory, timestamp)
    evaluator = CountingEvaluator(config.build_evaluator())
    xs = np.asarray(config.grid_points(), dtype=np.float64)
    ladder = config.build_ladder()
    section = config.allocation or {}
    if "budget" not in section:
        raise ConfigError("allocation.budget", "the fixed-cost study needs a budget")

    surface = variance_surface(
        evaluator,
        xs,
        ladder,
        section["budget"],
        section["kind"],
        config.seed_list(),
        min_m=section["min_m"],
        workers=config.study["workers"],
    )
    m_columns = ["m_{}".format(level) for level in range(len(ladder))]

    def marked(rows, label):
        rows = rows.copy()
        rows.insert(0, "row", label)
        return rows

    optima = pd.DataFrame(
        [surface.optimum_mean.ms, surface.optimum_variance.ms], columns=m_columns
    )
    optima["norm_s2_y"] = np.nan
    optima["norm_s2_v"] = np.nan
    optima.insert(0, "row", ["optimum_mean", "optimum_variance"])

    table = pd.concat(
        [
            marked(surface.table, "data"),
            marked(surface.argmin_y, "argmin_y"),
            marked(surface.argmin_v, "argmin_v"),
            optima,
        ],
        ignore_index=True,
    )
    run.csv("surface.csv", table)

    summary = {
        "n_allocations": len(surface.table),
        "argmin_y": surface.argmin_y[m_columns].values.tolist(),
        "argmin_v": surface.argmin_v[m_columns].values.tolist(),
        "optimum_mean": surface.optimum_mean.ms.tolist(),
        "optimum_variance": surface.optimum_variance.ms.tolist(),
    }
    return run.finish(summary, {"forward_passes": evaluator.passes})


def cmd_ladder(config, directory=None, timestamp=None):
    """
    The configured ladder with its per-level increment variances under the
    zero-excess-kurtosis closure with unit variance.

    Writes ``ladder.json``.
    """
    run = _Run(config, "ladder", directory, timestamp)
    ladder = config.build_ladder()
    closure = MomentSet.closure(1.0)
    document = {
        "ts": list(ladder.ts),
        "n_levels": ladder.n_levels,
        "increments": ladder.increments().tolist(),
        "level_variances_mean": level_variances(closure, ladder, "mean").tolist(),
        "level_variances_variance": level_variances(closure, ladder, "variance").tolist(),
    }
    run.json("ladder.json", document)
    return run.finish(document)


def cmd_bands(config, directory=None, timestamp=None):
    """
    Single-fidelity mean with one and two standard deviation bands over the
    grid, for the first configured seed.

    Writes ``bands.csv``.
    """
    run = _Run(config, "bands", directory, timestamp)
    evaluator = CountingEvaluator(config.build_evaluator())
    xs = np.asarray(config.grid_points(), dtype=np.float64)
    seeds = config.seed_list()
    if len(seeds) > 1:
        logger.info("cmd_bands: using the first of %d seeds", len(seeds))

    bands = confidence_bands(evaluator, xs, config.study["bands_t"], seeds[0])
    run.csv("bands.csv", bands)
    summary = {"t": config.study["bands_t"], "seed": seeds[0], "n_rows": len(bands)}
    return run.finish(summary, {"forward_passes": evaluator.passes})
