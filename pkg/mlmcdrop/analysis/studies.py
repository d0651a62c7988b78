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
Grid studies built on the estimators: variance rates in the inner fidelity,
fixed-cost variance surfaces, confidence bands and matched-cost comparisons.

Every study takes a list of seeds and reports per-seed as well as
seed-averaged values. Multi-output evaluators are summarised by the sum of
the per-component L1 norms.

"""

__all__ = [
    "RateStudy",
    "VarianceSurface",
    "MatchedCostComparison",
    "grid_norm",
    "rate_study",
    "variance_surface",
    "confidence_bands",
    "matched_cost_comparison",
]

import logging
import warnings
from collections import namedtuple

import numpy as np
import pandas as pd

from .. import globalvar
from ..allocation.optimal import (
    InfeasibleBudgetError,
    allocate_mean,
    allocate_variance,
    cost,
    enumerate_fixed_cost,
)
from ..core.schema import Allocation, CostModelKind, FidelityLadder, MomentSet
from ..core.streams import StreamKey
from ..core.utils import is_real_iterable, parallel_map, require_integer
from ..estimators.multilevel import mlmc_estimate, theoretical_mlmc_variances
from ..estimators.single_fidelity import (
    _check_evaluator,
    estimate_single,
    outer_replicate,
    theoretical_single_variances,
)
from ..layer.analytic import (
    AnalyticEvaluator,
    AnalyticKind,
    analytic_moments,
    exact_boundary_layer,
)
from ..layer.evaluator import CountingEvaluator
from .norms import GridFunction, l1_norm
from .regression import loglog_slope_fit

logger = logging.getLogger(__name__)

RateStudy = namedtuple("RateStudy", "table fits degenerate")
RateStudy.__doc__ = """
Result of :func:`rate_study`.

``table`` has columns ``seed, t, norm_s2_y, norm_s2_v``; the seed-averaged
rows carry ``seed == "mean"``. ``fits`` maps ``"s2_y"`` and ``"s2_v"`` to
:class:`SlopeFit` (empty when ``degenerate``).
"""

VarianceSurface = namedtuple(
    "VarianceSurface", "table per_seed argmin_y argmin_v optimum_mean optimum_variance"
)
VarianceSurface.__doc__ = """
Result of :func:`variance_surface`.

``table`` holds one seed-averaged row per feasible allocation with columns
``m_0, ..., m_L, norm_s2_y, norm_s2_v``; ``argmin_y`` and ``argmin_v`` are the
rows attaining the minimum. ``optimum_mean`` and ``optimum_variance`` are the
continuous Lagrangian allocations for the same budget.
"""

MatchedCostComparison = namedtuple(
    "MatchedCostComparison",
    "mlmc_norm_s2_y mlmc_norm_s2_v single_norm_s2_y single_norm_s2_v "
    "mlmc_cost single_cost predicted",
)
MatchedCostComparison.__doc__ = """
Seed-averaged L1 norms of the estimator variances of an allocated MLMC
estimator and a single-level estimator. ``predicted`` maps the same four
names to closed-form predictions, or is ``None`` without moments.
"""


def _grid_points(grid):
    if isinstance(grid, GridFunction):
        return grid.xs
    xs = np.asarray(grid, dtype=np.float64).reshape(-1)
    if len(xs) == 0:
        raise ValueError("the grid should contain at least one point")
    return xs


def grid_norm(xs, values):
    """
    L1 norm over the grid of per-point values of shape ``(n_points, n_outputs)``,
    summed over the output components.
    """
    values = np.asarray(values, dtype=np.float64)
    return float(np.sum(l1_norm(GridFunction(xs, values.reshape(len(xs), -1)))))


def _seed_list(seeds):
    if not is_real_iterable(seeds):
        seeds = [seeds]
    seeds = [require_integer("seed", s, minimum=0) for s in seeds]
    if not seeds:
        raise ValueError("at least one seed is needed")
    return seeds


def rate_study(
    evaluator,
    grid,
    t_list,
    m_outer,
    seeds,
    confidence=globalvar.DEFAULT_CONFIDENCE,
    workers=None,
):
    """
    Decay of ``||S2_Y||`` and ``||S2_V||`` with the inner fidelity.

    For every seed and fidelity ``t`` this runs :func:`outer_replicate` over
    the whole grid and takes the L1 norms of the outer sample variances. The
    log-log slopes are fitted to the seed-averaged norms.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        grid (array or GridFunction): Evaluation points.
        t_list (list of int): Inner fidelities, each at least 2.
        m_outer (int): Outer replicates per fidelity, at least 2.
        seeds (int or list of int): Master seeds.
        confidence (float): Confidence level of the slope intervals.
        workers (int or None): Worker threads.

    Returns:
        RateStudy
    """
    _check_evaluator(evaluator)
    xs = _grid_points(grid)
    t_list = [require_integer("t", t, minimum=2) for t in t_list]
    m_outer = require_integer("m_outer", m_outer, minimum=2)
    seeds = _seed_list(seeds)

    rows = []
    for seed in seeds:
        for t in t_list:
            replicates = outer_replicate(evaluator, xs, m_outer, t, seed, workers=workers)
            rows.append(
                {
                    "seed": seed,
                    "t": t,
                    "norm_s2_y": grid_norm(xs, replicates.s2_y),
                    "norm_s2_v": grid_norm(xs, replicates.s2_v),
                }
            )
        logger.info("rate_study: finished seed %d", seed)

    per_seed = pd.DataFrame(rows, columns=["seed", "t", "norm_s2_y", "norm_s2_v"])
    averaged = per_seed.groupby("t", sort=False)[["norm_s2_y", "norm_s2_v"]].mean().reset_index()
    averaged.insert(0, "seed", "mean")
    table = pd.concat([per_seed.astype({"seed": object}), averaged], ignore_index=True)

    fits = {}
    degenerate = bool(
        (averaged[["norm_s2_y", "norm_s2_v"]].values <= 0).any()
    )
    if degenerate:
        warnings.warn(
            "rate_study: some variance norms are zero, the evaluator looks deterministic; "
            "no slopes were fitted",
            RuntimeWarning,
            stacklevel=2,
        )
    elif len(t_list) >= 3:
        for name in ("s2_y", "s2_v"):
            fits[name] = loglog_slope_fit(
                averaged["t"].values, averaged["norm_" + name].values, confidence
            )
    else:
        warnings.warn(
            "rate_study: at least 3 fidelities are needed for a slope fit", RuntimeWarning, stacklevel=2
        )

    return RateStudy(table, fits, degenerate)


def variance_surface(
    evaluator, grid, ladder, budget, kind, seeds, min_m=globalvar.DEFAULT_MIN_SAMPLES, workers=None
):
    """
    Empirical ``||S2_Y||`` and ``||S2_V||`` for every integer allocation of a
    fixed budget.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        grid (array or GridFunction): Evaluation points.
        ladder (FidelityLadder or list): Fidelities.
        budget (int): Exact cost of every allocation.
        kind (CostModelKind or str): Cost model used to price allocations.
        seeds (int or list of int): Master seeds; norms are averaged over them.
        min_m (int): Minimum outer count per level.
        workers (int or None): Worker threads.

    Returns:
        VarianceSurface
    """
    _check_evaluator(evaluator)
    xs = _grid_points(grid)
    ladder = ladder if isinstance(ladder, FidelityLadder) else FidelityLadder(ladder)
    kind = CostModelKind.parse(kind)
    seeds = _seed_list(seeds)

    allocations = list(enumerate_fixed_cost(ladder, budget, kind, min_m=min_m))
    if not allocations:
        raise InfeasibleBudgetError(
            "no allocation with counts of at least {} costs exactly {} under the {} model".format(
                min_m, budget, kind.value
            )
        )
    logger.info("variance_surface: %d allocations x %d seeds", len(allocations), len(seeds))

    m_columns = ["m_{}".format(level) for level in range(len(ladder))]

    def run(job):
        alloc, seed = job
        estimate = mlmc_estimate(evaluator, xs, ladder, alloc, seed)
        return [seed] + alloc.ms.tolist() + [
            grid_norm(xs, estimate.s2_y),
            grid_norm(xs, estimate.s2_v),
        ]

    jobs = [(alloc, seed) for alloc in allocations for seed in seeds]
    per_seed = pd.DataFrame(
        parallel_map(run, jobs, workers),
        columns=["seed"] + m_columns + ["norm_s2_y", "norm_s2_v"],
    )
    table = (
        per_seed.groupby(m_columns, sort=False)[["norm_s2_y", "norm_s2_v"]]
        .mean()
        .reset_index()
    )

    return VarianceSurface(
        table,
        per_seed,
        table[table["norm_s2_y"] == table["norm_s2_y"].min()],
        table[table["norm_s2_v"] == table["norm_s2_v"].min()],
        allocate_mean(ladder, budget, kind),
        allocate_variance(ladder, budget, kind),
    )


def _unwrap(evaluator):
    while isinstance(evaluator, CountingEvaluator):
        evaluator = evaluator.evaluator
    return evaluator


def _reference_values(evaluator, xs, reference):
    evaluator = _unwrap(evaluator)
    if callable(reference):
        return np.asarray(reference(xs), dtype=np.float64).reshape(len(xs), -1)
    if reference is not None:
        raise TypeError("reference should be callable or None but received type {}".format(type(reference)))
    if isinstance(evaluator, AnalyticEvaluator):
        family = evaluator.family
        if family.kind is AnalyticKind.BOUNDARY_LAYER_NOISEFREE:
            return exact_boundary_layer(xs, family.epsilon).reshape(-1, 1)
        return np.asarray(analytic_moments(family, xs).mu).reshape(len(xs), -1)
    return None


def confidence_bands(evaluator, grid, t, seed, reference=None):
    """
    Single-fidelity predictive mean with pointwise one and two standard
    deviation bands ``Y +- sqrt(V)`` and ``Y +- 2 sqrt(V)``.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        grid (array or GridFunction): Evaluation points.
        t (int): Number of forward passes.
        seed (int): Master seed.
        reference (callable or None): Reference function of the grid points;
            for analytic evaluators the exact mean is used when omitted.

    Returns:
        pandas DataFrame with columns ``x, component, y, v, lower_1sd,
        upper_1sd, lower_2sd, upper_2sd, reference``.
    """
    _check_evaluator(evaluator)
    xs = _grid_points(grid)
    estimate = estimate_single(evaluator, xs, t, StreamKey(seed))
    y = np.asarray(estimate.y)
    sd = np.sqrt(np.maximum(estimate.v, 0.0))
    n_points, n_outputs = y.shape

    ref = _reference_values(evaluator, xs, reference)
    if ref is None:
        ref = np.full(y.shape, np.nan)
    elif ref.shape[1] == 1 and n_outputs > 1:
        ref = np.repeat(ref, n_outputs, axis=1)
    elif ref.shape != y.shape:
        raise ValueError("reference has shape {} but the estimate has {}".format(ref.shape, y.shape))

    return pd.DataFrame(
        {
            "x": np.repeat(xs, n_outputs),
            "component": np.tile(np.arange(n_outputs), n_points),
            "y": y.reshape(-1),
            "v": np.asarray(estimate.v).reshape(-1),
            "lower_1sd": (y - sd).reshape(-1),
            "upper_1sd": (y + sd).reshape(-1),
            "lower_2sd": (y - 2 * sd).reshape(-1),
            "upper_2sd": (y + 2 * sd).reshape(-1),
            "reference": ref.reshape(-1),
        }
    )


def matched_cost_comparison(
    evaluator,
    grid,
    ladder,
    alloc,
    kind,
    single_m,
    single_t,
    seeds,
    moments=None,
    workers=None,
):
    """
    Compares an allocated MLMC estimator with a single-level estimator
    ``(M, T)`` averaged over seeds.

    The single-level estimator variance is ``s2 / M`` from
    :func:`outer_replicate`. Costs are reported so that the caller can check
    the two estimators were priced equally: the MLMC cost under ``kind`` and
    ``M T`` for the single-level estimator.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        grid (array or GridFunction): Evaluation points.
        ladder (FidelityLadder or list): Fidelities.
        alloc (Allocation or list): Integer MLMC allocation.
        kind (CostModelKind or str): Cost model used to price ``alloc``.
        single_m (int): Single-level outer count.
        single_t (int): Single-level fidelity.
        seeds (int or list of int): Master seeds.
        moments (MomentSet or None): Per-point moments of shape
            ``(n_points, n_outputs)``; analytic evaluators supply their own.
        workers (int or None): Worker threads.

    Returns:
        MatchedCostComparison
    """
    _check_evaluator(evaluator)
    xs = _grid_points(grid)
    ladder = ladder if isinstance(ladder, FidelityLadder) else FidelityLadder(ladder)
    kind = CostModelKind.parse(kind)
    alloc = alloc if isinstance(alloc, Allocation) else Allocation(alloc, kind)
    single_m = require_integer("single_m", single_m, minimum=2)
    single_t = require_integer("single_t", single_t, minimum=2)
    seeds = _seed_list(seeds)

    mlmc_norms = []
    single_norms = []
    for seed in seeds:
        estimate = mlmc_estimate(evaluator, xs, ladder, alloc, seed, workers=workers)
        mlmc_norms.append((grid_norm(xs, estimate.s2_y), grid_norm(xs, estimate.s2_v)))
        replicates = outer_replicate(evaluator, xs, single_m, single_t, seed, workers=workers)
        single_norms.append(
            (
                grid_norm(xs, replicates.s2_y / single_m),
                grid_norm(xs, replicates.s2_v / single_m),
            )
        )
    mlmc_norms = np.mean(mlmc_norms, axis=0)
    single_norms = np.mean(single_norms, axis=0)

    if moments is None and isinstance(_unwrap(evaluator), AnalyticEvaluator):
        moments = analytic_moments(_unwrap(evaluator).family, xs)
    predicted = None
    if moments is not None:
        if not isinstance(moments, MomentSet):
            raise TypeError("moments should be a MomentSet but received type {}".format(type(moments)))
        e_s2_y, e_s2_v = theoretical_mlmc_variances(moments, ladder, alloc)
        var_y, var_v = theoretical_single_variances(moments, single_t)
        predicted = {
            "mlmc_norm_s2_y": grid_norm(xs, e_s2_y),
            "mlmc_norm_s2_v": grid_norm(xs, e_s2_v),
            "single_norm_s2_y": grid_norm(xs, np.asarray(var_y) / single_m),
            "single_norm_s2_v": grid_norm(xs, np.asarray(var_v) / single_m),
        }

    return MatchedCostComparison(
        float(mlmc_norms[0]),
        float(mlmc_norms[1]),
        float(single_norms[0]),
        float(single_norms[1]),
        cost(ladder, alloc, kind),
        single_m * single_t,
        predicted,
    )
