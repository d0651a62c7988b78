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
Fidelity ladder construction and the level-refinement stopping rule.

"""

__all__ = [
    "make_geometric_ladder",
    "make_dyadic_ladder",
    "StoppingDecision",
    "stopping_check",
    "AdaptiveStep",
    "AdaptiveResult",
    "adaptive_mlmc",
]

import logging
import math
from collections import namedtuple

import numpy as np

from .. import globalvar
from ..core.schema import CostModelKind, FidelityLadder
from ..core.utils import require_integer, require_positive
from ..estimators.multilevel import MlmcEstimate, mlmc_estimate
from .optimal import allocate_mean, round_allocation

logger = logging.getLogger(__name__)

# absorbs rounding in t0 * r**l when the product is an integer
_CEIL_SLACK = 1e-12


def make_geometric_ladder(t0, r, t_max):
    """
    Geometric ladder ``T_l = ceil(t0 r**l)`` up to ``t_max``.

    A level closer than 2 to its predecessor is advanced to
    ``T_{l-1} + 2``; levels are added while ``T_l <= t_max``.

    Args:
        t0 (int): Coarsest fidelity, at least 2.
        r (float): Ratio, greater than 1.
        t_max (int): Largest allowed fidelity, at least ``t0``.

    Returns:
        FidelityLadder
    """
    t0 = require_integer("t0", t0, minimum=2)
    r = require_positive("r", r)
    if r <= 1:
        raise ValueError("r should be greater than 1 but received {}".format(r))
    t_max = require_integer("t_max", t_max)
    if t_max < t0:
        raise ValueError("t_max should be at least t0={} but received {}".format(t0, t_max))

    ts = [t0]
    level = 1
    while True:
        raw = int(math.ceil(t0 * r ** level * (1 - _CEIL_SLACK)))
        t = max(raw, ts[-1] + 2)
        if t > t_max:
            break
        if t != raw:
            logger.debug("make_geometric_ladder: level %d advanced from %d to %d", level, raw, t)
        ts.append(t)
        level += 1
    return FidelityLadder(ts)


def make_dyadic_ladder(n_levels):
    """
    The dyadic ladder ``T_l = 2**(l + 1)`` for ``l = 0..n_levels``.
    """
    n_levels = require_integer("n_levels", n_levels, minimum=0)
    return FidelityLadder([2 ** (level + 1) for level in range(n_levels + 1)])


StoppingDecision = namedtuple("StoppingDecision", "mean variance mean_ratio variance_ratio")
StoppingDecision.__doc__ = """
Whether refinement can stop for the mean and the variance target, with the
share of the empirical estimator variance contributed by the finest level.
"""


def _finest_share(finest, total):
    finest = float(np.sum(finest))
    total = float(np.sum(total))
    return 0.0 if total == 0 else finest / total


def stopping_check(estimate, threshold=globalvar.DEFAULT_STOPPING_THRESHOLD):
    """
    Stops refining when the finest level's contribution to the empirical
    estimator variance is small:

        var_L / M_L <= threshold * S2

    for the mean (``S2_Y``) and the variance (``S2_V``) target. For several
    points or components the contributions and totals are summed first.

    Args:
        estimate (MlmcEstimate): Estimate with at least one level above 0.
        threshold (float): Fraction in (0, 1).

    Returns:
        StoppingDecision
    """
    if not isinstance(estimate, MlmcEstimate):
        raise TypeError("estimate should be an MlmcEstimate but received type {}".format(type(estimate)))
    if estimate.n_levels < 1:
        raise ValueError("stopping_check needs an estimate with at least two levels")
    threshold = require_positive("threshold", threshold)
    if threshold >= 1:
        raise ValueError("threshold should be in (0, 1) but received {}".format(threshold))

    finest = estimate.level_stats[-1]
    mean_share = _finest_share(finest.var_dy / finest.m, estimate.s2_y)
    variance_share = _finest_share(finest.var_dv / finest.m, estimate.s2_v)
    return StoppingDecision(
        mean_share <= threshold, variance_share <= threshold, mean_share, variance_share
    )


AdaptiveStep = namedtuple("AdaptiveStep", "ladder allocation estimate decision")
AdaptiveResult = namedtuple("AdaptiveResult", "estimate ladder allocation steps converged")


def adaptive_mlmc(
    evaluator,
    x,
    t0,
    r,
    t_max,
    budget,
    kind=CostModelKind.COUPLED,
    seed=0,
    threshold=globalvar.DEFAULT_STOPPING_THRESHOLD,
    workers=None,
):
    """
    Grows a geometric ladder one level at a time until the stopping rule holds
    for both targets.

    At each step the ladder ``T_0..T_L`` is allocated with
    :func:`allocate_mean` and :func:`round_allocation` for ``budget`` and
    estimated afresh with :func:`mlmc_estimate`.

    Returns:
        AdaptiveResult with the last estimate, its ladder and allocation, every
        step, and whether the rule was met before ``t_max`` ran out.
    """
    full = make_geometric_ladder(t0, r, t_max)
    if full.n_levels < 1:
        raise ValueError("t_max={} leaves no level above T_0={}".format(t_max, t0))

    steps = []
    converged = False
    for n_levels in range(1, full.n_levels + 1):
        ladder = full.truncated(n_levels)
        alloc = round_allocation(allocate_mean(ladder, budget, kind), ladder, budget)
        estimate = mlmc_estimate(evaluator, x, ladder, alloc, seed, workers=workers)
        decision = stopping_check(estimate, threshold)
        steps.append(AdaptiveStep(ladder, alloc, estimate, decision))
        logger.info(
            "adaptive_mlmc: L=%d mean share %.3g, variance share %.3g",
            n_levels,
            decision.mean_ratio,
            decision.variance_ratio,
        )
        if decision.mean and decision.variance:
            converged = True
            break

    last = steps[-1]
    return AdaptiveResult(last.estimate, last.ladder, last.allocation, steps, converged)
