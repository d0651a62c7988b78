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
Cost models and sample allocations across the levels of a fidelity ladder.

For level variances ``w_l`` and cost weights ``a_l`` the allocation
minimising ``sum_l w_l / M_l`` subject to ``sum_l a_l M_l = c`` is

    M_l = c sqrt(w_l / a_l) / sum_k sqrt(w_k a_k)

"""

__all__ = [
    "InfeasibleBudgetError",
    "cost",
    "target_weights",
    "allocate_mean",
    "allocate_variance",
    "predicted_variance",
    "round_allocation",
    "enumerate_fixed_cost",
]

import logging
import math

import numpy as np

from ..core.schema import Allocation, CostModelKind, FidelityLadder, MomentSet
from ..core.utils import require_integer, require_positive
from ..estimators.multilevel import level_variances

logger = logging.getLogger(__name__)

# relative improvement an exchange must achieve to be applied
_IMPROVEMENT_RTOL = 1e-12
_MAX_EXCHANGES = 100000


class InfeasibleBudgetError(ValueError):
    """
    Raised when a budget cannot afford the minimum allocation.
    """


def _as_ladder(ladder):
    return ladder if isinstance(ladder, FidelityLadder) else FidelityLadder(ladder)


def cost(ladder, alloc, kind=None):
    """
    Number of forward passes ``sum_l a_l M_l`` priced under a cost model.

    Args:
        ladder (FidelityLadder or list): Fidelities.
        alloc (Allocation or list): Outer counts.
        kind (CostModelKind or str or None): Cost model; defaults to the
            allocation's own kind, or ``coupled`` for a plain list.

    Returns:
        int for integer counts, float otherwise.
    """
    ladder = _as_ladder(ladder)
    if isinstance(alloc, Allocation):
        ms = alloc.ms
        kind = alloc.kind if kind is None else CostModelKind.parse(kind)
    else:
        ms = np.asarray(alloc)
        kind = CostModelKind.COUPLED if kind is None else CostModelKind.parse(kind)
    if ms.shape != (len(ladder),):
        raise ValueError(
            "allocation has shape {} but the ladder has {} levels".format(ms.shape, len(ladder))
        )
    total = np.dot(kind.weights(ladder), ms)
    return int(total) if np.issubdtype(ms.dtype, np.integer) else float(total)


def target_weights(ladder, target="mean", moments="closure"):
    """
    Per-level variance weights the allocation solvers optimise against.

    The mean target uses ``v_l`` with ``mu2 = 1`` (the factor cancels). The
    variance target uses ``w_l`` from explicit moments, or under the
    zero-excess-kurtosis closure with ``mu2 = 1``.

    Returns:
        numpy vector of length ``L + 1``
    """
    ladder = _as_ladder(ladder)
    if target == "mean":
        moments = MomentSet.closure(1.0)
    elif target == "variance":
        if moments is None or (isinstance(moments, str) and moments == "closure"):
            moments = MomentSet.closure(1.0)
        elif not isinstance(moments, MomentSet):
            raise ValueError(
                "moments should be a MomentSet or 'closure' but received {}".format(moments)
            )
        if np.ndim(moments.mu2) != 0:
            raise ValueError("allocation needs the moments of a single point and component")
    else:
        raise ValueError("target should be 'mean' or 'variance' but received {}".format(target))

    weights = level_variances(moments, ladder, target)
    if np.any(weights <= 0):
        raise ValueError(
            "every level variance should be positive to allocate but received {}".format(weights)
        )
    return weights


def _lagrangian(ladder, budget, kind, weights, target):
    budget = require_positive("budget", budget)
    kind = CostModelKind.parse(kind)
    a = kind.weights(ladder).astype(np.float64)
    ms = budget * np.sqrt(weights / a) / np.sum(np.sqrt(weights * a))
    return Allocation(ms, kind, level_weights=weights, target=target)


def allocate_mean(ladder, budget, kind=CostModelKind.COUPLED):
    """
    Continuous allocation minimising ``E[S2_Y]`` at cost ``budget``, with
    ``v_0 = 1/T_0`` and ``v_l = 1/T_{l-1} - 1/T_l``.

    Args:
        ladder (FidelityLadder or list): Fidelities.
        budget (float): Total cost ``c``.
        kind (CostModelKind or str): Cost model.

    Returns:
        Allocation with real counts
    """
    ladder = _as_ladder(ladder)
    return _lagrangian(ladder, budget, kind, target_weights(ladder, "mean"), "mean")


def allocate_variance(ladder, budget, kind=CostModelKind.COUPLED, moments="closure"):
    """
    Continuous allocation minimising ``E[S2_V]`` at cost ``budget``.

    Args:
        ladder (FidelityLadder or list): Fidelities.
        budget (float): Total cost ``c``.
        kind (CostModelKind or str): Cost model.
        moments (MomentSet or str): Explicit moments, or ``"closure"`` for
            ``mu4 = 3 mu2**2``.

    Returns:
        Allocation with real counts
    """
    ladder = _as_ladder(ladder)
    weights = target_weights(ladder, "variance", moments)
    return _lagrangian(ladder, budget, kind, weights, "variance")


def predicted_variance(ladder, ms, weights):
    """
    ``sum_l w_l / M_l`` for an allocation and per-level weights.
    """
    ladder = _as_ladder(ladder)
    ms = np.asarray(ms.ms if isinstance(ms, Allocation) else ms, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if ms.shape != (len(ladder),) or weights.shape[:1] != (len(ladder),):
        raise ValueError("allocation, weights and ladder should have matching lengths")
    return np.sum(weights / ms.reshape((-1,) + (1,) * (weights.ndim - 1)), axis=0)


def _objective(weights, ms):
    return float(np.sum(weights / ms))


def _fill(ms, a, weights, remaining):
    """Greedy spend of the remaining budget by marginal gain per unit cost."""
    while True:
        affordable = a <= remaining
        if not np.any(affordable):
            return remaining
        gain = np.where(affordable, weights / (ms * (ms + 1.0)) / a, -np.inf)
        level = int(np.argmax(gain))
        ms[level] += 1
        remaining -= a[level]
        logger.debug("round_allocation: +1 at level %d", level)


def _best_exchange(ms, a, weights, remaining, min_m):
    """
    The best budget-feasible exchange of units between two levels, or None.
    """
    current = _objective(weights, ms)
    best, best_delta = None, -_IMPROVEMENT_RTOL * current
    largest = a.max()
    n = len(ms)

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            candidates = []
            # add p units at j, paying with the fewest units removed from i
            for p in range(1, int(math.ceil(largest / a[j])) + 1):
                q = max(0, int(math.ceil((p * a[j] - remaining) / a[i])))
                if q > 0:
                    candidates.append((q, p))
            # remove q units at i, buying as many units at j as fit
            for q in range(1, int(math.ceil(largest / a[i])) + 1):
                p = int(math.floor((remaining + q * a[i]) / a[j]))
                if p > 0:
                    candidates.append((q, p))

            for q, p in candidates:
                if ms[i] - q < min_m:
                    continue
                delta = (
                    weights[i] / (ms[i] - q)
                    - weights[i] / ms[i]
                    + weights[j] / (ms[j] + p)
                    - weights[j] / ms[j]
                )
                if delta < best_delta:
                    best, best_delta = (i, q, j, p), delta
    return best


def round_allocation(continuous, ladder, budget, kind=None, min_m=2):
    """
    Integer allocation near a continuous optimum.

    Each count is floored (to at least ``min_m``), the remaining budget is
    spent greedily one level unit at a time on the largest marginal reduction
    ``w_l / (M_l (M_l + 1)) / a_l``, and the result is polished with
    budget-feasible exchanges of units between pairs of levels until none
    lowers ``sum_l w_l / M_l``. The final cost is at most ``budget`` and within
    ``min_l a_l`` of it.

    Args:
        continuous (Allocation): Continuous allocation; its ``level_weights``
            define the objective (mean-target weights when absent).
        ladder (FidelityLadder or list): Fidelities.
        budget (float): Total cost ``c``.
        kind (CostModelKind or str or None): Cost model; defaults to the
            allocation's kind.
        min_m (int): Smallest allowed count.

    Returns:
        Allocation with integer counts

    Raises:
        InfeasibleBudgetError: ``budget`` cannot afford ``min_m`` samples per
            level.
    """
    ladder = _as_ladder(ladder)
    if not isinstance(continuous, Allocation):
        continuous = Allocation(continuous)
    if len(continuous) != len(ladder):
        raise ValueError(
            "allocation has {} levels but the ladder has {}".format(len(continuous), len(ladder))
        )
    kind = continuous.kind if kind is None else CostModelKind.parse(kind)
    min_m = require_integer("min_m", min_m, minimum=1)
    budget = require_positive("budget", budget)
    weights = (
        continuous.level_weights
        if continuous.level_weights is not None
        else target_weights(ladder, "mean")
    )
    a = kind.weights(ladder).astype(np.int64)

    if min_m * a.sum() > budget:
        raise InfeasibleBudgetError(
            "budget {} cannot afford {} samples on each of {} levels (cost {})".format(
                budget, min_m, len(ladder), min_m * a.sum()
            )
        )

    ms = np.maximum(min_m, np.floor(continuous.ms + 1e-9)).astype(np.int64)
    while np.dot(a, ms) > budget:
        loss = np.where(ms > min_m, weights / (ms * (ms - 1.0)) / a, np.inf)
        ms[int(np.argmin(loss))] -= 1

    remaining = _fill(ms, a, weights, budget - np.dot(a, ms))
    for _ in range(_MAX_EXCHANGES):
        move = _best_exchange(ms, a, weights, remaining, min_m)
        if move is None:
            break
        i, q, j, p = move
        ms[i] -= q
        ms[j] += p
        remaining += q * a[i] - p * a[j]
        logger.debug("round_allocation: exchanged %d at level %d for %d at level %d", q, i, p, j)
        remaining = _fill(ms, a, weights, remaining)

    return Allocation(ms, kind, level_weights=weights, target=continuous.target)


def enumerate_fixed_cost(ladder, budget, kind=CostModelKind.COUPLED, min_m=2):
    """
    Every integer allocation with counts at least ``min_m`` costing exactly
    ``budget``.

    Allocations are yielded in lexicographic order of ``(M_1, ..., M_L)``;
    ``M_0`` takes the residual budget and the allocation is skipped unless
    the residual is a multiple of ``a_0`` worth at least ``min_m`` samples.

    Returns:
        generator of integer Allocations (empty when infeasible)
    """
    ladder = _as_ladder(ladder)
    kind = CostModelKind.parse(kind)
    min_m = require_integer("min_m", min_m, minimum=1)
    if float(budget) != int(budget):
        raise ValueError("budget should be an integer but received {}".format(budget))
    budget = int(budget)
    a = [int(w) for w in kind.weights(ladder)]
    n_levels = len(a) - 1

    def recurse(level, residual, prefix):
        if level > n_levels:
            if residual % a[0] == 0 and residual // a[0] >= min_m:
                yield Allocation(np.array([residual // a[0]] + prefix, dtype=np.int64), kind)
            return
        reserve = min_m * (a[0] + sum(a[level + 1 :]))
        m = min_m
        while residual - a[level] * m >= reserve:
            yield from recurse(level + 1, residual - a[level] * m, prefix + [m])
            m += 1

    return recurse(1, budget, [])
