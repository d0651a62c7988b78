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
Multilevel Monte Carlo estimators of the predictive mean and variance.

Level 0 averages independent single-fidelity estimates at ``T_0``. Every
level ``l >= 1`` averages increments ``Y(T_l) - Y(T_{l-1})`` and
``V(T_l) - V(T_{l-1})`` of coupled pairs, where the fine estimator of a pair
reuses the ``T_{l-1}`` draws of its coarse partner and extends them with
``T_l - T_{l-1}`` new draws. Replicate m of level l draws from the stream
``(seed, m, l)``, so levels and replicates are independent.

"""

__all__ = [
    "IncrementSample",
    "LevelStats",
    "MlmcEstimate",
    "coupled_pair",
    "increment_sample",
    "pooled_variance_update",
    "mlmc_estimate",
    "level_variances",
    "theoretical_mlmc_variances",
    "cov_overlap",
]

import logging
from collections import namedtuple

import numpy as np

from ..core.schema import Allocation, CostModelKind, FidelityLadder, MomentSet
from ..core.streams import StreamKey
from ..core.utils import parallel_map, require_integer
from .single_fidelity import (
    NonFiniteEstimateError,
    RunningMoments,
    SingleFidelityEstimate,
    _check_evaluator,
    theoretical_single_variances,
)

logger = logging.getLogger(__name__)


IncrementSample = namedtuple("IncrementSample", "dy dv level new_evals")
IncrementSample.__doc__ = """
One coupled increment ``(dy, dv)`` at ``level``; ``new_evals`` is
``T_l - T_{l-1}``.
"""

LevelStats = namedtuple(
    "LevelStats", "level m mean_dy var_dy mean_dv var_dv new_evals"
)
LevelStats.__doc__ = """
Per-level sample statistics of an MLMC run. At level 0 the ``dy``/``dv``
fields hold the statistics of the single-fidelity ``Y`` and ``V`` themselves.
"""


def _as_ladder(ladder):
    return ladder if isinstance(ladder, FidelityLadder) else FidelityLadder(ladder)


def _as_allocation(alloc, ladder):
    if not isinstance(alloc, Allocation):
        alloc = Allocation(alloc)
    if len(alloc) != len(ladder):
        raise ValueError(
            "allocation has {} levels but the ladder has {}".format(len(alloc), len(ladder))
        )
    return alloc


class MlmcEstimate:
    """
    Result of :func:`mlmc_estimate`.

    Attributes:
        y_mlmc (array): MLMC estimate of the predictive mean.
        v_mlmc (array): MLMC estimate of the predictive variance.
        s2_y (array): Empirical variance of ``y_mlmc``, ``sum_l var_dy / M_l``.
        s2_v (array): Empirical variance of ``v_mlmc``, ``sum_l var_dv / M_l``.
        level_stats (list of LevelStats): Per-level statistics.
        ladder (FidelityLadder): The fidelities.
        evals_coupled (int): Cost under the coupled model,
            ``T_0 M_0 + sum_l (T_l - T_{l-1}) M_l``.
        evals_uncoupled_equivalent (int): Cost under the uncoupled model,
            ``sum_l T_l M_l``.
        forward_passes (int): Stochastic forward passes actually run.
    """

    def __init__(self, level_stats, ladder, forward_passes):
        self.level_stats = list(level_stats)
        self.ladder = ladder
        self.ms = np.array([s.m for s in self.level_stats], dtype=np.int64)
        self.y_mlmc = self._telescope("mean_dy")
        self.v_mlmc = self._telescope("mean_dv")
        self.s2_y, self.s2_v = self.recompute_s2()
        self.evals_coupled = int(np.dot(CostModelKind.COUPLED.weights(ladder), self.ms))
        self.evals_uncoupled_equivalent = int(
            np.dot(CostModelKind.UNCOUPLED.weights(ladder), self.ms)
        )
        self.forward_passes = int(forward_passes)

    def _telescope(self, field):
        total = getattr(self.level_stats[0], field)
        for stats in self.level_stats[1:]:
            total = total + getattr(stats, field)
        return total

    def recompute_s2(self):
        """
        ``(s2_y, s2_v)`` summed from the level statistics in level order.
        """
        s2_y = self.level_stats[0].var_dy / self.level_stats[0].m
        s2_v = self.level_stats[0].var_dv / self.level_stats[0].m
        for stats in self.level_stats[1:]:
            s2_y = s2_y + stats.var_dy / stats.m
            s2_v = s2_v + stats.var_dv / stats.m
        return s2_y, s2_v

    @property
    def n_levels(self):
        return len(self.level_stats) - 1

    def __repr__(self):
        return "{}(ladder={}, ms={})".format(
            type(self).__name__, list(self.ladder.ts), self.ms.tolist()
        )


def coupled_pair(evaluator, x, t_coarse, t_fine, key):
    """
    Coarse and fine single-fidelity estimates from one draw sequence.

    The coarse estimate uses inner draws ``1..t_coarse`` and is bit-identical
    to :func:`estimate_single` at ``t_coarse`` under the same key. The fine
    estimate pools the coarse summary with the block ``t_coarse+1..t_fine``
    through :meth:`RunningMoments.merge`. Exactly ``t_fine`` evaluations run.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        x: Input point(s).
        t_coarse (int): Coarse fidelity, at least 2.
        t_fine (int): Fine fidelity, at least ``t_coarse + 2``.
        key (StreamKey): Replicate key.

    Returns:
        tuple ``(coarse, fine)`` of SingleFidelityEstimate
    """
    _check_evaluator(evaluator)
    t_coarse = require_integer("t_coarse", t_coarse, minimum=2)
    t_fine = require_integer("t_fine", t_fine)
    if t_fine - t_coarse < 2:
        raise ValueError(
            "t_fine should exceed t_coarse by at least 2 but received t_coarse={} and t_fine={}".format(
                t_coarse, t_fine
            )
        )
    draws = evaluator.sample(x, key.with_inner(1), t_fine)
    coarse = RunningMoments.from_draws(draws[:t_coarse])
    fine = coarse.merge(RunningMoments.from_draws(draws[t_coarse:]))
    return (
        SingleFidelityEstimate(coarse.mean, coarse.variance, t_coarse, t_coarse),
        SingleFidelityEstimate(fine.mean, fine.variance, t_fine, t_fine),
    )


def increment_sample(evaluator, x, ladder, level, key):
    """
    The coupled increment ``(dY, dV)`` of ``level >= 1`` under ``key``.
    """
    ladder = _as_ladder(ladder)
    level = require_integer("level", level, minimum=1)
    if level > ladder.n_levels:
        raise ValueError(
            "level should be at most {} but received {}".format(ladder.n_levels, level)
        )
    coarse, fine = coupled_pair(evaluator, x, ladder[level - 1], ladder[level], key)
    return IncrementSample(
        fine.y - coarse.y, fine.v - coarse.v, level, ladder[level] - ladder[level - 1]
    )


def pooled_variance_update(v_coarse, y_coarse, n_coarse, block):
    """
    Fine mean and unbiased variance of the union of a summarised coarse
    sample and a new block of draws, via

        (T_f - 1) V_f = (T_c - 1) V_c + (n_b - 1) V_b + T_c n_b / T_f (Y_c - Y_b)**2

    Args:
        v_coarse: Unbiased variance of the coarse sample.
        y_coarse: Mean of the coarse sample.
        n_coarse (int): Size of the coarse sample, at least 2.
        block (array): New draws along the first axis, at least 2.

    Returns:
        tuple ``(v_fine, y_fine)``
    """
    n_coarse = require_integer("n_coarse", n_coarse, minimum=2)
    block = np.asarray(block, dtype=np.float64)
    if block.ndim == 0 or block.shape[0] < 2:
        raise ValueError("block should contain at least 2 draws but received {}".format(block))
    coarse = RunningMoments.from_summary(n_coarse, y_coarse, v_coarse)
    fine = coarse.merge(RunningMoments.from_draws(block))
    variance, mean = fine.variance, fine.mean
    if variance.ndim == 0:
        return variance.item(), mean.item()
    return variance, mean


def _level_stats(level, samples_y, samples_v, new_evals):
    ys = RunningMoments.from_draws(np.stack(samples_y))
    vs = RunningMoments.from_draws(np.stack(samples_v))
    return LevelStats(level, ys.count, ys.mean, ys.variance, vs.mean, vs.variance, new_evals)


def mlmc_estimate(evaluator, x, ladder, alloc, seed, workers=None):
    """
    Coupled MLMC estimates of the predictive mean and variance.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        x: Input point(s).
        ladder (FidelityLadder or list): Fidelities ``(T_0, ..., T_L)``.
        alloc (Allocation or list): Integer outer counts, each at least 2.
        seed (int): Master seed.
        workers (int or None): Worker threads for the replicates of a level.

    Returns:
        MlmcEstimate
    """
    _check_evaluator(evaluator)
    ladder = _as_ladder(ladder)
    alloc = _as_allocation(alloc, ladder)
    alloc.check_realised(min_m=2)
    xs = evaluator.prepare_inputs(x)
    ms = alloc.ms.tolist()

    def level_zero(replicate):
        key = StreamKey(seed, replicate=replicate, level=0)
        draws = evaluator.sample(xs, key, ladder[0])
        moments = RunningMoments.from_draws(draws)
        return moments.mean, moments.variance

    stats = []
    zero = parallel_map(level_zero, range(1, ms[0] + 1), workers)
    stats.append(_level_stats(0, [y for y, _ in zero], [v for _, v in zero], ladder[0]))
    passes = ladder[0] * ms[0]

    for level in range(1, len(ladder)):
        increments = parallel_map(
            lambda replicate: increment_sample(
                evaluator, xs, ladder, level, StreamKey(seed, replicate=replicate, level=level)
            ),
            range(1, ms[level] + 1),
            workers,
        )
        stats.append(
            _level_stats(
                level,
                [s.dy for s in increments],
                [s.dv for s in increments],
                ladder[level] - ladder[level - 1],
            )
        )
        passes += ladder[level] * ms[level]
        logger.debug("level %d: M=%d T=%d", level, ms[level], ladder[level])

    estimate = MlmcEstimate(stats, ladder, passes)
    for name in ("y_mlmc", "v_mlmc", "s2_y", "s2_v"):
        if not np.all(np.isfinite(getattr(estimate, name))):
            raise NonFiniteEstimateError("mlmc_estimate produced a non-finite {}".format(name))

    logger.info(
        "mlmc_estimate: ladder=%s ms=%s coupled cost=%d",
        list(ladder.ts),
        ms,
        estimate.evals_coupled,
    )
    return estimate


def level_variances(moments, ladder, target="mean"):
    """
    Per-level variances of the level estimators.

    For ``target="mean"``: ``v_0 = mu2 / T_0`` and
    ``v_l = mu2 (1/T_{l-1} - 1/T_l)``. For ``target="variance"``:
    ``w_0 = Var[V(T_0)]`` and

        w_l = (1/T_{l-1} - 1/T_l)(mu4 - 3 mu2**2) + 2 (1/(T_{l-1}-1) - 1/(T_l-1)) mu2**2

    Args:
        moments (MomentSet): Central moments.
        ladder (FidelityLadder or list): Fidelities.
        target (str): ``"mean"`` or ``"variance"``.

    Returns:
        numpy array with the level on the first axis.
    """
    if not isinstance(moments, MomentSet):
        raise TypeError("moments should be a MomentSet but received type {}".format(type(moments)))
    ladder = _as_ladder(ladder)
    ts = ladder.ts
    mu2 = np.asarray(moments.mu2)

    if target == "mean":
        out = [mu2 / ts[0]] + [
            mu2 * (1.0 / tc - 1.0 / tf) for tc, tf in zip(ts[:-1], ts[1:])
        ]
    elif target == "variance":
        excess = moments.excess_fourth
        out = [np.asarray(theoretical_single_variances(moments, ts[0])[1])] + [
            (1.0 / tc - 1.0 / tf) * excess
            + 2 * (1.0 / (tc - 1) - 1.0 / (tf - 1)) * np.square(mu2)
            for tc, tf in zip(ts[:-1], ts[1:])
        ]
    else:
        raise ValueError("target should be 'mean' or 'variance' but received {}".format(target))
    return np.stack([np.asarray(v, dtype=np.float64) for v in out])


def theoretical_mlmc_variances(moments, ladder, alloc):
    """
    Expected empirical variances ``E[S2_Y]`` and ``E[S2_V]`` of the MLMC
    estimators, ``sum_l v_l / M_l`` and ``sum_l w_l / M_l``.

    Returns:
        tuple ``(e_s2_y, e_s2_v)``
    """
    ladder = _as_ladder(ladder)
    alloc = _as_allocation(alloc, ladder)
    ms = alloc.ms.astype(np.float64).reshape((-1,) + (1,) * np.ndim(moments.mu2))
    e_s2_y = (level_variances(moments, ladder, "mean") / ms).sum(axis=0)
    e_s2_v = (level_variances(moments, ladder, "variance") / ms).sum(axis=0)
    if e_s2_y.ndim == 0:
        return e_s2_y.item(), e_s2_v.item()
    return e_s2_y, e_s2_v


def cov_overlap(moments, t_coarse, t_fine):
    """
    Covariance of the unbiased sample variances of nested samples of sizes
    ``t_coarse < t_fine``:

        ((t_c - 1)/(t_f - 1)) Var[V(t_c)] + (t_f - t_c)/(t_c t_f (t_f - 1)) (mu4 - 3 mu2**2)
    """
    if not isinstance(moments, MomentSet):
        raise TypeError("moments should be a MomentSet but received type {}".format(type(moments)))
    t_coarse = require_integer("t_coarse", t_coarse, minimum=2)
    t_fine = require_integer("t_fine", t_fine)
    if t_fine <= t_coarse:
        raise ValueError(
            "t_fine should exceed t_coarse but received t_coarse={} and t_fine={}".format(
                t_coarse, t_fine
            )
        )
    var_coarse = np.asarray(theoretical_single_variances(moments, t_coarse)[1])
    cov = (t_coarse - 1) / (t_fine - 1) * var_coarse + (t_fine - t_coarse) / (
        t_coarse * t_fine * (t_fine - 1)
    ) * moments.excess_fourth
    return cov.item() if cov.ndim == 0 else cov
