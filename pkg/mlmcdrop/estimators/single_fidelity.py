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
Single-fidelity Monte Carlo estimators of the predictive mean and variance,
their outer replication, and closed-form estimator variances.

"""

__all__ = [
    "NonFiniteEstimateError",
    "RunningMoments",
    "SingleFidelityEstimate",
    "OuterReplicates",
    "estimate_single",
    "outer_replicate",
    "theoretical_single_variances",
]

import logging
from collections import namedtuple

import numpy as np

from ..core.schema import MomentSet
from ..core.streams import StreamKey
from ..core.utils import parallel_map, require_integer
from ..layer.evaluator import StochasticEvaluator

logger = logging.getLogger(__name__)


class NonFiniteEstimateError(FloatingPointError):
    """
    Raised when an estimator produces NaN or infinite values.
    """


class RunningMoments:
    """
    Count, mean and sum of squared deviations of a sample, with the pooled
    update used to combine disjoint blocks.

    Blocks are summarised by a shifted two-pass computation (deviations from
    the block's first draw), and blocks are combined with

        M2 = M2_a + M2_b + (mean_b - mean_a)**2 * n_a * n_b / (n_a + n_b)

    so pushing a single value is Welford's update. A sample of identical values
    gives exactly that value as its mean and exactly zero ``m2``.

    Args:
        count (int): Number of values.
        mean (array): Sample mean.
        m2 (array): Sum of squared deviations from the mean.
    """

    __slots__ = ("count", "mean", "m2")

    def __init__(self, count, mean, m2):
        self.count = int(count)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.m2 = np.asarray(m2, dtype=np.float64)

    @classmethod
    def from_draws(cls, draws):
        """
        Summarises the draws along the first axis.
        """
        draws = np.asarray(draws, dtype=np.float64)
        if draws.shape[0] == 0:
            raise ValueError("({}) at least one draw is required".format(cls.__name__))
        shift = draws[0]
        deviations = draws - shift
        block_mean = deviations.mean(axis=0)
        m2 = np.square(deviations - block_mean).sum(axis=0)
        return cls(draws.shape[0], shift + block_mean, m2)

    @classmethod
    def from_summary(cls, count, mean, variance):
        """
        Rebuilds the accumulator from a count, mean and unbiased variance.
        """
        count = require_integer("count", count, minimum=1)
        return cls(count, mean, np.asarray(variance, dtype=np.float64) * (count - 1))

    def merge(self, other):
        """
        The accumulator of the union of two disjoint samples.
        """
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / count)
        m2 = self.m2 + other.m2 + np.square(delta) * (self.count * other.count / count)
        return RunningMoments(count, mean, m2)

    def push(self, value):
        """
        Welford update with one more value; returns the updated accumulator.
        """
        return self.merge(RunningMoments.from_draws(np.asarray(value)[None]))

    @property
    def variance(self):
        """Unbiased sample variance, defined for at least two values."""
        if self.count < 2:
            raise ValueError(
                "({}) the sample variance needs at least two values".format(type(self).__name__)
            )
        return self.m2 / (self.count - 1)

    def __repr__(self):
        return "{}(count={}, mean={}, m2={})".format(
            type(self).__name__, self.count, self.mean, self.m2
        )


SingleFidelityEstimate = namedtuple("SingleFidelityEstimate", "y v t evals")
SingleFidelityEstimate.__doc__ = """
Sample mean ``y`` and unbiased sample variance ``v`` of ``t`` stochastic
evaluations, with arrays of shape ``(n_points, n_outputs)``. ``evals`` counts
forward passes (equal to ``t``).
"""

OuterReplicates = namedtuple("OuterReplicates", "y_bar v_bar s2_y s2_v m t evals")
OuterReplicates.__doc__ = """
Outer means of ``m`` independent single-fidelity estimates at fidelity ``t``
and the unbiased outer sample variances ``s2_y`` and ``s2_v`` of the
replicate estimators. ``evals`` is ``m * t``.
"""


def _check_evaluator(evaluator):
    if not isinstance(evaluator, StochasticEvaluator):
        raise TypeError(
            "evaluator should be a StochasticEvaluator but received type {}".format(
                type(evaluator)
            )
        )


def _check_finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteEstimateError("{} produced a non-finite estimate".format(name))


def estimate_single(evaluator, x, t, key):
    """
    Sample mean and unbiased sample variance of ``t`` draws.

    The draws use inner indices ``1..t`` under ``key`` (the key's own inner
    index is ignored), so they coincide with the draws of any coupled routine
    using the same key.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        x: Input point(s).
        t (int): Inner fidelity, at least 2.
        key (StreamKey): Replicate key.

    Returns:
        SingleFidelityEstimate
    """
    _check_evaluator(evaluator)
    t = require_integer("t", t, minimum=2)
    draws = evaluator.sample(x, key.with_inner(1), t)
    moments = RunningMoments.from_draws(draws)
    return SingleFidelityEstimate(moments.mean, moments.variance, t, t)


def outer_replicate(evaluator, x, m, t, seed, level=0, workers=None):
    """
    Runs ``m`` independent single-fidelity estimates with replicate indices
    ``1..m`` and returns their outer means and outer sample variances.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        x: Input point(s).
        m (int): Outer count, at least 2.
        t (int): Inner fidelity, at least 2.
        seed (int): Master seed.
        level (int): Level index used in the replicate keys.
        workers (int or None): Worker threads for the replicates.

    Returns:
        OuterReplicates
    """
    _check_evaluator(evaluator)
    m = require_integer("m", m, minimum=2)
    t = require_integer("t", t, minimum=2)
    xs = evaluator.prepare_inputs(x)

    estimates = parallel_map(
        lambda replicate: estimate_single(
            evaluator, xs, t, StreamKey(seed, replicate=replicate, level=level)
        ),
        range(1, m + 1),
        workers,
    )
    ys = RunningMoments.from_draws(np.stack([e.y for e in estimates]))
    vs = RunningMoments.from_draws(np.stack([e.v for e in estimates]))
    _check_finite("outer_replicate", ys.mean, vs.mean)

    logger.debug("outer_replicate: m=%d t=%d seed=%d", m, t, seed)
    return OuterReplicates(ys.mean, vs.mean, ys.variance, vs.variance, m, t, m * t)


def theoretical_single_variances(moments, t):
    """
    Closed-form variances of the single-fidelity estimators:
    ``Var[Y] = mu2 / t`` and ``Var[V] = (mu4 - (t - 3) / (t - 1) * mu2**2) / t``.

    Args:
        moments (MomentSet): Central moments of the predictor.
        t (int): Inner fidelity, at least 2.

    Returns:
        tuple ``(var_y, var_v)``
    """
    if not isinstance(moments, MomentSet):
        raise TypeError("moments should be a MomentSet but received type {}".format(type(moments)))
    t = require_integer("t", t, minimum=2)
    mu2 = np.asarray(moments.mu2)
    var_y = mu2 / t
    var_v = (np.asarray(moments.mu4) - (t - 3) / (t - 1) * np.square(mu2)) / t
    if var_y.ndim == 0:
        return var_y.item(), var_v.item()
    return var_y, var_v
