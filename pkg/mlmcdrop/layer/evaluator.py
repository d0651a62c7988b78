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
The stochastic evaluator interface used by every estimator, plus small
evaluators for testing and instrumentation.

An evaluator maps a batch of input points and a :class:`StreamKey` to one
draw per point and output component. Draws are addressed by the key's inner
index, so ``sample(x, key, count)`` returns the draws for inner indices
``key.inner .. key.inner + count - 1`` and any sub-range of them can be
regenerated on its own.
"""

__all__ = [
    "StochasticEvaluator",
    "ConstantEvaluator",
    "ScriptedEvaluator",
    "CountingEvaluator",
]

import threading

import numpy as np

from ..core.streams import StreamKey
from ..core.utils import require_integer


class StochasticEvaluator(object):
    """
    Base class of all stochastic evaluators.

    Subclasses set ``n_inputs`` and ``n_outputs`` and implement
    ``_sample(xs, key, count)`` returning an array of shape
    ``(count, n_points, n_outputs)``. Evaluators must be pure functions of
    their arguments so they can be shared between worker threads.
    """

    n_inputs = 1
    n_outputs = 1

    def _raise_error(self, msg):
        raise ValueError("({}) {}".format(type(self).__name__, msg))

    def prepare_inputs(self, x):
        """
        Converts ``x`` to a float array of shape ``(n_points, n_inputs)``.

        A scalar is a single point; a vector is a batch of points when the
        evaluator takes one input, or a single point otherwise.
        """
        xs = np.asarray(x, dtype=np.float64)
        if xs.ndim == 0:
            xs = xs.reshape(1, 1)
        elif xs.ndim == 1:
            xs = xs.reshape(-1, 1) if self.n_inputs == 1 else xs.reshape(1, -1)
        if xs.ndim != 2 or xs.shape[1] != self.n_inputs or xs.shape[0] == 0:
            self._raise_error(
                "inputs should have shape (n_points, {}) but received shape {}".format(
                    self.n_inputs, np.shape(x)
                )
            )
        if not np.all(np.isfinite(xs)):
            self._raise_error("inputs should be finite")
        return xs

    def sample(self, x, key, count=1):
        """
        Draws ``count`` consecutive stochastic evaluations.

        Args:
            x: Input point(s), see :meth:`prepare_inputs`.
            key (StreamKey): Key of the first draw.
            count (int): Number of consecutive inner draws.

        Returns:
            numpy array of shape ``(count, n_points, n_outputs)``.
        """
        if not isinstance(key, StreamKey):
            self._raise_error("key should be a StreamKey but received type {}".format(type(key)))
        count = require_integer("count", count, minimum=0)
        xs = self.prepare_inputs(x)
        if count == 0:
            return np.empty((0, xs.shape[0], self.n_outputs))
        return self._sample(xs, key, count)

    def evaluate(self, x, key):
        """
        A single draw at ``key``, shape ``(n_points, n_outputs)``.
        """
        return self.sample(x, key, 1)[0]

    def _sample(self, xs, key, count):
        raise NotImplementedError


class ConstantEvaluator(StochasticEvaluator):
    """
    A degenerate evaluator returning the same value(s) for every draw.

    Args:
        value (float or array): The value per output component.
    """

    def __init__(self, value=0.0):
        value = np.atleast_1d(np.asarray(value, dtype=np.float64))
        if value.ndim != 1:
            self._raise_error("value should be a scalar or a vector")
        self.value = value
        self.n_outputs = len(value)

    def _sample(self, xs, key, count):
        return np.broadcast_to(self.value, (count, xs.shape[0], self.n_outputs)).copy()


class ScriptedEvaluator(StochasticEvaluator):
    """
    Replays a fixed list of draws: inner draw t returns ``values[(t - 1) % n]``
    at every input point, independently of the other key fields.

    Args:
        values (array): Shape ``(n,)`` or ``(n, n_outputs)``.
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] == 0:
            self._raise_error("values should be a non-empty vector or matrix")
        self.values = values
        self.n_outputs = values.shape[1]

    def _sample(self, xs, key, count):
        index = (np.arange(key.inner - 1, key.inner - 1 + count)) % len(self.values)
        draws = self.values[index]
        return np.repeat(draws[:, None, :], xs.shape[0], axis=1)


class CountingEvaluator(StochasticEvaluator):
    """
    Wraps an evaluator and tallies the work done through it.

    ``passes`` counts stochastic forward passes (one per inner draw, shared by
    all points in the batch) and ``point_evaluations`` counts passes times
    points. Counters are updated under a lock so the wrapper can be shared by
    worker threads.

    Args:
        evaluator (StochasticEvaluator): The evaluator to instrument.
    """

    def __init__(self, evaluator):
        if not isinstance(evaluator, StochasticEvaluator):
            raise TypeError(
                "({}) evaluator should be a StochasticEvaluator but received type {}".format(
                    type(self).__name__, type(evaluator)
                )
            )
        self.evaluator = evaluator
        self.n_inputs = evaluator.n_inputs
        self.n_outputs = evaluator.n_outputs
        self._lock = threading.Lock()
        self.reset()

    def reset(self):
        with self._lock:
            self.passes = 0
            self.point_evaluations = 0
            self.calls = 0

    def prepare_inputs(self, x):
        return self.evaluator.prepare_inputs(x)

    def _sample(self, xs, key, count):
        draws = self.evaluator._sample(xs, key, count)
        with self._lock:
            self.passes += count
            self.point_evaluations += count * xs.shape[0]
            self.calls += 1
        return draws
