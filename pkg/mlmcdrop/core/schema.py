# -*- coding: utf-8 -*-
#
# Copyright 2026 The mlmcdrop developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Value types shared across mlmcdrop: central moments, fidelity ladders, cost
models and sample allocations.
"""

__all__ = ["MomentSet", "FidelityLadder", "CostModelKind", "Allocation"]

import enum
from collections import namedtuple

import numpy as np

from .utils import is_integer, is_real_iterable

# relative slack allowed on mu4 >= mu2**2 for moments computed in floating point
_MOMENT_RTOL = 1e-12


class MomentSet(namedtuple("MomentSet", "mu mu2 mu4")):
    """
    Central moments ``(mu, mu2, mu4)`` of a predictor at a point.

    The fields may be scalars or arrays of matching shape (one entry per input
    point and output component); all formulas in mlmcdrop broadcast over them.

    Args:
        mu: mean.
        mu2: variance, non-negative.
        mu4: fourth central moment, at least ``mu2**2``.
    """

    __slots__ = ()

    def __new__(cls, mu, mu2, mu4):
        mu, mu2, mu4 = (np.asarray(v, dtype=np.float64) for v in (mu, mu2, mu4))
        if mu2.ndim == 0:
            mu, mu2, mu4 = mu.item(), mu2.item(), mu4.item()

        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(mu2)) and np.all(np.isfinite(mu4))):
            raise ValueError("({}) moments should be finite".format(cls.__name__))
        if np.any(np.asarray(mu2) < 0) or np.any(np.asarray(mu4) < 0):
            raise ValueError(
                "({}) mu2 and mu4 should be non-negative but received {} and {}".format(
                    cls.__name__, mu2, mu4
                )
            )
        if np.any(np.asarray(mu4) < np.square(mu2) * (1 - _MOMENT_RTOL)):
            raise ValueError(
                "({}) mu4 should be at least mu2**2 but received mu2={} and mu4={}".format(
                    cls.__name__, mu2, mu4
                )
            )
        return super().__new__(cls, mu, mu2, mu4)

    @classmethod
    def gaussian(cls, sigma, mu=0.0):
        """Moments of a normal distribution with standard deviation ``sigma``."""
        sigma2 = np.square(sigma)
        return cls(mu, sigma2, 3 * np.square(sigma2))

    @classmethod
    def closure(cls, mu2, mu=0.0):
        """
        Moments under the zero-excess-kurtosis closure ``mu4 = 3 mu2**2``.
        """
        return cls(mu, mu2, 3 * np.square(mu2))

    @property
    def excess_fourth(self):
        """``mu4 - 3 mu2**2``, zero for Gaussian predictors."""
        return np.asarray(self.mu4) - 3 * np.square(self.mu2)


class FidelityLadder:
    """
    A strictly increasing vector of inner fidelities ``(T_0, ..., T_L)``.

    Every level must add at least two new draws to the previous one so that the
    sample variance of the new block is defined, and ``T_0 >= 2``.

    Args:
        ts (iterable of int): The fidelities.
    """

    def __init__(self, ts):
        if not is_real_iterable(ts):
            self._raise_error(
                "ts should be an iterable of integers but received type {}".format(type(ts))
            )
        ts = tuple(ts)
        if len(ts) == 0:
            self._raise_error("ts should contain at least one fidelity")
        if not all(is_integer(t) for t in ts):
            self._raise_error("ts should contain integers only but received {}".format(ts))
        ts = tuple(int(t) for t in ts)
        if ts[0] < 2:
            self._raise_error("T_0 should be at least 2 but received {}".format(ts[0]))
        for level in range(1, len(ts)):
            if ts[level] - ts[level - 1] < 2:
                self._raise_error(
                    "consecutive fidelities should increase by at least 2 but T_{} = {} and T_{} = {}".format(
                        level - 1, ts[level - 1], level, ts[level]
                    )
                )
        self._ts = ts

    def _raise_error(self, msg):
        raise ValueError("({}) {}".format(type(self).__name__, msg))

    @property
    def ts(self):
        return self._ts

    @property
    def n_levels(self):
        """The finest level index ``L``."""
        return len(self._ts) - 1

    @property
    def finest(self):
        return self._ts[-1]

    def increments(self):
        """
        New draws per level: ``(T_0, T_1 - T_0, ..., T_L - T_{L-1})``.
        """
        return np.diff(self._ts, prepend=0)

    def truncated(self, n_levels):
        """The ladder restricted to levels ``0..n_levels``."""
        return FidelityLadder(self._ts[: n_levels + 1])

    def __len__(self):
        return len(self._ts)

    def __iter__(self):
        return iter(self._ts)

    def __getitem__(self, level):
        return self._ts[level]

    def __eq__(self, other):
        return isinstance(other, FidelityLadder) and self._ts == other._ts

    def __hash__(self):
        return hash(self._ts)

    def __repr__(self):
        return "{}({})".format(type(self).__name__, list(self._ts))


class CostModelKind(enum.Enum):
    """
    How the evaluations of an allocation are priced.

    ``coupled`` reuses the coarse prefix, so level weights are
    ``(T_0, T_1 - T_0, ..., T_L - T_{L-1})``; ``uncoupled`` prices every fine
    estimator from scratch with weights ``(T_0, ..., T_L)``.
    """

    COUPLED = "coupled"
    UNCOUPLED = "uncoupled"

    @classmethod
    def parse(cls, kind):
        if isinstance(kind, cls):
            return kind
        try:
            return cls(str(kind).lower())
        except ValueError:
            raise ValueError(
                "cost model kind should be one of {} but received {}".format(
                    [k.value for k in cls], kind
                )
            )

    def weights(self, ladder):
        """
        Per-level cost weights ``a_l`` for a ladder, as an integer array.
        """
        if self is CostModelKind.COUPLED:
            return ladder.increments()
        return np.asarray(ladder.ts)


class Allocation:
    """
    Outer sample counts ``(M_0, ..., M_L)`` and the cost model that prices them.

    Allocations returned by the continuous solvers carry real counts together
    with the level weights and the target they were optimised for; realised
    allocations carry integer counts.

    Args:
        ms (iterable): Strictly positive per-level outer sample counts.
        kind (CostModelKind or str): Cost model.
        level_weights (array or None): The per-level variance weights the
            allocation was optimised against.
        target (str or None): ``"mean"`` or ``"variance"``.
    """

    def __init__(self, ms, kind=CostModelKind.COUPLED, level_weights=None, target=None):
        if not is_real_iterable(ms):
            self._raise_error("ms should be an iterable but received type {}".format(type(ms)))
        ms = np.asarray(list(ms))
        if ms.ndim != 1 or len(ms) == 0:
            self._raise_error("ms should be a non-empty vector but received {}".format(ms))
        if not np.issubdtype(ms.dtype, np.number) or np.issubdtype(ms.dtype, np.bool_):
            self._raise_error("ms should be numeric but received {}".format(ms))
        if not np.all(np.isfinite(ms)) or np.any(ms <= 0):
            self._raise_error("ms should be strictly positive but received {}".format(ms))

        self.ms = ms.astype(np.int64) if np.issubdtype(ms.dtype, np.integer) else ms.astype(np.float64)
        self.kind = CostModelKind.parse(kind)
        self.level_weights = (
            None if level_weights is None else np.asarray(level_weights, dtype=np.float64)
        )
        self.target = target

    def _raise_error(self, msg):
        raise ValueError("({}) {}".format(type(self).__name__, msg))

    @property
    def is_integral(self):
        return np.issubdtype(self.ms.dtype, np.integer)

    def check_realised(self, min_m=2):
        """
        Raises ValueError unless every count is an integer of at least ``min_m``.
        """
        if not self.is_integral:
            self._raise_error("a realised allocation needs integer counts but received {}".format(self.ms))
        if np.any(self.ms < min_m):
            self._raise_error(
                "every level needs at least {} outer samples but received {}".format(min_m, self.ms)
            )

    def __len__(self):
        return len(self.ms)

    def __iter__(self):
        return iter(self.ms.tolist())

    def __eq__(self, other):
        return (
            isinstance(other, Allocation)
            and self.kind is other.kind
            and self.ms.shape == other.ms.shape
            and bool(np.all(self.ms == other.ms))
        )

    def __repr__(self):
        return "{}({}, kind={})".format(type(self).__name__, self.ms.tolist(), self.kind.value)
