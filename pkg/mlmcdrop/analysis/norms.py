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

__all__ = ["GridFunction", "uniform_grid", "l1_norm"]

import numpy as np

from .. import globalvar
from ..core.utils import require_integer

# relative tolerance on the spacing of a uniform grid
_SPACING_RTOL = 1e-12


class GridFunction:
    """
    Values of a (possibly vector-valued) function on a uniform grid.

    Args:
        xs (array): Strictly increasing, uniformly spaced abscissae.
        values (array): Shape ``(n_points,)`` or ``(n_points, n_outputs)``.
        dx (float or None): Grid spacing; inferred from ``xs`` when omitted,
            and 1 for a single-point grid.
    """

    def __init__(self, xs, values, dx=None):
        xs = np.asarray(xs, dtype=np.float64).reshape(-1)
        values = np.asarray(values, dtype=np.float64)
        if values.shape[:1] != xs.shape:
            self._raise_error(
                "values should have one row per grid point but received shapes {} and {}".format(
                    values.shape, xs.shape
                )
            )
        if len(xs) == 0:
            self._raise_error("the grid should contain at least one point")

        if len(xs) > 1:
            steps = np.diff(xs)
            spacing = (xs[-1] - xs[0]) / (len(xs) - 1)
            if spacing <= 0 or np.any(np.abs(steps - spacing) > _SPACING_RTOL * max(1.0, abs(spacing)) * len(xs)):
                self._raise_error("grid points should be strictly increasing and uniformly spaced")
            if dx is None:
                dx = spacing
        elif dx is None:
            dx = 1.0

        self.xs = xs
        self.values = values
        self.dx = float(dx)

    def _raise_error(self, msg):
        raise ValueError("({}) {}".format(type(self).__name__, msg))

    def __len__(self):
        return len(self.xs)


def uniform_grid(n_points=globalvar.DEFAULT_GRID_POINTS, domain=globalvar.DEFAULT_DOMAIN):
    """
    ``n_points`` equally spaced points covering ``domain``, endpoints included.
    """
    n_points = require_integer("n_points", n_points, minimum=1)
    lower, upper = (float(v) for v in domain)
    if n_points > 1 and not upper > lower:
        raise ValueError("domain should be an increasing pair but received {}".format(domain))
    if n_points == 1:
        return np.array([lower])
    return np.linspace(lower, upper, n_points)


def l1_norm(g):
    """
    Discrete L1 proxy ``sum_i |g(x_i)| dx``: every grid point, endpoints
    included, carries weight ``dx``.

    Returns:
        float for a scalar function, or one value per output component.
    """
    if not isinstance(g, GridFunction):
        raise TypeError("g should be a GridFunction but received type {}".format(type(g)))
    norm = np.abs(g.values).sum(axis=0) * g.dx
    return norm.item() if norm.ndim == 0 else norm
