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
Least-squares power-law fits on log-log axes.
"""

__all__ = ["SlopeFit", "loglog_slope_fit"]

from collections import namedtuple

import numpy as np
from scipy import stats

from .. import globalvar

SlopeFit = namedtuple("SlopeFit", "slope intercept ci_lower ci_upper confidence stderr n")


def loglog_slope_fit(ts, ys, confidence=globalvar.DEFAULT_CONFIDENCE):
    """
    Fits ``log y = intercept + slope * log t`` by ordinary least squares.

    The confidence interval of the slope uses the t-distribution with
    ``n - 2`` degrees of freedom.

    Args:
        ts (list): Positive abscissae (e.g. inner fidelities).
        ys (list): Positive values.
        confidence (float): Confidence level in (0, 1).

    Returns:
        SlopeFit
    """
    ts = np.asarray(ts, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if ts.shape != ys.shape or ts.ndim != 1:
        raise ValueError(
            "ts and ys should be vectors of equal length but received shapes {} and {}".format(
                ts.shape, ys.shape
            )
        )
    if len(ts) < 3:
        raise ValueError("at least 3 points are needed but received {}".format(len(ts)))
    if np.any(ts <= 0) or np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise ValueError("ts and ys should be positive and finite for a log-log fit")
    if not 0 < confidence < 1:
        raise ValueError("confidence should be in (0, 1) but received {}".format(confidence))

    fit = stats.linregress(np.log(ts), np.log(ys))
    half_width = stats.t.ppf(0.5 + confidence / 2, len(ts) - 2) * fit.stderr
    return SlopeFit(
        fit.slope,
        fit.intercept,
        fit.slope - half_width,
        fit.slope + half_width,
        confidence,
        fit.stderr,
        len(ts),
    )
