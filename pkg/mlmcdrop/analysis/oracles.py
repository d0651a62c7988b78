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
Brute-force Monte Carlo oracles for the closed-form estimator variances.

Each oracle draws R independent realisations of an estimator statistic and
reports their unbiased sample variance (or covariance) with a jackknife
standard error.

"""

__all__ = [
    "OracleStatistic",
    "jackknife_variance",
    "jackknife_covariance",
    "empirical_variance_oracle",
]

import enum
import logging

import numpy as np

from ..core.streams import StreamKey, expand_seeds
from ..core.utils import parallel_map, require_integer
from ..estimators.multilevel import coupled_pair, mlmc_estimate
from ..estimators.single_fidelity import _check_evaluator, estimate_single

logger = logging.getLogger(__name__)

_MIN_REPLICATIONS = 100


class OracleStatistic(enum.Enum):
    Y = "Y"
    V = "V"
    DY = "dY"
    DV = "dV"
    COV_V = "cov_V"
    MLMC_Y = "mlmc_Y"
    MLMC_V = "mlmc_V"

    @classmethod
    def parse(cls, statistic):
        if isinstance(statistic, cls):
            return statistic
        try:
            return cls(statistic)
        except ValueError:
            raise ValueError(
                "statistic should be one of {} but received {}".format(
                    [s.value for s in cls], statistic
                )
            )


def jackknife_covariance(a, b):
    """
    Unbiased sample covariance of paired samples along the first axis and its
    jackknife standard error.

    Leave-one-out covariances use the closed form
    ``C_(-i) = ((R - 1) C - R / (R - 1) a'_i b'_i) / (R - 2)`` with centred
    samples ``a'`` and ``b'``.

    Returns:
        tuple ``(covariance, standard_error)``
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired samples should have equal shapes but received {} and {}".format(a.shape, b.shape))
    n = a.shape[0]
    if n < 3:
        raise ValueError("the jackknife needs at least 3 samples but received {}".format(n))

    da = a - a.mean(axis=0)
    db = b - b.mean(axis=0)
    products = da * db
    covariance = products.sum(axis=0) / (n - 1)
    leave_one_out = ((n - 1) * covariance - n / (n - 1) * products) / (n - 2)
    spread = np.square(leave_one_out - leave_one_out.mean(axis=0)).sum(axis=0)
    standard_error = np.sqrt((n - 1) / n * spread)
    if covariance.ndim == 0:
        return covariance.item(), standard_error.item()
    return covariance, standard_error


def jackknife_variance(samples):
    """
    Unbiased sample variance along the first axis and its jackknife standard
    error.
    """
    return jackknife_covariance(samples, samples)


def _single(evaluator, xs, params, seed, statistic):
    t = require_integer("params['t']", params.get("t"), minimum=2)

    def realise(replicate):
        estimate = estimate_single(evaluator, xs, t, StreamKey(seed, replicate=replicate))
        return estimate.y if statistic is OracleStatistic.Y else estimate.v

    return realise


def _nested(evaluator, xs, params, seed):
    t_coarse = require_integer("params['t_coarse']", params.get("t_coarse"), minimum=2)
    t_fine = require_integer("params['t_fine']", params.get("t_fine"), minimum=t_coarse + 2)

    def realise(replicate):
        return coupled_pair(evaluator, xs, t_coarse, t_fine, StreamKey(seed, replicate=replicate, level=1))

    return realise


def empirical_variance_oracle(
    evaluator, x, statistic, params, replications, seed, workers=None
):
    """
    Monte Carlo variance of an estimator statistic from ``replications``
    independent realisations.

    Statistics and their ``params``:

    - ``Y``, ``V``: single-fidelity mean / sample variance; ``{"t": T}``.
    - ``dY``, ``dV``: coupled increments; ``{"t_coarse": .., "t_fine": ..}``.
    - ``cov_V``: covariance of the nested ``V(t_fine)`` and ``V(t_coarse)``;
      same params as ``dV``.
    - ``mlmc_Y``, ``mlmc_V``: the MLMC estimators themselves;
      ``{"ladder": .., "alloc": ..}``. Realisation r runs with the r-th seed
      derived from ``seed``.

    Args:
        evaluator (StochasticEvaluator): The predictor.
        x: Input point(s).
        statistic (OracleStatistic or str): The statistic.
        params (dict): Statistic parameters.
        replications (int): Number of realisations R, at least 100.
        seed (int): Master seed.
        workers (int or None): Worker threads.

    Returns:
        tuple ``(variance, standard_error)``; floats for a single point and
        component, otherwise arrays of shape ``(n_points, n_outputs)``.
    """
    _check_evaluator(evaluator)
    statistic = OracleStatistic.parse(statistic)
    replications = require_integer("replications", replications, minimum=_MIN_REPLICATIONS)
    params = dict(params or {})
    xs = evaluator.prepare_inputs(x)
    indices = range(1, replications + 1)

    if statistic in (OracleStatistic.Y, OracleStatistic.V):
        samples = parallel_map(_single(evaluator, xs, params, seed, statistic), indices, workers)
        result = jackknife_variance(np.stack(samples))

    elif statistic in (OracleStatistic.DY, OracleStatistic.DV, OracleStatistic.COV_V):
        pairs = parallel_map(_nested(evaluator, xs, params, seed), indices, workers)
        if statistic is OracleStatistic.DY:
            result = jackknife_variance(np.stack([f.y - c.y for c, f in pairs]))
        elif statistic is OracleStatistic.DV:
            result = jackknife_variance(np.stack([f.v - c.v for c, f in pairs]))
        else:
            result = jackknife_covariance(
                np.stack([f.v for _, f in pairs]), np.stack([c.v for c, _ in pairs])
            )

    else:
        if "ladder" not in params or "alloc" not in params:
            raise ValueError("statistic {} needs params 'ladder' and 'alloc'".format(statistic.value))
        seeds = expand_seeds(seed, replications)
        estimates = parallel_map(
            lambda s: mlmc_estimate(evaluator, xs, params["ladder"], params["alloc"], s),
            seeds,
            workers,
        )
        field = "y_mlmc" if statistic is OracleStatistic.MLMC_Y else "v_mlmc"
        result = jackknife_variance(np.stack([getattr(e, field) for e in estimates]))

    logger.debug("oracle %s with R=%d: %s", statistic.value, replications, result)
    if np.ndim(x) == 0 and np.size(result[0]) == 1:
        return float(np.asarray(result[0]).reshape(-1)[0]), float(np.asarray(result[1]).reshape(-1)[0])
    return result
