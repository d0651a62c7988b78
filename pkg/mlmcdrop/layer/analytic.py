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
Synthetic predictors with closed-form moments, and the exact solution of the
singularly perturbed boundary-layer problem ``u - eps**2 u'' = 1`` on [0, 1]
with homogeneous Dirichlet conditions.
"""

__all__ = [
    "AnalyticKind",
    "AnalyticFamily",
    "AnalyticEvaluator",
    "eval_analytic",
    "analytic_moments",
    "exact_boundary_layer",
]

import enum

import numpy as np

from ..core.schema import MomentSet
from ..core.streams import Lane, normals, uniforms
from ..core.utils import require_positive
from .evaluator import StochasticEvaluator


class AnalyticKind(enum.Enum):
    UNIFORM_SCALED_SINE_U = "uniform_scaled_sine_u"
    UNIFORM_SCALED_SINE_F = "uniform_scaled_sine_f"
    UNIFORM_SCALED_SINE_PAIR = "uniform_scaled_sine_pair"
    GAUSSIAN_LOCATION = "gaussian_location"
    BOUNDARY_LAYER_NOISEFREE = "boundary_layer_noisefree"

    @classmethod
    def parse(cls, kind):
        if isinstance(kind, cls):
            return kind
        try:
            return cls(str(kind).lower())
        except ValueError:
            raise ValueError(
                "analytic kind should be one of {} but received {}".format(
                    [k.value for k in cls], kind
                )
            )


_UNIFORM_KINDS = (
    AnalyticKind.UNIFORM_SCALED_SINE_U,
    AnalyticKind.UNIFORM_SCALED_SINE_F,
    AnalyticKind.UNIFORM_SCALED_SINE_PAIR,
)


class AnalyticFamily:
    """
    Parameters of a synthetic predictor.

    The uniform kinds scale ``sin(pi x)`` (state), ``pi**2 sin(pi x)`` (source)
    or both by ``1 + omega`` with ``omega ~ Unif(-delta/2, delta/2)``; the pair
    kind returns the two components with one shared ``omega`` per draw. The
    Gaussian kind returns ``mu + sigma Z`` at every point and the boundary-layer
    kind returns the exact solution without noise.

    Args:
        kind (AnalyticKind or str): Family kind.
        delta (float): Noise width of the uniform kinds.
        sigma (float): Standard deviation of the Gaussian kind.
        mu (float): Location of the Gaussian kind.
        epsilon (float): Boundary-layer parameter.
    """

    def __init__(self, kind, delta=0.0, sigma=1.0, mu=0.0, epsilon=1.0):
        self.kind = AnalyticKind.parse(kind)
        self.delta = require_positive("delta", delta, strict=False)
        self.sigma = require_positive("sigma", sigma, strict=False)
        self.epsilon = require_positive("epsilon", epsilon)
        try:
            self.mu = float(mu)
        except (TypeError, ValueError):
            raise ValueError("mu should be a real number but received {}".format(mu))
        if not np.isfinite(self.mu):
            raise ValueError("mu should be finite but received {}".format(mu))

    @property
    def n_outputs(self):
        return 2 if self.kind is AnalyticKind.UNIFORM_SCALED_SINE_PAIR else 1

    @property
    def is_uniform(self):
        return self.kind in _UNIFORM_KINDS

    def profile(self, xs):
        """
        The deterministic factor multiplying ``1 + omega``, shape ``(n_points, n_outputs)``.
        """
        xs = np.asarray(xs, dtype=np.float64).reshape(-1, 1)
        state = np.sin(np.pi * xs)
        if self.kind is AnalyticKind.UNIFORM_SCALED_SINE_U:
            return state
        if self.kind is AnalyticKind.UNIFORM_SCALED_SINE_F:
            return np.pi ** 2 * state
        if self.kind is AnalyticKind.UNIFORM_SCALED_SINE_PAIR:
            return np.hstack([state, np.pi ** 2 * state])
        raise ValueError("({}) {} has no scaled profile".format(type(self).__name__, self.kind.value))

    def to_dict(self):
        out = {"kind": self.kind.value}
        if self.is_uniform:
            out["delta"] = self.delta
        elif self.kind is AnalyticKind.GAUSSIAN_LOCATION:
            out.update(sigma=self.sigma, mu=self.mu)
        else:
            out["epsilon"] = self.epsilon
        return out

    def __repr__(self):
        params = ", ".join("{}={}".format(k, v) for k, v in self.to_dict().items())
        return "{}({})".format(type(self).__name__, params)


def exact_boundary_layer(x, epsilon):
    """
    Exact solution ``1 - (exp(x/eps) + exp((1-x)/eps)) / (1 + exp(1/eps))``.

    Numerator and denominator are divided by ``exp(1/eps)`` so that no
    exponent is positive and small ``epsilon`` does not overflow.

    Args:
        x (float or array): Points in [0, 1].
        epsilon (float): Positive boundary-layer parameter.

    Returns:
        float or numpy array matching ``x``.
    """
    epsilon = require_positive("epsilon", epsilon)
    xs = np.asarray(x, dtype=np.float64)
    if np.any(xs < 0) or np.any(xs > 1):
        raise ValueError("x should lie in [0, 1] but received {}".format(x))

    numerator = np.exp((xs - 1) / epsilon) + np.exp(-xs / epsilon)
    value = 1 - numerator / (1 + np.exp(-1 / epsilon))
    return value.item() if value.ndim == 0 else value


class AnalyticEvaluator(StochasticEvaluator):
    """
    Stochastic evaluator for an :class:`AnalyticFamily`.

    Noise is drawn from the :attr:`Lane.NOISE` lane of the key regardless of
    the key's own lane, and one draw of ``omega`` (or ``Z``) is shared by all
    points of the batch.

    Args:
        family (AnalyticFamily): The synthetic predictor.
    """

    n_inputs = 1

    def __init__(self, family):
        if not isinstance(family, AnalyticFamily):
            raise TypeError(
                "({}) family should be an AnalyticFamily but received type {}".format(
                    type(self).__name__, type(family)
                )
            )
        self.family = family
        self.n_outputs = family.n_outputs

    def prepare_inputs(self, x):
        xs = super().prepare_inputs(x)
        if self.family.kind is not AnalyticKind.GAUSSIAN_LOCATION and (
            np.any(xs < 0) or np.any(xs > 1)
        ):
            self._raise_error("inputs should lie in [0, 1]")
        return xs

    def _sample(self, xs, key, count):
        family = self.family
        n_points = xs.shape[0]

        if family.kind is AnalyticKind.BOUNDARY_LAYER_NOISEFREE:
            exact = exact_boundary_layer(xs[:, 0], family.epsilon)
            return np.broadcast_to(exact[None, :, None], (count, n_points, 1)).copy()

        if family.kind is AnalyticKind.GAUSSIAN_LOCATION:
            z = normals(key, 1, count, lane=Lane.NOISE)
            return np.broadcast_to(
                (family.mu + family.sigma * z)[:, :, None], (count, n_points, 1)
            ).copy()

        omega = family.delta * (uniforms(key, 1, count, lane=Lane.NOISE) - 0.5)
        return (1 + omega)[:, :, None] * family.profile(xs[:, 0])[None, :, :]


def eval_analytic(family, x, key):
    """
    One draw of the synthetic predictor at ``x``.

    Returns:
        float for a scalar ``x`` and a single-output family, otherwise an
        array of shape ``(n_points, n_outputs)``.
    """
    value = AnalyticEvaluator(family).evaluate(x, key)
    if np.ndim(x) == 0 and value.size == 1:
        return value.item()
    return value


def analytic_moments(family, x):
    """
    Exact central moments ``(mu, mu2, mu4)`` of the family at ``x``.

    For the uniform kinds ``Var(omega) = delta**2 / 12`` and
    ``E[omega**4] = delta**4 / 80``, scaled by the squared and fourth powers of
    the profile. The Gaussian kind gives ``(mu, sigma**2, 3 sigma**4)`` and the
    noise-free kind ``(u(x), 0, 0)``.

    Returns:
        MomentSet with scalar fields for a scalar ``x`` and a single-output
        family, otherwise fields of shape ``(n_points, n_outputs)``.
    """
    if not isinstance(family, AnalyticFamily):
        raise TypeError("family should be an AnalyticFamily but received type {}".format(type(family)))
    xs = AnalyticEvaluator(family).prepare_inputs(x)[:, 0]
    shape = (len(xs), family.n_outputs)

    if family.is_uniform:
        profile = family.profile(xs)
        mu = profile
        mu2 = family.delta ** 2 / 12 * profile ** 2
        mu4 = family.delta ** 4 / 80 * profile ** 4
    elif family.kind is AnalyticKind.GAUSSIAN_LOCATION:
        mu = np.full(shape, family.mu)
        mu2 = np.full(shape, family.sigma ** 2)
        mu4 = np.full(shape, 3 * family.sigma ** 4)
    else:
        mu = exact_boundary_layer(xs, family.epsilon).reshape(shape)
        mu2 = np.zeros(shape)
        mu4 = np.zeros(shape)

    if np.ndim(x) == 0 and family.n_outputs == 1:
        return MomentSet(mu.item(), mu2.item(), mu4.item())
    return MomentSet(mu, mu2, mu4)
