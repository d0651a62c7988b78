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
Forward-only multilayer perceptron with keyed MC-dropout masks.

Hidden layers compute ``z_{k+1} = sigma(W_k z_k + b_k)`` and the output layer
is affine. On every flagged hidden layer a Bernoulli mask is drawn per forward
pass and applied with inverted-dropout scaling, ``z * mask / (1 - p_drop)``, so
that the dropout mean of a linear network equals the deterministic network.

"""

__all__ = [
    "MlpSpec",
    "MlpWeights",
    "WeightFileError",
    "DropoutMLP",
    "draw_mask",
    "forward_dropout",
    "deterministic_forward",
    "random_mlp_weights",
    "save_weights",
    "load_weights",
]

import logging
import warnings

import numpy as np

from .. import globalvar
from ..core.streams import Lane, uniforms
from ..core.utils import (
    format_float,
    is_integer,
    is_real_iterable,
    require_integer,
    require_probability,
)
from .evaluator import StochasticEvaluator

logger = logging.getLogger(__name__)

_ACTIVATIONS = {
    "tanh": np.tanh,
    "relu": lambda z: np.maximum(z, 0.0),
    "linear": lambda z: z,
}

# bound on the number of hidden activations held in memory by one chunk
_MAX_CHUNK_ELEMENTS = 4000000

# below this drop probability the masks are all ones for any practical run
_NEGLIGIBLE_P_DROP = 1e-9


class WeightFileError(ValueError):
    """
    Raised when a weight file is malformed or disagrees with its own header.
    """


class MlpSpec:
    """
    Architecture of a dropout MLP.

    Args:
        layer_widths (list of int): Input width, hidden widths and output width.
        activation (str): Hidden activation, one of ``tanh``, ``relu`` or
            ``linear``.
        dropout_layer_flags (list of bool or None): One flag per hidden layer;
            ``None`` flags every hidden layer.
        p_drop (float): Drop probability in (0, 1).
    """

    def __init__(self, layer_widths, activation="tanh", dropout_layer_flags=None, p_drop=0.1):
        if not is_real_iterable(layer_widths):
            self._raise_error("layer_widths should be a list of positive integers")
        layer_widths = list(layer_widths)
        if len(layer_widths) < 3:
            self._raise_error(
                "layer_widths should list the input, at least one hidden and the output width but received {}".format(
                    layer_widths
                )
            )
        if not all(is_integer(w) and w > 0 for w in layer_widths):
            self._raise_error(
                "layer_widths should be positive integers but received {}".format(layer_widths)
            )
        self.layer_widths = [int(w) for w in layer_widths]

        if activation not in _ACTIVATIONS:
            self._raise_error(
                "activation should be one of {} but received {}".format(
                    sorted(_ACTIVATIONS), activation
                )
            )
        self.activation = activation

        n_hidden = len(self.layer_widths) - 2
        if dropout_layer_flags is None:
            dropout_layer_flags = [True] * n_hidden
        dropout_layer_flags = [bool(f) for f in dropout_layer_flags]
        if len(dropout_layer_flags) != n_hidden:
            self._raise_error(
                "dropout_layer_flags should have one flag per hidden layer ({}) but received {}".format(
                    n_hidden, len(dropout_layer_flags)
                )
            )
        if not any(dropout_layer_flags):
            self._raise_error("at least one hidden layer should apply dropout")
        self.dropout_layer_flags = dropout_layer_flags

        try:
            self.p_drop = require_probability("p_drop", p_drop)
        except ValueError as err:
            self._raise_error(str(err))
        if self.p_drop < _NEGLIGIBLE_P_DROP:
            warnings.warn(
                "p_drop={} makes the evaluator effectively deterministic".format(self.p_drop),
                RuntimeWarning,
                stacklevel=2,
            )

    def _raise_error(self, msg):
        raise ValueError("({}) {}".format(type(self).__name__, msg))

    @property
    def n_inputs(self):
        return self.layer_widths[0]

    @property
    def n_outputs(self):
        return self.layer_widths[-1]

    @property
    def hidden_widths(self):
        return self.layer_widths[1:-1]

    def to_dict(self):
        return {
            "layer_widths": list(self.layer_widths),
            "activation": self.activation,
            "dropout_layer_flags": list(self.dropout_layer_flags),
            "p_drop": self.p_drop,
        }

    def __eq__(self, other):
        return isinstance(other, MlpSpec) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return "{}({})".format(
            type(self).__name__,
            ", ".join("{}={}".format(k, v) for k, v in self.to_dict().items()),
        )


class MlpWeights:
    """
    Weights and biases of an MLP; ``weights[k]`` has shape
    ``(layer_widths[k + 1], layer_widths[k])``.

    Args:
        weights (list of array): Per-layer weight matrices.
        biases (list of array): Per-layer bias vectors.
    """

    def __init__(self, weights, biases):
        self.weights = [np.array(w, dtype=np.float64, ndmin=2) for w in weights]
        self.biases = [np.array(b, dtype=np.float64).reshape(-1) for b in biases]
        if len(self.weights) != len(self.biases) or len(self.weights) == 0:
            self._raise_error("there should be one bias vector per weight matrix")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                self._raise_error(
                    "layer {} has weight shape {} and bias shape {}".format(k, w.shape, b.shape)
                )
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                self._raise_error(
                    "layer {} expects {} inputs but the previous layer has {} outputs".format(
                        k, w.shape[1], self.weights[k - 1].shape[0]
                    )
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                self._raise_error("layer {} has non-finite entries".format(k))

    def _raise_error(self, msg):
        raise ValueError("({}) {}".format(type(self).__name__, msg))

    @property
    def layer_widths(self):
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def check_conforms(self, spec):
        if self.layer_widths != spec.layer_widths:
            self._raise_error(
                "weights have layer widths {} but MlpSpec declares {}".format(
                    self.layer_widths, spec.layer_widths
                )
            )


def draw_mask(width, p_drop, key, layer=0, count=None):
    """
    Bernoulli dropout mask(s): each entry is 1 with probability ``1 - p_drop``.

    Args:
        width (int): Mask length.
        p_drop (float): Drop probability in (0, 1).
        key (StreamKey): Key of the (first) forward pass.
        layer (int): Hidden-layer index, selecting the sub-stream.
        count (int or None): Number of consecutive passes; ``None`` returns a
            single mask.

    Returns:
        float array of zeros and ones, shape ``(width,)`` or ``(count, width)``.
    """
    width = require_integer("width", width, minimum=1)
    p_drop = require_probability("p_drop", p_drop)
    n = 1 if count is None else require_integer("count", count, minimum=0)
    u = uniforms(key, width, n, lane=Lane.MASK, sub=layer)
    mask = (u >= p_drop).astype(np.float64)
    return mask[0] if count is None else mask


def _check_inputs(spec, weights, x):
    if not isinstance(spec, MlpSpec):
        raise TypeError("spec should be an MlpSpec but received type {}".format(type(spec)))
    if not isinstance(weights, MlpWeights):
        raise TypeError("weights should be MlpWeights but received type {}".format(type(weights)))
    weights.check_conforms(spec)
    xs = np.asarray(x, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[None, :]
    if xs.ndim != 2 or xs.shape[1] != spec.n_inputs:
        raise ValueError(
            "x should have {} entries per point but received shape {}".format(
                spec.n_inputs, np.shape(x)
            )
        )
    return xs


def _propagate(spec, weights, xs, masks):
    activation = _ACTIVATIONS[spec.activation]
    z = xs[None, :, :]
    n_hidden = len(spec.hidden_widths)
    for k in range(n_hidden):
        z = activation(z @ weights.weights[k].T + weights.biases[k])
        if masks is not None and masks[k] is not None:
            z = z * masks[k][:, None, :] / (1 - spec.p_drop)
    return z @ weights.weights[n_hidden].T + weights.biases[n_hidden]


def deterministic_forward(spec, weights, x):
    """
    The dropout-free network.

    Returns:
        array of shape ``(n_points, n_outputs)``, or ``(n_outputs,)`` for a
        single input vector.
    """
    xs = _check_inputs(spec, weights, x)
    out = _propagate(spec, weights, xs, None)[0]
    return out[0] if np.ndim(x) == 1 else out


def forward_dropout(spec, weights, x, key, count=None):
    """
    Stochastic forward pass(es) with one fresh mask per flagged layer per pass.

    The mask of hidden layer k for the pass at ``key`` is drawn from sub-stream
    k of the key's mask lane and is shared by all points in ``x``.

    Args:
        spec (MlpSpec): Architecture.
        weights (MlpWeights): Weights conforming to ``spec``.
        x (array): A single input vector or a batch ``(n_points, n_inputs)``.
        key (StreamKey): Key of the (first) pass.
        count (int or None): Number of consecutive passes.

    Returns:
        array of shape ``(n_outputs,)`` for a single vector and pass,
        otherwise ``(count, n_points, n_outputs)``.
    """
    xs = _check_inputs(spec, weights, x)
    n = 1 if count is None else require_integer("count", count, minimum=1)
    masks = [
        draw_mask(width, spec.p_drop, key, layer=k, count=n) if flag else None
        for k, (width, flag) in enumerate(zip(spec.hidden_widths, spec.dropout_layer_flags))
    ]
    out = _propagate(spec, weights, xs, masks)
    out = np.broadcast_to(out, (n, xs.shape[0], spec.n_outputs))
    if count is None and np.ndim(x) == 1:
        return out[0, 0].copy()
    return np.array(out)


class DropoutMLP(StochasticEvaluator):
    """
    Stochastic evaluator running MC-dropout passes of a fixed network.

    Passes are computed in chunks so that at most a few million hidden
    activations are held at once; chunking does not change the draws.

    Args:
        spec (MlpSpec): Architecture.
        weights (MlpWeights): Weights conforming to ``spec``.
    """

    def __init__(self, spec, weights):
        if not isinstance(spec, MlpSpec):
            raise TypeError(
                "({}) spec should be an MlpSpec but received type {}".format(
                    type(self).__name__, type(spec)
                )
            )
        weights.check_conforms(spec)
        self.spec = spec
        self.weights = weights
        self.n_inputs = spec.n_inputs
        self.n_outputs = spec.n_outputs

    def _sample(self, xs, key, count):
        widest = max(self.spec.layer_widths)
        chunk = max(1, _MAX_CHUNK_ELEMENTS // (xs.shape[0] * widest))
        if count <= chunk:
            return forward_dropout(self.spec, self.weights, xs, key, count)

        logger.debug("running %d passes in chunks of %d", count, chunk)
        out = np.empty((count, xs.shape[0], self.n_outputs))
        for start in range(0, count, chunk):
            stop = min(count, start + chunk)
            out[start:stop] = forward_dropout(
                self.spec, self.weights, xs, key.with_inner(key.inner + start), stop - start
            )
        return out

    def deterministic(self, x):
        return deterministic_forward(self.spec, self.weights, self.prepare_inputs(x))


def random_mlp_weights(spec, seed=None, scale=1.0):
    """
    Glorot-uniform random weights with zero biases, deterministic in ``seed``.

    Args:
        spec (MlpSpec): Architecture.
        seed (int or None): Seed of the weight generator.
        scale (float): Multiplier on the Glorot limit.

    Returns:
        MlpWeights
    """
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(spec.layer_widths[:-1], spec.layer_widths[1:]):
        limit = scale * np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-limit, limit, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return MlpWeights(weights, biases)


def _format_row(values):
    return " ".join(format_float(v) for v in values)


def save_weights(path, spec, weights):
    """
    Writes ``spec`` and ``weights`` to a text weight file.

    The file starts with the magic line, then ``key: value`` header lines for
    ``layer_widths``, ``activation``, ``dropout_layer_flags`` and ``p_drop``,
    then for each layer k a ``W<k> rows cols`` line followed by the rows of the
    matrix and a ``b<k> n`` line followed by the bias on one line.
    """
    weights.check_conforms(spec)
    lines = [
        globalvar.WEIGHT_FILE_MAGIC,
        "layer_widths: " + " ".join(str(w) for w in spec.layer_widths),
        "activation: " + spec.activation,
        "dropout_layer_flags: " + " ".join(str(int(f)) for f in spec.dropout_layer_flags),
        "p_drop: " + format_float(spec.p_drop),
    ]
    for k, (w, b) in enumerate(zip(weights.weights, weights.biases)):
        lines.append("W{} {} {}".format(k, *w.shape))
        lines.extend(_format_row(row) for row in w)
        lines.append("b{} {}".format(k, len(b)))
        lines.append(_format_row(b))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _parse_numbers(text, cast, path, what):
    try:
        return [cast(v) for v in text.split()]
    except ValueError:
        raise WeightFileError("{}: cannot parse {} from '{}'".format(path, what, text))


def _read_block(lines, position, name, shape, path):
    if position >= len(lines):
        raise WeightFileError("{}: missing block {}".format(path, name))
    header = lines[position].split()
    expected = [name] + [str(s) for s in shape]
    if header != expected:
        raise WeightFileError(
            "{}: expected block header '{}' but found '{}'".format(
                path, " ".join(expected), lines[position]
            )
        )
    n_rows = shape[0] if len(shape) == 2 else 1
    n_cols = shape[-1]
    rows = lines[position + 1 : position + 1 + n_rows]
    if len(rows) != n_rows:
        raise WeightFileError("{}: block {} is truncated".format(path, name))
    values = [_parse_numbers(r, float, path, name) for r in rows]
    if any(len(r) != n_cols for r in values):
        raise WeightFileError(
            "{}: block {} should have {} values per row".format(path, name, n_cols)
        )
    return np.array(values).reshape(shape), position + 1 + n_rows


def load_weights(path):
    """
    Reads a weight file written by :func:`save_weights`.

    Returns:
        tuple ``(MlpSpec, MlpWeights)``

    Raises:
        WeightFileError: the file is malformed or a block disagrees with the
            header's layer widths.
    """
    with open(path) as f:
        lines = [l.strip() for l in f if l.strip()]

    if not lines or lines[0] != globalvar.WEIGHT_FILE_MAGIC:
        raise WeightFileError("{}: not an mlmcdrop weight file".format(path))

    header = {}
    position = 1
    while position < len(lines) and ":" in lines[position]:
        key, _, value = lines[position].partition(":")
        header[key.strip()] = value.strip()
        position += 1

    missing = {"layer_widths", "activation", "dropout_layer_flags", "p_drop"} - set(header)
    if missing:
        raise WeightFileError("{}: header is missing {}".format(path, sorted(missing)))

    widths = _parse_numbers(header["layer_widths"], int, path, "layer_widths")
    flags = _parse_numbers(header["dropout_layer_flags"], int, path, "dropout_layer_flags")
    p_drop = _parse_numbers(header["p_drop"], float, path, "p_drop")
    try:
        spec = MlpSpec(widths, header["activation"], [bool(f) for f in flags], p_drop[0] if p_drop else None)
    except (TypeError, ValueError) as err:
        raise WeightFileError("{}: invalid header: {}".format(path, err))

    weights, biases = [], []
    for k, (n_in, n_out) in enumerate(zip(widths[:-1], widths[1:])):
        w, position = _read_block(lines, position, "W{}".format(k), (n_out, n_in), path)
        b, position = _read_block(lines, position, "b{}".format(k), (n_out,), path)
        weights.append(w)
        biases.append(b)
    if position != len(lines):
        raise WeightFileError("{}: unexpected content after the last layer".format(path))

    try:
        return spec, MlpWeights(weights, biases)
    except ValueError as err:
        raise WeightFileError("{}: {}".format(path, err))
