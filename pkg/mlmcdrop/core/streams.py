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
Reproducible random streams.

Every random draw in mlmcdrop is addressed by a :class:`StreamKey`
``(seed, replicate, level, inner, lane)``. The tuple
``(seed, replicate, level, lane)`` selects a Philox key (hashed through
:class:`numpy.random.SeedSequence`) and the inner index selects the counter
block inside that stream, so any inner draw can be produced directly without
generating the draws before it. Generating draws ``1..T`` in one call or in
several consecutive calls gives bit-identical values.

"""

__all__ = [
    "Lane",
    "StreamKey",
    "raw_words",
    "uniforms",
    "open_uniforms",
    "normals",
    "expand_seeds",
]

import enum
import functools
from collections import namedtuple

import numpy as np
from scipy.special import ndtri

_MAX_SEED = 2 ** 64
_WORDS_PER_BLOCK = 4
_TO_UNIT = 1.0 / 2 ** 53
_SHIFT = np.uint64(11)


class Lane(enum.IntEnum):
    """
    Independent sub-streams of one replicate: dropout masks and additive
    (analytic) noise never share draws.
    """

    MASK = 0
    NOISE = 1


class StreamKey(namedtuple("StreamKey", "seed replicate level inner lane")):
    """
    Address of a single stochastic evaluation.

    Args:
        seed (int): Master seed in [0, 2**64).
        replicate (int): Outer replicate index m (non-negative).
        level (int): MLMC level index (non-negative).
        inner (int): Inner draw index t, starting at 1.
        lane (Lane): Sub-stream selector.
    """

    __slots__ = ()

    def __new__(cls, seed, replicate=1, level=0, inner=1, lane=Lane.MASK):
        for name, value, minimum in (
            ("seed", seed, 0),
            ("replicate", replicate, 0),
            ("level", level, 0),
            ("inner", inner, 1),
        ):
            if isinstance(value, (bool, np.bool_)) or not isinstance(
                value, (int, np.integer)
            ):
                raise ValueError(
                    "({}) {} should be an integer but received type {}".format(
                        cls.__name__, name, type(value)
                    )
                )
            if value < minimum:
                raise ValueError(
                    "({}) {} should be at least {} but received {}".format(
                        cls.__name__, name, minimum, value
                    )
                )
        if seed >= _MAX_SEED:
            raise ValueError(
                "({}) seed should be below 2**64 but received {}".format(
                    cls.__name__, seed
                )
            )
        return super().__new__(
            cls, int(seed), int(replicate), int(level), int(inner), Lane(lane)
        )

    def with_inner(self, inner):
        return self._replace(inner=int(inner))

    def with_lane(self, lane):
        return self._replace(lane=Lane(lane))


@functools.lru_cache(maxsize=8192)
def _philox_key(seed, replicate, level, lane, sub):
    sequence = np.random.SeedSequence(
        entropy=seed, spawn_key=(replicate, level, int(lane), sub)
    )
    return tuple(int(k) for k in sequence.generate_state(2, dtype=np.uint64))


def raw_words(key, words_per_draw, count=1, lane=None, sub=0):
    """
    Raw 64-bit words for the inner draws ``key.inner .. key.inner + count - 1``.

    Each inner draw owns a fixed run of Philox counter blocks, so the words of
    draw t do not depend on how many draws were requested alongside it.

    Args:
        key (StreamKey): Address of the first draw.
        words_per_draw (int): Number of 64-bit words consumed by one draw.
        count (int): Number of consecutive inner draws.
        lane (Lane or None): Overrides ``key.lane`` when given.
        sub (int): Sub-stream index inside the lane (e.g. the dropout layer).

    Returns:
        numpy array of dtype uint64 and shape ``(count, words_per_draw)``.
    """
    if not isinstance(key, StreamKey):
        raise TypeError(
            "key should be a StreamKey but received type {}".format(type(key))
        )
    if words_per_draw < 1 or count < 0:
        raise ValueError(
            "words_per_draw should be positive and count non-negative, received {} and {}".format(
                words_per_draw, count
            )
        )
    lane = key.lane if lane is None else Lane(lane)
    blocks = -(-int(words_per_draw) // _WORDS_PER_BLOCK)
    if count == 0:
        return np.empty((0, words_per_draw), dtype=np.uint64)

    philox = np.random.Philox(
        key=np.array(
            _philox_key(key.seed, key.replicate, key.level, lane, int(sub)),
            dtype=np.uint64,
        ),
        counter=(key.inner - 1) * blocks,
    )
    words = philox.random_raw(int(count) * blocks * _WORDS_PER_BLOCK)
    return words.reshape(count, blocks * _WORDS_PER_BLOCK)[:, :words_per_draw]


def uniforms(key, n, count=1, lane=None, sub=0):
    """
    Uniform variates on [0, 1) with 53 random bits, shape ``(count, n)``.
    """
    words = raw_words(key, n, count, lane=lane, sub=sub)
    return (words >> _SHIFT).astype(np.float64) * _TO_UNIT


def open_uniforms(key, n, count=1, lane=None, sub=0):
    """
    Uniform variates on the open interval (0, 1), shape ``(count, n)``.
    """
    words = raw_words(key, n, count, lane=lane, sub=sub)
    return ((words >> _SHIFT).astype(np.float64) + 0.5) * _TO_UNIT


def normals(key, n, count=1, lane=None, sub=0):
    """
    Standard normal variates by inversion of :func:`open_uniforms`.
    """
    return ndtri(open_uniforms(key, n, count, lane=lane, sub=sub))


def expand_seeds(master, count):
    """
    Derive ``count`` distinct, reproducible seeds from a master seed.

    Args:
        master (int): Non-negative master seed.
        count (int): Number of seeds to derive.

    Returns:
        list of int
    """
    if count < 1:
        raise ValueError("count should be a positive integer but received {}".format(count))
    if master < 0:
        raise ValueError("master should be a non-negative integer but received {}".format(master))
    state = np.random.SeedSequence(int(master)).generate_state(int(count), dtype=np.uint64)
    return [int(s) for s in state]
