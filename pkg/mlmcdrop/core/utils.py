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
import collections.abc
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def is_real_iterable(x):
    """
    Tests if x is an iterable and is not a string.

    Args:
        x: a variable to check for whether it is an iterable

    Returns:
        True if x is an iterable (but not a string) and False otherwise
    """
    return isinstance(x, collections.abc.Iterable) and not isinstance(x, (str, bytes))


def is_integer(x):
    """
    Tests if x is an integer (python or numpy) that is not a boolean.
    """
    return isinstance(x, (int, np.integer)) and not isinstance(x, (bool, np.bool_))


def require_integer(name, value, minimum=None):
    """
    Checks that ``value`` is an integer no smaller than ``minimum``.

    Args:
        name (str): Parameter name used in the error message.
        value: The value to check.
        minimum (int or None): Smallest allowed value.

    Returns:
        The value as a python int.
    """
    if not is_integer(value):
        raise ValueError(
            "{} should be an integer but received type {} with value {}".format(
                name, type(value), value
            )
        )
    if minimum is not None and value < minimum:
        raise ValueError(
            "{} should be at least {} but received {}".format(name, minimum, value)
        )
    return int(value)


def require_positive(name, value, strict=True):
    """
    Checks that ``value`` is a finite real number that is positive (or
    non-negative when ``strict`` is False).

    Returns:
        The value as a python float.
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValueError(
            "{} should be a real number but received type {}".format(name, type(value))
        )
    if not np.isfinite(value) or value < 0 or (strict and value == 0):
        raise ValueError(
            "{} should be a {} real number but received {}".format(
                name, "positive" if strict else "non-negative", value
            )
        )
    return value


def require_probability(name, value):
    """
    Checks that ``value`` lies in the open interval (0, 1).
    """
    value = require_positive(name, value)
    if value >= 1:
        raise ValueError("{} should be in (0, 1) but received {}".format(name, value))
    return value


def format_float(value):
    """
    Shortest text that reads back as exactly ``value``, e.g. ``0.99`` or
    ``1e-12``.
    """
    return repr(float(value))


def parallel_map(func, items, workers=None):
    """
    Applies ``func`` to every element of ``items`` and returns the results in
    input order.

    Args:
        func (callable): Function of one argument.
        items (iterable): Work items.
        workers (int or None): Number of worker threads; ``None`` or 1 runs
            serially in the calling thread.

    Returns:
        list of results, ordered as ``items``.
    """
    if workers is None or workers <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
