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

import numpy as np
import pytest

from mlmcdrop.analysis.norms import *


def test_uniform_grid():
    xs = uniform_grid()
    assert len(xs) == 101
    assert xs[0] == 0.0
    assert xs[-1] == 1.0
    np.testing.assert_allclose(np.diff(xs), 0.01)

    np.testing.assert_array_equal(uniform_grid(1), [0.0])
    np.testing.assert_allclose(uniform_grid(3, (-1, 1)), [-1.0, 0.0, 1.0])

    with pytest.raises(ValueError):
        uniform_grid(0)
    with pytest.raises(ValueError):
        uniform_grid(5, (1.0, 0.0))


def test_l1_norm_includes_endpoints():
    xs = uniform_grid(101)
    assert l1_norm(GridFunction(xs, np.ones(101))) == pytest.approx(1.01)
    assert l1_norm(GridFunction(xs, np.zeros(101))) == 0.0
    assert l1_norm(GridFunction(xs, -np.ones(101))) == pytest.approx(1.01)


def test_l1_norm_sine():
    xs = uniform_grid(1001)
    assert l1_norm(GridFunction(xs, np.sin(np.pi * xs))) == pytest.approx(2 / np.pi, rel=1e-5)


def test_l1_norm_components():
    xs = uniform_grid(3)
    values = np.array([[1.0, -2.0], [3.0, 0.0], [0.0, 4.0]])
    np.testing.assert_allclose(l1_norm(GridFunction(xs, values)), [2.0, 3.0])


def test_single_point_grid():
    g = GridFunction([0.5], [-0.25])
    assert g.dx == 1.0
    assert len(g) == 1
    assert l1_norm(g) == 0.25
    assert l1_norm(GridFunction([0.5], [-0.25], dx=0.1)) == pytest.approx(0.025)


def test_grid_function_validation():
    with pytest.raises(ValueError, match="uniformly spaced"):
        GridFunction([0.0, 0.1, 0.3], np.zeros(3))
    with pytest.raises(ValueError, match="uniformly spaced"):
        GridFunction([1.0, 0.5, 0.0], np.zeros(3))
    with pytest.raises(ValueError, match="one row per grid point"):
        GridFunction([0.0, 0.5, 1.0], np.zeros(2))
    with pytest.raises(ValueError):
        GridFunction([], [])
    with pytest.raises(TypeError):
        l1_norm(np.ones(3))
