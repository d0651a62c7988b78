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

from mlmcdrop.core.schema import *


def test_moment_set_scalar_and_array():
    m = MomentSet(1.0, 2.0, 12.0)
    assert isinstance(m.mu2, float)
    assert m.excess_fourth == pytest.approx(0.0)

    arr = MomentSet(np.zeros((3, 2)), np.ones((3, 2)), 3 * np.ones((3, 2)))
    assert arr.mu2.shape == (3, 2)
    np.testing.assert_array_equal(arr.excess_fourth, np.zeros((3, 2)))


def test_moment_set_constructors():
    g = MomentSet.gaussian(2.0, mu=1.0)
    assert g == (1.0, 4.0, 48.0)
    c = MomentSet.closure(0.5)
    assert c.mu4 == pytest.approx(0.75)
    # a point mass is a valid (degenerate) distribution
    assert MomentSet(3.0, 0.0, 0.0).mu2 == 0.0


@pytest.mark.parametrize(
    "mu, mu2, mu4",
    [(0.0, -1.0, 1.0), (0.0, 2.0, 3.0), (np.nan, 1.0, 3.0), (0.0, 1.0, np.inf)],
)
def test_moment_set_validation(mu, mu2, mu4):
    with pytest.raises(ValueError):
        MomentSet(mu, mu2, mu4)


def test_fidelity_ladder():
    ladder = FidelityLadder([4, 8, 16])
    assert ladder.ts == (4, 8, 16)
    assert ladder.n_levels == 2
    assert ladder.finest == 16
    assert len(ladder) == 3
    assert list(ladder) == [4, 8, 16]
    assert ladder[1] == 8
    np.testing.assert_array_equal(ladder.increments(), [4, 4, 8])
    assert ladder.truncated(1) == FidelityLadder([4, 8])
    assert ladder == FidelityLadder((4, 8, 16))
    assert hash(ladder) == hash(FidelityLadder([4, 8, 16]))
    assert FidelityLadder([2]).n_levels == 0


@pytest.mark.parametrize("ts", [[], [1, 4], [4, 5], [4, 8, 9], [4.0, 8.0], "4,8", [8, 4]])
def test_fidelity_ladder_validation(ts):
    with pytest.raises(ValueError, match="FidelityLadder"):
        FidelityLadder(ts)


def test_cost_model_kind():
    ladder = FidelityLadder([4, 8, 16])
    assert CostModelKind.parse("Coupled") is CostModelKind.COUPLED
    assert CostModelKind.parse(CostModelKind.UNCOUPLED) is CostModelKind.UNCOUPLED
    np.testing.assert_array_equal(CostModelKind.COUPLED.weights(ladder), [4, 4, 8])
    np.testing.assert_array_equal(CostModelKind.UNCOUPLED.weights(ladder), [4, 8, 16])
    with pytest.raises(ValueError):
        CostModelKind.parse("nested")


def test_allocation():
    a = Allocation([84, 42, 21])
    assert a.is_integral
    assert a.kind is CostModelKind.COUPLED
    assert list(a) == [84, 42, 21]
    a.check_realised()
    assert a == Allocation(np.array([84, 42, 21]))
    assert a != Allocation([84, 42, 21], kind="uncoupled")

    real = Allocation([83.3, 41.7, 20.8], target="mean")
    assert not real.is_integral
    with pytest.raises(ValueError):
        real.check_realised()

    with pytest.raises(ValueError, match="at least 2"):
        Allocation([1, 5]).check_realised()


@pytest.mark.parametrize("ms", [[], [0, 3], [-1.0], [np.nan], [True, True], "12"])
def test_allocation_validation(ms):
    with pytest.raises(ValueError, match="Allocation"):
        Allocation(ms)
