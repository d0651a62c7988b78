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
mlmcdrop: multilevel Monte Carlo estimators of the predictive mean and
variance of MC-dropout networks.

"""

# Version
from .version import __version__

# Import modules
from mlmcdrop import core, layer, estimators, allocation, analysis

# Top-level imports
from mlmcdrop.core.schema import Allocation, CostModelKind, FidelityLadder, MomentSet
from mlmcdrop.core.streams import StreamKey
from mlmcdrop.layer.analytic import AnalyticEvaluator, AnalyticFamily
from mlmcdrop.layer.mlp import DropoutMLP, MlpSpec, MlpWeights
from mlmcdrop.estimators.single_fidelity import estimate_single, outer_replicate
from mlmcdrop.estimators.multilevel import mlmc_estimate
from mlmcdrop.allocation.optimal import (
    InfeasibleBudgetError,
    allocate_mean,
    allocate_variance,
    round_allocation,
)
