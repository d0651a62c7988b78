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
Run configuration files.

A configuration is a JSON document with the sections ``evaluator``, ``grid``,
``ladder``, ``allocation``, ``study``, ``seeds`` and ``output``. Parsing fills
in defaults and validates every value, so :meth:`RunConfig.to_dict` emits a
canonical document that parses back to an equal configuration.

"""

__all__ = ["ConfigError", "RunConfig", "load_config"]

import copy
import json
import logging
import os

from .. import globalvar
from ..allocation.ladder import make_dyadic_ladder, make_geometric_ladder
from ..allocation.optimal import allocate_mean, allocate_variance, round_allocation
from ..analysis.norms import uniform_grid
from ..core.schema import Allocation, CostModelKind, FidelityLadder, MomentSet
from ..core.streams import expand_seeds
from ..core.utils import is_integer
from ..layer.analytic import AnalyticEvaluator, AnalyticFamily
from ..layer.mlp import DropoutMLP, MlpSpec, load_weights, random_mlp_weights

logger = logging.getLogger(__name__)

_SECTIONS = ("evaluator", "grid", "ladder", "allocation", "study", "seeds", "output")

_EVALUATOR_KEYS = {
    "analytic": {"type", "kind", "delta", "sigma", "mu", "epsilon"},
    "mlp": {"type", "weights"},
    "random_mlp": {
        "type",
        "layer_widths",
        "activation",
        "dropout_layer_flags",
        "p_drop",
        "weight_seed",
        "scale",
    },
}

_STUDY_DEFAULTS = {
    "t_list": [10, 100, 1000, 10000],
    "m_outer": 10,
    "confidence": globalvar.DEFAULT_CONFIDENCE,
    "threshold": globalvar.DEFAULT_STOPPING_THRESHOLD,
    "bands_t": 100,
    "workers": 1,
}


class ConfigError(ValueError):
    """
    Raised for an invalid run configuration. ``path`` is the dotted name of
    the offending field.
    """

    def __init__(self, path, msg):
        super().__init__("{}: {}".format(path, msg))
        self.path = path


def _check_keys(section, allowed, path):
    if not isinstance(section, dict):
        raise ConfigError(path, "should be an object but received {}".format(type(section).__name__))
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError("{}.{}".format(path, unknown[0]), "unknown key")


def _integer(value, path, minimum=None):
    if not is_integer(value):
        raise ConfigError(path, "should be an integer but received {!r}".format(value))
    if minimum is not None and value < minimum:
        raise ConfigError(path, "should be at least {} but received {}".format(minimum, value))
    return int(value)


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "should be a number but received {!r}".format(value))
    return value


def _integer_list(value, path, minimum=None):
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "should be a non-empty list")
    return [_integer(v, "{}[{}]".format(path, i), minimum) for i, v in enumerate(value)]


def _parse_evaluator(section, base_dir):
    path = "evaluator"
    if not isinstance(section, dict):
        raise ConfigError(path, "should be an object")
    kind = section.get("type")
    if kind not in _EVALUATOR_KEYS:
        raise ConfigError(
            path + ".type", "should be one of {} but received {!r}".format(sorted(_EVALUATOR_KEYS), kind)
        )
    _check_keys(section, _EVALUATOR_KEYS[kind], path)

    try:
        if kind == "analytic":
            family = AnalyticFamily(
                section.get("kind"),
                delta=section.get("delta", 0.0),
                sigma=section.get("sigma", 1.0),
                mu=section.get("mu", 0.0),
                epsilon=section.get("epsilon", 1.0),
            )
            return dict(type="analytic", **family.to_dict())

        if kind == "mlp":
            weights = section.get("weights")
            if not isinstance(weights, str):
                raise ConfigError(path + ".weights", "should be a file path")
            if base_dir and not os.path.isabs(weights):
                weights = os.path.normpath(os.path.join(base_dir, weights))
            return {"type": "mlp", "weights": weights}

        spec = MlpSpec(
            section.get("layer_widths"),
            activation=section.get("activation", "tanh"),
            dropout_layer_flags=section.get("dropout_layer_flags"),
            p_drop=section.get("p_drop", 0.1),
        )
        out = dict(type="random_mlp", **spec.to_dict())
        out["weight_seed"] = _integer(section.get("weight_seed", 0), path + ".weight_seed", 0)
        out["scale"] = _number(section.get("scale", 1.0), path + ".scale")
        return out
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(path, str(e))


def _parse_grid(section):
    path = "grid"
    if section is None:
        section = {}
    _check_keys(section, {"points", "n_points", "domain"}, path)
    if "points" in section:
        _check_keys(section, {"points"}, path)
        points = section["points"]
        if not isinstance(points, list) or not points:
            raise ConfigError(path + ".points", "should be a non-empty list")
        return {"points": [_number(p, "{}.points[{}]".format(path, i)) for i, p in enumerate(points)]}

    _check_keys(section, {"n_points", "domain"}, path)
    n_points = _integer(section.get("n_points", globalvar.DEFAULT_GRID_POINTS), path + ".n_points", 1)
    domain = section.get("domain", list(globalvar.DEFAULT_DOMAIN))
    if not isinstance(domain, list) or len(domain) != 2:
        raise ConfigError(path + ".domain", "should be a pair [lower, upper]")
    domain = [_number(d, path + ".domain") for d in domain]
    if n_points > 1 and not domain[1] > domain[0]:
        raise ConfigError(path + ".domain", "should be increasing but received {}".format(domain))
    return {"n_points": n_points, "domain": domain}


def _build_ladder(section):
    if "ts" in section:
        return FidelityLadder(section["ts"])
    if "dyadic_levels" in section:
        return make_dyadic_ladder(section["dyadic_levels"])
    return make_geometric_ladder(section["t0"], section["r"], section["t_max"])


def _parse_ladder(section):
    path = "ladder"
    if section is None:
        return None
    _check_keys(section, {"ts", "dyadic_levels", "t0", "r", "t_max"}, path)
    if "ts" in section:
        _check_keys(section, {"ts"}, path)
        out = {"ts": _integer_list(section["ts"], path + ".ts")}
    elif "dyadic_levels" in section:
        _check_keys(section, {"dyadic_levels"}, path)
        out = {"dyadic_levels": _integer(section["dyadic_levels"], path + ".dyadic_levels", 0)}
    else:
        _check_keys(section, {"t0", "r", "t_max"}, path)
        missing = [k for k in ("t0", "r", "t_max") if k not in section]
        if missing:
            raise ConfigError("{}.{}".format(path, missing[0]), "missing key")
        out = {
            "t0": _integer(section["t0"], path + ".t0", 2),
            "r": _number(section["r"], path + ".r"),
            "t_max": _integer(section["t_max"], path + ".t_max", 2),
        }
    try:
        _build_ladder(out)
    except ValueError as e:
        raise ConfigError(path, str(e))
    return out


def _parse_moments(value, path):
    if value == "closure":
        return "closure"
    _check_keys(value, {"mu2", "mu4"}, path)
    try:
        MomentSet(0.0, _number(value.get("mu2"), path + ".mu2"), _number(value.get("mu4"), path + ".mu4"))
    except ValueError as e:
        raise ConfigError(path, str(e))
    return {"mu2": value["mu2"], "mu4": value["mu4"]}


def _parse_allocation(section, ladder):
    path = "allocation"
    if section is None:
        return None
    _check_keys(section, {"ms", "budget", "target", "kind", "moments", "min_m"}, path)
    if "ms" in section:
        _check_keys(section, {"ms"}, path)
        ms = _integer_list(section["ms"], path + ".ms", 2)
        if ladder is not None and len(ms) != len(_build_ladder(ladder)):
            raise ConfigError(path + ".ms", "should have one count per ladder level")
        return {"ms": ms}

    _check_keys(section, {"budget", "target", "kind", "moments", "min_m"}, path)
    if "budget" not in section:
        raise ConfigError(path + ".budget", "missing key")
    out = {
        "budget": _number(section["budget"], path + ".budget"),
        "target": section.get("target", "mean"),
        "kind": section.get("kind", CostModelKind.COUPLED.value),
        "moments": _parse_moments(section.get("moments", "closure"), path + ".moments"),
        "min_m": _integer(section.get("min_m", globalvar.DEFAULT_MIN_SAMPLES), path + ".min_m", 1),
    }
    if out["budget"] <= 0:
        raise ConfigError(path + ".budget", "should be positive")
    if out["target"] not in ("mean", "variance"):
        raise ConfigError(path + ".target", "should be 'mean' or 'variance'")
    try:
        out["kind"] = CostModelKind.parse(out["kind"]).value
    except ValueError as e:
        raise ConfigError(path + ".kind", str(e))
    return out


def _parse_study(section):
    path = "study"
    section = {} if section is None else section
    _check_keys(section, set(_STUDY_DEFAULTS), path)
    out = copy.deepcopy(_STUDY_DEFAULTS)
    out.update(section)
    out["t_list"] = _integer_list(out["t_list"], path + ".t_list", 2)
    out["m_outer"] = _integer(out["m_outer"], path + ".m_outer", 2)
    out["bands_t"] = _integer(out["bands_t"], path + ".bands_t", 2)
    out["workers"] = _integer(out["workers"], path + ".workers", 1)
    for name in ("confidence", "threshold"):
        value = _number(out[name], "{}.{}".format(path, name))
        if not 0 < value < 1:
            raise ConfigError("{}.{}".format(path, name), "should be in (0, 1)")
    return out


def _parse_seeds(section, environ):
    path = "seeds"
    override = environ.get(globalvar.SEED_ENV_VAR)
    if override is not None:
        try:
            override = int(override)
        except ValueError:
            raise ConfigError(globalvar.SEED_ENV_VAR, "should be an integer but received {!r}".format(override))
        if override < 0:
            raise ConfigError(globalvar.SEED_ENV_VAR, "should be non-negative")

    if section is None:
        section = [0]
    if isinstance(section, list):
        seeds = _integer_list(section, path, 0)
        if override is not None:
            logger.info("%s overrides the configured seed list", globalvar.SEED_ENV_VAR)
            return {"master": override, "count": len(seeds)}
        return seeds

    _check_keys(section, {"master", "count"}, path)
    out = {
        "master": _integer(section.get("master", 0), path + ".master", 0),
        "count": _integer(section.get("count", 1), path + ".count", 1),
    }
    if override is not None:
        out["master"] = override
    return out


def _parse_output(section):
    path = "output"
    section = {} if section is None else section
    _check_keys(section, {"directory", "timestamp"}, path)
    directory = section.get("directory", "results")
    timestamp = section.get("timestamp", True)
    if not isinstance(directory, str):
        raise ConfigError(path + ".directory", "should be a string")
    if not isinstance(timestamp, bool):
        raise ConfigError(path + ".timestamp", "should be true or false")
    return {"directory": directory, "timestamp": timestamp}


class RunConfig:
    """
    A validated run configuration.

    Args:
        document (dict): The parsed JSON document.
        base_dir (str or None): Directory that relative weight-file paths are
            resolved against.
        environ (dict or None): Environment used for the master seed
            override; defaults to ``os.environ``.
    """

    def __init__(self, document, base_dir=None, environ=None):
        _check_keys(document, _SECTIONS, "config")
        environ = os.environ if environ is None else environ
        if "evaluator" not in document:
            raise ConfigError("evaluator", "missing section")

        self.evaluator = _parse_evaluator(document["evaluator"], base_dir)
        self.grid = _parse_grid(document.get("grid"))
        self.ladder = _parse_ladder(document.get("ladder"))
        self.allocation = _parse_allocation(document.get("allocation"), self.ladder)
        self.study = _parse_study(document.get("study"))
        self.seeds = _parse_seeds(document.get("seeds"), environ)
        self.output = _parse_output(document.get("output"))

    def to_dict(self):
        out = {
            "evaluator": self.evaluator,
            "grid": self.grid,
            "study": self.study,
            "seeds": self.seeds,
            "output": self.output,
        }
        if self.ladder is not None:
            out["ladder"] = self.ladder
        if self.allocation is not None:
            out["allocation"] = self.allocation
        return copy.deepcopy(out)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()

    def seed_list(self):
        """
        The master seeds of the run, expanded from ``{"master", "count"}``
        when given in that form.
        """
        if isinstance(self.seeds, list):
            return list(self.seeds)
        if self.seeds["count"] == 1:
            return [self.seeds["master"]]
        return [int(s) for s in expand_seeds(self.seeds["master"], self.seeds["count"])]

    def build_evaluator(self):
        """
        The configured :class:`StochasticEvaluator`.
        """
        section = self.evaluator
        if section["type"] == "analytic":
            params = {k: v for k, v in section.items() if k != "type"}
            return AnalyticEvaluator(AnalyticFamily(**params))
        if section["type"] == "mlp":
            spec, weights = load_weights(section["weights"])
            return DropoutMLP(spec, weights)

        spec = MlpSpec(
            section["layer_widths"],
            activation=section["activation"],
            dropout_layer_flags=section["dropout_layer_flags"],
            p_drop=section["p_drop"],
        )
        weights = random_mlp_weights(spec, seed=section["weight_seed"], scale=section["scale"])
        return DropoutMLP(spec, weights)

    def grid_points(self):
        if "points" in self.grid:
            return [float(p) for p in self.grid["points"]]
        return uniform_grid(self.grid["n_points"], tuple(self.grid["domain"]))

    def build_ladder(self):
        if self.ladder is None:
            raise ConfigError("ladder", "missing section")
        return _build_ladder(self.ladder)

    def moments(self):
        """
        Moments used by the variance-target allocation: a scalar MomentSet or
        ``"closure"``.
        """
        value = (self.allocation or {}).get("moments", "closure")
        if value == "closure":
            return "closure"
        return MomentSet(0.0, value["mu2"], value["mu4"])

    def continuous_allocation(self, ladder=None):
        """
        The Lagrangian allocation for the configured budget, or ``None`` for
        an explicit allocation.
        """
        if self.allocation is None:
            raise ConfigError("allocation", "missing section")
        if "ms" in self.allocation:
            return None
        ladder = self.build_ladder() if ladder is None else ladder
        section = self.allocation
        if section["target"] == "mean":
            return allocate_mean(ladder, section["budget"], section["kind"])
        return allocate_variance(ladder, section["budget"], section["kind"], self.moments())

    def build_allocation(self, ladder=None):
        """
        The integer allocation to run: the explicit counts, or the rounded
        Lagrangian allocation for the configured budget.
        """
        ladder = self.build_ladder() if ladder is None else ladder
        continuous = self.continuous_allocation(ladder)
        if continuous is None:
            return Allocation(self.allocation["ms"])
        return round_allocation(
            continuous, ladder, self.allocation["budget"], min_m=self.allocation["min_m"]
        )


def load_config(source, environ=None):
    """
    Reads and validates a run configuration.

    Args:
        source (str or dict): Path of a JSON file, or an already parsed
            document.
        environ (dict or None): Environment for the seed override.

    Returns:
        RunConfig
    """
    if isinstance(source, dict):
        return RunConfig(source, environ=environ)
    try:
        with open(source, "r") as fh:
            document = json.load(fh)
    except OSError as e:
        raise ConfigError("config", "cannot read {}: {}".format(source, e))
    except json.JSONDecodeError as e:
        raise ConfigError("config", "invalid JSON in {}: {}".format(source, e))
    return RunConfig(document, base_dir=os.path.dirname(os.path.abspath(source)), environ=environ)
