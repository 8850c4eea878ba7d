"""Scenario configuration files: a fixed JSON schema, strictly checked.

Unknown keys are hard errors so a typo cannot silently change a run.
Matrix references are file paths in the plain-text matrix format.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .dynamics import ConstantStepsize, PowerLawStepsize, uniform_initial_states
from .errors import ConfigError
from .graphs import cyclic_perron_family, perron_vector, read_matrix_file
from .objectives import Box, EuclideanBall, lasso_ensemble, quadratic_ensemble
from .scenarios import ReferencePlan, Scenario, ScenarioParts
from .schedules import (
    adversarial_order_schedule,
    fixed_schedule,
    free_switching_schedule,
    frequency_schedule,
    periodic_schedule,
    quasi_periodic_schedule,
)

_TOP_KEYS = {"name", "ensemble", "schedule", "stepsize", "initial",
             "horizon", "stride", "analysis"}
_ENSEMBLE_KEYS = {"kind", "sigma", "radius", "set", "q"}
_SET_KEYS = {"kind", "center", "radius", "lower", "upper"}
_Q_KEYS = {"seed", "low", "high", "count", "dimension"}
_SCHEDULE_KEYS = {"kind", "matrices", "seed", "permutations", "block_length",
                  "compositions", "orders", "dwell_cap"}
_STEPSIZE_KEYS = {"kind", "exponent", "value"}
_INITIAL_KEYS = {"seed", "low", "high"}
_ANALYSIS_KEYS = {"window", "tol", "references", "reference_tol"}


def _require_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _need(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing key {key!r} in {where}")
    return section[key]


def load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _build_constraint(section, where):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    _require_keys(section, _SET_KEYS, where)
    kind = _need(section, "kind", where)
    if kind == "ball":
        return EuclideanBall(np.asarray(_need(section, "center", where), dtype=float),
                             float(_need(section, "radius", where)))
    if kind == "box":
        return Box(np.asarray(_need(section, "lower", where), dtype=float),
                   np.asarray(_need(section, "upper", where), dtype=float))
    raise ConfigError(f"{where}.kind must be 'ball' or 'box', got {kind!r}")


def _build_q(section, where):
    if isinstance(section, list):
        return np.asarray(section, dtype=float)
    if isinstance(section, dict):
        _require_keys(section, _Q_KEYS, where)
        rng = np.random.Generator(np.random.Philox(key=int(_need(section, "seed", where))))
        return rng.uniform(float(_need(section, "low", where)),
                           float(_need(section, "high", where)),
                           size=(int(_need(section, "count", where)),
                                 int(_need(section, "dimension", where))))
    raise ConfigError(f"{where} must be a list of points or a seeded-draw object")


def _build_ensemble(section):
    if not isinstance(section, dict):
        raise ConfigError("'ensemble' must be an object")
    _require_keys(section, _ENSEMBLE_KEYS, "ensemble")
    kind = _need(section, "kind", "ensemble")
    q = _build_q(_need(section, "q", "ensemble"), "ensemble.q")
    if kind == "lasso":
        return lasso_ensemble(q, float(section.get("sigma", 0.1)),
                              float(_need(section, "radius", "ensemble")))
    if kind == "quadratic":
        return quadratic_ensemble(q, _build_constraint(_need(section, "set", "ensemble"),
                                                       "ensemble.set"))
    raise ConfigError(f"ensemble.kind must be 'lasso' or 'quadratic', got {kind!r}")


def _build_schedule(section, ensemble, base_dir):
    if not isinstance(section, dict):
        raise ConfigError("'schedule' must be an object")
    _require_keys(section, _SCHEDULE_KEYS, "schedule")
    kind = _need(section, "kind", "schedule")
    paths = _need(section, "matrices", "schedule")
    if not isinstance(paths, list) or not paths:
        raise ConfigError("schedule.matrices must be a nonempty list of file paths")
    library = []
    for p in paths:
        full = p if os.path.isabs(p) else os.path.join(base_dir, p)
        if not os.path.exists(full):
            raise ConfigError(f"matrix file not found: {full}")
        library.append(read_matrix_file(full))
    seed = int(section.get("seed", 0))
    if kind == "fixed":
        return fixed_schedule(library[0])
    if kind == "periodic":
        return periodic_schedule(library)
    if kind == "quasi_periodic":
        return quasi_periodic_schedule(library, seed=seed,
                                       overrides=section.get("permutations"))
    if kind == "frequency":
        return frequency_schedule(library, int(_need(section, "block_length", "schedule")),
                                  seed=seed, compositions=section.get("compositions"))
    if kind == "free":
        return free_switching_schedule(library, seed=seed)
    if kind == "adversarial":
        orders = _need(section, "orders", "schedule")
        if not (isinstance(orders, list) and len(orders) == 2):
            raise ConfigError("schedule.orders must list exactly two phase orders")
        return adversarial_order_schedule(
            library, tuple(orders[0]), tuple(orders[1]), ensemble,
            dwell_cap=int(section.get("dwell_cap", 10**6)),
        )
    raise ConfigError(f"unknown schedule.kind {kind!r}")


def _build_stepsize(section):
    if section is None:
        return PowerLawStepsize(0.6)
    _require_keys(section, _STEPSIZE_KEYS, "stepsize")
    kind = _need(section, "kind", "stepsize")
    if kind == "power":
        return PowerLawStepsize(float(_need(section, "exponent", "stepsize")))
    if kind == "constant":
        return ConstantStepsize(float(_need(section, "value", "stepsize")))
    raise ConfigError(f"stepsize.kind must be 'power' or 'constant', got {kind!r}")


def _build_initial(section, n, m, seed_override):
    if isinstance(section, list):
        states = np.asarray(section, dtype=float)
        if states.shape != (n, m):
            raise ConfigError(f"initial states shape {states.shape} != ({n}, {m})")
        return states
    if isinstance(section, dict):
        _require_keys(section, _INITIAL_KEYS, "initial")
        seed = int(_need(section, "seed", "initial")) if seed_override is None else seed_override
        return uniform_initial_states(n, m, seed,
                                      float(_need(section, "low", "initial")),
                                      float(_need(section, "high", "initial")))
    raise ConfigError("'initial' must be a state list or a seeded-draw object")


def _reference_plans(section, schedule, ensemble):
    if section is None:
        return []
    _require_keys(section, _ANALYSIS_KEYS, "analysis")
    names = section.get("references", [])
    tol = float(section.get("reference_tol", section.get("tol", 1e-3)))
    plans = []
    n = ensemble.n
    for name in names:
        if name == "uniform":
            plans.append(ReferencePlan("uniform", np.full(n, 1.0 / n), tol))
        elif name == "stationary":
            plans.append(ReferencePlan("stationary-weighted",
                                       perron_vector(schedule.library[0]).weights, tol))
        elif name == "family":
            fam = cyclic_perron_family(list(schedule.library))
            plans.append(ReferencePlan("period-averaged", fam.mean_weights(), tol))
        elif name == "product":
            fam = cyclic_perron_family(list(reversed(schedule.library)))
            plans.append(ReferencePlan("product-shortcut", fam.vectors[0].weights,
                                       tol, role="foil"))
        else:
            raise ConfigError(f"unknown reference {name!r}; use uniform, stationary, "
                              "family or product")
    return plans


def scenario_from_config(cfg: dict, base_dir: str = ".") -> Scenario:
    """Wrap a validated config dict as a runnable scenario."""
    _require_keys(cfg, _TOP_KEYS, "config")
    name = cfg.get("name", "custom")
    ensemble = _build_ensemble(_need(cfg, "ensemble", "config"))
    horizon = int(_need(cfg, "horizon", "config"))
    stride = int(cfg.get("stride", 100))
    analysis = cfg.get("analysis")
    window = int(analysis.get("window", 5000)) if analysis else 5000
    tol = float(analysis.get("tol", 1e-3)) if analysis else 1e-3

    def builder(seed=None):
        schedule = _build_schedule(_need(cfg, "schedule", "config"), ensemble, base_dir)
        initial = _build_initial(_need(cfg, "initial", "config"),
                                 schedule.n, ensemble.dimension, seed)
        return ScenarioParts(
            ensemble=ensemble, schedule=schedule, initial=initial,
            horizon=horizon, stride=stride, window=window, tol=tol,
            references=_reference_plans(analysis, schedule, ensemble),
            stepsize=_build_stepsize(cfg.get("stepsize")),
            config_echo=dict(cfg),
        )

    return Scenario(name, "user configuration", builder)
