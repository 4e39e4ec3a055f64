"""Experiment configuration: JSON ingestion, validation, defaults, echo.

Configs are plain JSON documents. Validation is itemized (every problem
reported, not just the first) and seeds are mandatory: nothing in the
harness ever seeds from the wall clock.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel
from .measures import GridDensity1D
from .meanfield import MonokineticDatum, ProductDatum

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "EXPERIMENTS"]

EXPERIMENTS = ("simulate", "fournier", "chaos", "euler-compare", "metrics-selftest")

_DEFAULT_MARGINAL_CELLS = 256


class ConfigError(ValueError):
    """Config validation failure; msg lists every offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))


def _marginal_from_spec(spec, errors, path):
    if not isinstance(spec, dict) or "type" not in spec:
        errors.append(f"{path}: marginal spec must be an object with a 'type'")
        return None
    kind = spec["type"]
    try:
        if kind == "uniform":
            return GridDensity1D.uniform(
                float(spec["lo"]), float(spec["hi"]), int(spec.get("cells", _DEFAULT_MARGINAL_CELLS))
            )
        if kind == "raised_cosine":
            return GridDensity1D.raised_cosine(
                float(spec["lo"]), float(spec["hi"]), int(spec.get("cells", _DEFAULT_MARGINAL_CELLS))
            )
        if kind == "grid":
            return GridDensity1D(
                float(spec["x_min"]), float(spec["x_max"]), np.asarray(spec["values"], dtype=float)
            )
    except (KeyError, TypeError, ValueError) as err:
        errors.append(f"{path}: {err}")
        return None
    errors.append(f"{path}: unknown marginal type {kind!r} (use uniform|raised_cosine|grid)")
    return None


def velocity_profile(spec, errors=None, path="initial.u0"):
    """Named vectorized u0 profiles for monokinetic data."""
    problems = [] if errors is None else errors
    if not isinstance(spec, dict) or "type" not in spec:
        problems.append(f"{path}: u0 spec must be an object with a 'type'")
    else:
        kind = spec["type"]
        if kind == "zero":
            return lambda x: np.zeros_like(np.asarray(x, dtype=float))
        if kind == "sine":
            amp = float(spec.get("amplitude", 1.0))
            freq = float(spec.get("frequency", 1.0))
            off = float(spec.get("offset", 0.0))
            return lambda x: off + amp * np.sin(2.0 * np.pi * freq * np.asarray(x, dtype=float))
        if kind == "linear":
            slope = float(spec.get("slope", 1.0))
            intercept = float(spec.get("intercept", 0.0))
            return lambda x: intercept + slope * np.asarray(x, dtype=float)
        problems.append(f"{path}: unknown u0 type {kind!r} (use zero|sine|linear)")
    if errors is None:
        raise ConfigError(problems)
    return None


def _datum_from_spec(spec, errors):
    if not isinstance(spec, dict) or "kind" not in spec:
        errors.append("initial: must be an object with a 'kind' (product|monokinetic)")
        return None
    kind = spec["kind"]
    if kind == "product":
        xs = spec.get("x")
        vs = spec.get("v")
        if not isinstance(xs, list) or not isinstance(vs, list) or len(xs) != len(vs) or not xs:
            errors.append("initial: product datum needs matching non-empty 'x' and 'v' marginal lists")
            return None
        xm = [_marginal_from_spec(s, errors, f"initial.x[{i}]") for i, s in enumerate(xs)]
        vm = [_marginal_from_spec(s, errors, f"initial.v[{i}]") for i, s in enumerate(vs)]
        if any(m is None for m in xm + vm):
            return None
        return ProductDatum(tuple(xm), tuple(vm))
    if kind == "monokinetic":
        rho0 = _marginal_from_spec(spec.get("rho0"), errors, "initial.rho0")
        u0 = velocity_profile(spec.get("u0", {"type": "zero"}), errors)
        eps = spec.get("epsilon", 0.0)
        if not isinstance(eps, (int, float)) or eps < 0:
            errors.append("initial.epsilon: must be a non-negative number")
            return None
        if rho0 is None or u0 is None:
            return None
        return MonokineticDatum(rho0, u0, float(eps))
    errors.append(f"initial: unknown kind {kind!r} (use product|monokinetic)")
    return None


@dataclass
class ExperimentConfig:
    """Resolved, validated experiment description."""

    experiment: str
    kernel: Kernel
    initial: object
    rng_seed: int
    n: int = 256
    n_list: list = field(default_factory=list)
    m_ref: int = 0
    trials: int = 16
    dt: float = 0.01
    t_final: float = 1.0
    epsilon_list: list = field(default_factory=lambda: [1e-3])
    grid_cells: int = 512
    observer_stride: int = 1
    checkpoint_stride: int = 5
    observable: str = "v_sin"
    suite_size: int = 200
    out_dir: str = "out"
    max_seconds: float = None
    units: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    def resolved(self) -> dict:
        """Exact effective config, embedded in every report."""
        return {
            "experiment": self.experiment,
            "kernel": self.kernel.to_dict(),
            "initial": self.raw.get("initial"),
            "rng_seed": self.rng_seed,
            "n": self.n,
            "n_list": list(self.n_list),
            "m_ref": self.m_ref,
            "trials": self.trials,
            "dt": self.dt,
            "t_final": self.t_final,
            "epsilon_list": list(self.epsilon_list),
            "grid_cells": self.grid_cells,
            "observer_stride": self.observer_stride,
            "checkpoint_stride": self.checkpoint_stride,
            "observable": self.observable,
            "suite_size": self.suite_size,
            "out_dir": self.out_dir,
            "max_seconds": self.max_seconds,
            "units": self.units,
        }


def _check_positive(doc, key, errors, kind=float, allow_missing=True):
    if key not in doc:
        if not allow_missing:
            errors.append(f"{key}: required")
        return None
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append(f"{key}: must be a number, got {val!r}")
        return None
    if val <= 0:
        errors.append(f"{key}: must be positive, got {val!r}")
        return None
    return kind(val)


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a config document; raises ConfigError listing every problem."""
    errors = []
    if not isinstance(doc, dict):
        raise ConfigError(["config root must be a JSON object"])

    experiment = doc.get("experiment")
    if experiment not in EXPERIMENTS:
        errors.append(
            f"experiment: got {experiment!r}, valid names are {', '.join(EXPERIMENTS)}"
        )

    kernel = None
    try:
        kernel = Kernel.from_dict(doc.get("kernel", {}))
    except (ValueError, TypeError, KeyError) as err:
        errors.append(f"kernel: {err}")

    initial = None
    if "initial" in doc:
        initial = _datum_from_spec(doc["initial"], errors)
    elif experiment in ("simulate", "fournier", "chaos", "euler-compare"):
        errors.append("initial: required for this experiment")

    seed = doc.get("rng_seed")
    if seed is None:
        errors.append("rng_seed: required (wall-clock seeding is not supported)")
    elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0 or seed >= 2**64:
        errors.append(f"rng_seed: must be an integer in [0, 2^64), got {seed!r}")

    n_list = doc.get("n_list", [])
    if n_list:
        ok = isinstance(n_list, list) and all(
            isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in n_list
        )
        if not ok:
            errors.append("n_list: must be a list of positive integers")
        elif any(b <= a for a, b in zip(n_list, n_list[1:])):
            errors.append("n_list: must be strictly increasing")

    dt = _check_positive(doc, "dt", errors)
    t_final = doc.get("t_final")
    if t_final is not None and (
        isinstance(t_final, bool) or not isinstance(t_final, (int, float)) or t_final < 0
    ):
        errors.append(f"t_final: must be a non-negative number, got {t_final!r}")

    for key in ("n", "m_ref", "trials", "grid_cells", "observer_stride", "checkpoint_stride", "suite_size"):
        if key in doc:
            val = doc[key]
            if isinstance(val, bool) or not isinstance(val, int) or val < 1:
                errors.append(f"{key}: must be a positive integer, got {val!r}")

    eps_list = doc.get("epsilon_list")
    if eps_list is not None:
        ok = isinstance(eps_list, list) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in eps_list
        )
        if not ok:
            errors.append("epsilon_list: must be a list of positive numbers")

    max_seconds = doc.get("max_seconds")
    if max_seconds is not None and (
        isinstance(max_seconds, bool) or not isinstance(max_seconds, (int, float)) or max_seconds <= 0
    ):
        errors.append(f"max_seconds: must be a positive number or null, got {max_seconds!r}")

    known = {
        "experiment", "kernel", "initial", "rng_seed", "n", "n_list", "m_ref",
        "trials", "dt", "t_final", "epsilon_list", "grid_cells", "observer_stride",
        "checkpoint_stride", "observable", "suite_size", "out_dir", "max_seconds", "units",
    }
    for key in doc:
        if key not in known:
            errors.append(f"{key}: unknown field")

    if errors:
        raise ConfigError(errors)

    cfg = ExperimentConfig(
        experiment=experiment,
        kernel=kernel,
        initial=initial,
        rng_seed=int(seed),
        raw=dict(doc),
    )
    if "n" in doc:
        cfg.n = int(doc["n"])
    cfg.n_list = list(n_list) if n_list else []
    if dt is not None:
        cfg.dt = dt
    if t_final is not None:
        cfg.t_final = float(t_final)
    cfg.trials = int(doc.get("trials", 16))
    cfg.m_ref = int(doc.get("m_ref", 8 * max(cfg.n_list) if cfg.n_list else 0))
    cfg.grid_cells = int(doc.get("grid_cells", 512))
    cfg.observer_stride = int(doc.get("observer_stride", 1))
    cfg.checkpoint_stride = int(doc.get("checkpoint_stride", 5))
    cfg.observable = str(doc.get("observable", "v_sin"))
    cfg.suite_size = int(doc.get("suite_size", 200))
    cfg.out_dir = str(doc.get("out_dir", "out"))
    if eps_list is not None:
        cfg.epsilon_list = [float(v) for v in eps_list]
    if max_seconds is not None:
        cfg.max_seconds = float(max_seconds)
    cfg.units = dict(doc.get("units", {}))

    post = []
    if cfg.experiment in ("fournier", "chaos", "euler-compare") and not cfg.n_list:
        post.append("n_list: required for this experiment")
    if cfg.experiment == "chaos" and cfg.n_list and cfg.m_ref < max(cfg.n_list):
        post.append(f"m_ref: must be >= max(n_list) = {max(cfg.n_list)}, got {cfg.m_ref}")
    if cfg.experiment == "euler-compare" and not isinstance(cfg.initial, MonokineticDatum):
        post.append("initial: euler-compare needs a monokinetic datum")
    if cfg.experiment == "fournier":
        if not isinstance(cfg.initial, ProductDatum):
            post.append("initial: fournier needs a product datum")
        elif cfg.initial.dim > 2:
            post.append("initial: fournier supports dimension 1 or 2 only")
    if post:
        raise ConfigError(post)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError([f"not valid JSON: {err}"]) from err
    return parse_config(doc)
