"""Experiment configuration: YAML schema, validation and model construction.

A configuration is a key tree (see README for the schema) describing the
domain, time horizon, per-population Hamiltonians, the cost model, the
initial densities, one task (solve / multistart / diagnose / sweep / mms)
and solver knobs.  Validation errors carry the offending key path.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from .core import Grid, TimeGrid
from .costs import CostModel, FixedCost, LocalCost, MomentCost, SchellingCost, window_kernel
from .coupler import MFGProblem
from .hamiltonians import HamiltonianModel, ham_bellman, ham_power, ham_robust

SCHEMA_VERSION = 1

TASK_KINDS = ("solve", "multistart", "diagnose", "sweep", "mms")


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the key path."""


def _need(tree: dict, key: str, path: str):
    if key not in tree:
        raise ConfigError(f"{path}.{key}: missing required key")
    return tree[key]


def _positive(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if not v > 0:
        raise ConfigError(f"{path}: must be positive, got {v}")
    return v


def _nonnegative(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if v < 0:
        raise ConfigError(f"{path}: must be nonnegative, got {v}")
    return v


@dataclass
class ExperimentConfig:
    """Validated configuration plus the raw tree it was parsed from."""

    raw: dict
    grid: Grid | None
    time_grid: TimeGrid | None
    n_populations: int
    viscosities: tuple[float, ...]
    hamiltonians: list[HamiltonianModel]
    cost: CostModel | None
    m0: np.ndarray | None
    task: dict
    solver: dict
    seed: int
    snapshot_every: int

    def problem(self) -> MFGProblem:
        if self.grid is None:
            raise ConfigError("task.kind: this task does not define a problem")
        return MFGProblem(self.grid, self.time_grid, self.viscosities,
                          self.hamiltonians, self.cost, self.m0)

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        tree = yaml.safe_load(fh)
    if not isinstance(tree, dict):
        raise ConfigError("top level: expected a mapping")
    return parse_config(tree)


def _build_grid(tree: dict) -> Grid:
    dom = _need(tree, "domain", "config")
    extents = _need(dom, "extents", "domain")
    cells = _need(dom, "cells", "domain")
    try:
        return Grid(tuple(tuple(e) for e in extents), tuple(cells))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"domain: {exc}")


def _build_time(tree: dict) -> TimeGrid:
    tm = _need(tree, "time", "config")
    horizon = _positive(_need(tm, "horizon", "time"), "time.horizon")
    steps = int(_need(tm, "steps", "time"))
    if steps < 1:
        raise ConfigError("time.steps: must be at least 1")
    return TimeGrid(horizon, steps)


def _build_hamiltonian(spec: dict, dim: int, path: str) -> HamiltonianModel:
    variant = _need(spec, "variant", path)
    params = spec.get("params", {})
    alpha = spec.get("alpha")
    if alpha is not None:
        alpha = _nonnegative(alpha, f"{path}.alpha")
    try:
        if variant == "power":
            return ham_power(params.get("b", 1.0), params.get("c", 0.0),
                             params.get("beta", 2.0), alpha=alpha)
        if variant == "bellman":
            return ham_bellman(params.get("f", 0.0), params.get("g", 1.0),
                               params.get("gamma", 2.0), dim, alpha=alpha)
        if variant == "robust":
            return ham_robust(params.get("f", 0.0), params.get("g", 1.0),
                              params.get("sigma", 0.0),
                              params.get("delta", 1.0), dim, alpha=alpha)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")
    raise ConfigError(f"{path}.variant: unknown Hamiltonian variant {variant!r}")


def _field_from_spec(spec, path: str):
    """Scalar or {kind: cosine, amplitude, mode} field callable of x."""
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda x: np.full(np.asarray(x).shape[0], c)
    if isinstance(spec, dict):
        kind = spec.get("kind", "constant")
        if kind == "constant":
            c = float(spec.get("value", 0.0))
            return lambda x: np.full(np.asarray(x).shape[0], c)
        if kind == "cosine":
            amp = float(spec.get("amplitude", 1.0))
            mode = int(spec.get("mode", 1))

            def f(x, amp=amp, mode=mode):
                x = np.asarray(x)
                out = np.full(x.shape[0], amp)
                for axis in range(x.shape[1]):
                    out = out * np.cos(mode * np.pi * x[:, axis])
                return out
            return f
    raise ConfigError(f"{path}: unsupported field spec {spec!r}")


def _build_cost(tree: dict, npop: int) -> CostModel:
    spec = _need(tree, "cost", "config")
    variant = _need(spec, "variant", "cost")
    params = spec.get("params", {})
    constants = dict(spec.get("constants", {}))
    for name, val in constants.items():
        constants[name] = _nonnegative(val, f"cost.constants.{name}")
    if variant == "schelling":
        if npop != 2:
            raise ConfigError("cost: Schelling cost requires populations = 2")
        radius = _positive(params.get("radius", 0.2), "cost.params.radius")
        thresholds = params.get("thresholds", [0.4, 0.4])
        eta = _positive(params.get("eta", 1e-2), "cost.params.eta")
        eps = _nonnegative(params.get("eps", 0.05), "cost.params.eps")
        try:
            return SchellingCost(window_kernel(radius), thresholds, eta, eps,
                                 **constants)
        except ValueError as exc:
            raise ConfigError(f"cost: {exc}")
    if variant == "fixed":
        running = [_field_from_spec(s, "cost.params.running")
                   for s in params.get("running", [0.0] * npop)]
        terminal = [_field_from_spec(s, "cost.params.terminal")
                    for s in params.get("terminal", [0.0] * npop)]
        if len(running) != npop or len(terminal) != npop:
            raise ConfigError("cost.params: one field per population required")
        return FixedCost(npop, running, terminal, **constants)
    if variant == "local_own":
        coeff = float(params.get("coeff", 1.0))
        f_local = [
            (lambda x, m, k=k: coeff * m[:, k]) for k in range(npop)]
        return LocalCost(npop, f_local, **constants)
    if variant == "moment_mean":
        weight = float(params.get("weight", 0.5))
        weights = [lambda y: y[:, 0]]
        f_compose = [
            (lambda x, table, k=k: weight * (x[:, 0] - table[0, k]) ** 2)
            for k in range(npop)]
        return MomentCost(npop, weights, f_compose, **constants)
    raise ConfigError(f"cost.variant: unknown cost variant {variant!r}")


def _build_m0(tree: dict, grid: Grid, npop: int) -> np.ndarray:
    from .sampling import project_to_simplex, uniform_density

    spec = tree.get("m0", {"kind": "uniform"})
    kind = spec.get("kind", "uniform")
    if kind == "uniform":
        return np.tile(uniform_density(grid), (npop, 1))
    if kind == "cosine_bump":
        amplitudes = spec.get("amplitudes", [0.5] * npop)
        if len(amplitudes) != npop:
            raise ConfigError("m0.amplitudes: one amplitude per population")
        x = grid.centers()
        rows = []
        for a in amplitudes:
            a = float(a)
            if abs(a) >= 1.0:
                raise ConfigError("m0.amplitudes: |amplitude| < 1 required "
                                  "for a positive density")
            prof = np.ones(grid.n_cells)
            for axis in range(grid.dim):
                lo, hi = grid.extents[axis]
                xh = (x[:, axis] - lo) / (hi - lo)
                prof = prof * np.cos(np.pi * xh)
            rows.append(1.0 + a * prof)
        return project_to_simplex(grid, np.stack(rows))
    if kind == "file":
        path = _need(spec, "path", "m0")
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        if data.shape != (npop, grid.n_cells):
            raise ConfigError(f"m0.path: expected shape ({npop}, "
                              f"{grid.n_cells}), got {data.shape}")
        return project_to_simplex(grid, data)
    raise ConfigError(f"m0.kind: unknown initial density kind {kind!r}")


def _build_task(tree: dict) -> dict:
    spec = _need(tree, "task", "config")
    kind = _need(spec, "kind", "task")
    if kind not in TASK_KINDS:
        raise ConfigError(f"task.kind: unknown task {kind!r}")
    task = {"kind": kind, **{k: v for k, v in spec.items() if k != "kind"}}
    if kind == "multistart":
        n = int(task.get("n_starts", 4))
        if n < 2:
            raise ConfigError("task.n_starts: at least 2 starts required")
        task["n_starts"] = n
        if "seed" not in task:
            raise ConfigError("task.seed: a seed is mandatory for multistart")
    if kind == "sweep":
        if "parameter" not in task or "values" not in task:
            raise ConfigError("task: sweep requires 'parameter' and 'values'")
        if not task["values"]:
            raise ConfigError("task.values: empty sweep")
    return task


def parse_config(tree: dict) -> ExperimentConfig:
    if not isinstance(tree, dict):
        raise ConfigError("top level: expected a mapping")
    version = tree.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version}")
    task = _build_task(tree)

    solver = dict(tree.get("solver", {}))
    theta = float(solver.get("theta", 0.5))
    if not (0.0 < theta <= 1.0):
        raise ConfigError("solver.theta: must lie in (0, 1]")
    solver["theta"] = theta
    solver["tol"] = _positive(solver.get("tol", 1e-9), "solver.tol")
    solver["max_iter"] = int(solver.get("max_iter", 100))
    seed = int(tree.get("seed", 0))
    snapshot_every = int(tree.get("snapshot_every", 1))
    if snapshot_every < 1:
        raise ConfigError("snapshot_every: must be at least 1")

    if task["kind"] == "mms":
        return ExperimentConfig(raw=tree, grid=None, time_grid=None,
                                n_populations=0, viscosities=(),
                                hamiltonians=[], cost=None, m0=None,
                                task=task, solver=solver, seed=seed,
                                snapshot_every=snapshot_every)

    grid = _build_grid(tree)
    time_grid = _build_time(tree)
    npop = int(_need(tree, "populations", "config"))
    if npop < 1:
        raise ConfigError("populations: must be at least 1")
    visc = tree.get("viscosity", 1.0)
    if isinstance(visc, (int, float)):
        visc = [visc] * npop
    if len(visc) != npop:
        raise ConfigError("viscosity: one value per population required")
    viscosities = tuple(_positive(v, "viscosity") for v in visc)

    ham_spec = _need(tree, "hamiltonians", "config")
    if isinstance(ham_spec, dict):
        ham_spec = [ham_spec] * npop
    if len(ham_spec) != npop:
        raise ConfigError("hamiltonians: one spec per population required")
    hams = [_build_hamiltonian(s, grid.dim, f"hamiltonians[{i}]")
            for i, s in enumerate(ham_spec)]

    cost = _build_cost(tree, npop)
    m0 = _build_m0(tree, grid, npop)
    return ExperimentConfig(raw=tree, grid=grid, time_grid=time_grid,
                            n_populations=npop, viscosities=viscosities,
                            hamiltonians=hams, cost=cost, m0=m0, task=task,
                            solver=solver, seed=seed,
                            snapshot_every=snapshot_every)


def with_override(tree: dict, dotted: str, value: Any) -> dict:
    """Deep copy of a config tree with one dotted-path value replaced."""
    out = copy.deepcopy(tree)
    node = out
    keys = dotted.split(".")
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            raise ConfigError(f"task.parameter: path {dotted!r} not found")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"task.parameter: path {dotted!r} not found")
    node[keys[-1]] = value
    return out
