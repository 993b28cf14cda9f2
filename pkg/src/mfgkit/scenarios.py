"""Bundled experiment configurations.

Each scenario is a plain config tree (see :mod:`mfgkit.config`); `scenario`
returns a deep copy so callers may override entries freely.
"""

from __future__ import annotations

import copy

_SCHELLING_BASE = {
    "schema_version": 1,
    "domain": {"extents": [[0.0, 1.0]], "cells": [100]},
    "time": {"horizon": 0.05, "steps": 100},
    "populations": 2,
    "viscosity": [1.0, 1.0],
    "hamiltonians": {"variant": "power",
                     "params": {"b": 0.5, "c": 0.0, "beta": 2.0},
                     "alpha": 1.21},
    "cost": {"variant": "schelling",
             "params": {"radius": 0.2, "thresholds": [0.4, 0.4],
                        "eta": 0.01, "eps": 0.05},
             "constants": {"C_F": 0.425, "C_G": 0.0}},
    "m0": {"kind": "cosine_bump", "amplitudes": [0.5, -0.5]},
    "solver": {"theta": 0.5, "tol": 1e-9, "max_iter": 200},
    "seed": 0,
    "snapshot_every": 10,
}

_SCENARIOS = {
    "schelling_smallT": {
        **copy.deepcopy(_SCHELLING_BASE),
        "task": {"kind": "solve"},
    },
    "schelling_largeT_sweep": {
        **copy.deepcopy(_SCHELLING_BASE),
        "domain": {"extents": [[0.0, 1.0]], "cells": [80]},
        "time": {"horizon": 0.5, "steps": 100},
        "cost": {"variant": "schelling",
                 "params": {"radius": 0.2, "thresholds": [0.7, 0.7],
                            "eta": 0.01, "eps": 0.05},
                 "constants": {"C_F": 0.725, "C_G": 0.0}},
        "solver": {"theta": 0.5, "tol": 1e-9, "max_iter": 120},
        "task": {"kind": "sweep", "parameter": "time.horizon",
                 "values": [0.1, 0.25, 0.5]},
    },
    "robust_1d": {
        "schema_version": 1,
        "domain": {"extents": [[0.0, 1.0]], "cells": [200]},
        "time": {"horizon": 0.1, "steps": 200},
        "populations": 1,
        "viscosity": [1.0],
        # uniformly convex regime: g^2 > sigma^2 / delta
        "hamiltonians": {"variant": "robust",
                         "params": {"f": 0.5, "g": 1.0, "sigma": 0.5,
                                    "delta": 1.0},
                         "alpha": 1.27},
        "cost": {"variant": "moment_mean", "params": {"weight": 0.5},
                 "constants": {"C_F": 0.5, "C_G": 0.0, "L_F": 0.5,
                               "L_G": 0.0}},
        "m0": {"kind": "cosine_bump", "amplitudes": [0.4]},
        "solver": {"theta": 0.5, "tol": 1e-9, "max_iter": 200},
        "seed": 0,
        "snapshot_every": 20,
        "task": {"kind": "diagnose"},
    },
    "robust_1d_concave": {
        "schema_version": 1,
        "domain": {"extents": [[0.0, 1.0]], "cells": [200]},
        "time": {"horizon": 0.1, "steps": 200},
        "populations": 1,
        "viscosity": [1.0],
        # concave regime: g^2 < sigma^2 / delta
        "hamiltonians": {"variant": "robust",
                         "params": {"f": 0.5, "g": 1.0, "sigma": 1.5,
                                    "delta": 1.0},
                         "alpha": 1.85},
        "cost": {"variant": "moment_mean", "params": {"weight": 0.5},
                 "constants": {"C_F": 0.5, "C_G": 0.0, "L_F": 0.5,
                               "L_G": 0.0}},
        "m0": {"kind": "cosine_bump", "amplitudes": [0.4]},
        "solver": {"theta": 0.5, "tol": 1e-9, "max_iter": 200},
        "seed": 0,
        "snapshot_every": 20,
        "task": {"kind": "diagnose"},
    },
    "decoupled_sanity": {
        "schema_version": 1,
        "domain": {"extents": [[0.0, 1.0]], "cells": [200]},
        "time": {"horizon": 0.2, "steps": 200},
        "populations": 1,
        "viscosity": [1.0],
        "hamiltonians": {"variant": "power",
                         "params": {"b": 0.5, "c": 0.0, "beta": 2.0},
                         "alpha": 1.21},
        "cost": {"variant": "fixed",
                 "params": {"running": [{"kind": "cosine", "amplitude": 0.2,
                                         "mode": 1}],
                            "terminal": [0.0]},
                 "constants": {"C_F": 0.2, "C_G": 0.0, "L_F": 0.0,
                               "L_G": 0.0}},
        "m0": {"kind": "uniform"},
        "solver": {"theta": 1.0, "tol": 1e-9, "max_iter": 50},
        "seed": 0,
        "snapshot_every": 20,
        "task": {"kind": "solve"},
    },
    "mms_convergence": {
        "schema_version": 1,
        "seed": 0,
        "task": {"kind": "mms", "amplitude": 0.05, "horizon": 0.5,
                 "temporal_steps": [8, 16, 32], "temporal_cells": 64,
                 "spatial_cells": [16, 32, 64]},
    },
}


def bundled_scenarios() -> list[str]:
    return sorted(_SCENARIOS)


def scenario(name: str) -> dict:
    if name not in _SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; "
                       f"available: {', '.join(bundled_scenarios())}")
    return copy.deepcopy(_SCENARIOS[name])
