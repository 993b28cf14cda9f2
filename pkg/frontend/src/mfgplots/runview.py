"""Read-only view of a solver run directory (manifest + CSV snapshots)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SUPPORTED_SCHEMA_VERSIONS = {1}


class RunViewError(ValueError):
    """Missing or malformed run artifacts; the message names the file."""


@dataclass
class Snapshot:
    file: str
    quantity: str
    population: int
    time_index: int
    time: float


@dataclass
class RunView:
    """Parsed manifest plus lazily loaded snapshot tables.

    Snapshot CSVs are read on first access and cached; the run directory is
    never written to.
    """

    run_dir: Path
    manifest: dict
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def open(cls, run_dir) -> "RunView":
        run_dir = Path(run_dir)
        path = run_dir / "manifest.json"
        if not path.is_file():
            raise RunViewError(f"{path}: manifest not found")
        try:
            manifest = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise RunViewError(f"{path}: malformed JSON ({exc})")
        version = manifest.get("schema_version")
        if version not in SUPPORTED_SCHEMA_VERSIONS:
            raise RunViewError(
                f"{path}: unsupported schema_version {version!r}")
        return cls(run_dir=run_dir, manifest=manifest)

    @property
    def task(self) -> str:
        return self.manifest.get("task", "")

    def snapshots(self, quantity: str | None = None) -> list[Snapshot]:
        run = self.manifest.get("run", {})
        out = [Snapshot(**s) for s in run.get("snapshots", [])]
        if quantity is not None:
            out = [s for s in out if s.quantity == quantity]
        return out

    def load_field(self, file_name: str) -> np.ndarray:
        """Values column of one snapshot CSV; coordinates are dropped."""
        if file_name not in self._cache:
            path = self.run_dir / file_name
            if not path.is_file():
                raise FileNotFoundError(str(path))
            try:
                data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
            except ValueError as exc:
                raise RunViewError(f"{path}: malformed CSV ({exc})")
            if data.ndim != 2 or data.shape[1] < 2:
                raise RunViewError(f"{path}: malformed CSV (expected "
                                   "cell_index, coordinates, value columns)")
            self._cache[file_name] = data[:, -1]
        return self._cache[file_name]

    def field_matrix(self, quantity: str, population: int) -> tuple[np.ndarray, np.ndarray]:
        """(times, values) with values of shape (n_snapshots, n_cells)."""
        snaps = sorted((s for s in self.snapshots(quantity)
                        if s.population == population),
                       key=lambda s: s.time_index)
        if not snaps:
            raise RunViewError(f"{self.run_dir}: no '{quantity}' snapshots "
                               f"for population {population}")
        times = np.array([s.time for s in snaps])
        values = np.stack([self.load_field(s.file) for s in snaps])
        return times, values

    def populations(self) -> list[int]:
        return sorted({s.population for s in self.snapshots()})
