"""Batch figure rendering from run directories.

Figure kinds: `heatmap` (density in time and space, one panel per
population), `values` (initial and final value snapshots), `residuals`
(fixed-point residual curves), `psi` (certificate value against the swept
horizon, with the exact origin point prepended), `multistart` (pairwise
trajectory distances between converged starts).  Missing inputs for a kind
are skipped with a warning; malformed CSVs raise with the file name.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runview import RunView, RunViewError

FIGURE_KINDS = ("heatmap", "values", "residuals", "psi", "multistart")


def psi_series(manifest: dict) -> tuple[np.ndarray, np.ndarray]:
    """(horizons, certificate values) for a sweep run, origin prepended.

    The certificate vanishes at horizon zero, so (0, 0) is an exact data
    point and anchors the curve.
    """
    sweep = manifest.get("sweep")
    if not sweep or "psi" not in sweep:
        raise RunViewError("manifest has no sweep certificate values")
    values = np.asarray(sweep["values"], dtype=float)
    psi = np.asarray(sweep["psi"], dtype=float)
    order = np.argsort(values)
    return (np.concatenate([[0.0], values[order]]),
            np.concatenate([[0.0], psi[order]]))


def _save(fig, out_dir: Path, name: str) -> Path:
    path = out_dir / name
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _render_heatmap(view: RunView, out_dir: Path) -> list[Path]:
    written = []
    for k in view.populations():
        times, m = view.field_matrix("m", k)
        fig, ax = plt.subplots(figsize=(6, 4))
        im = ax.imshow(m, aspect="auto", origin="lower", cmap="viridis",
                       extent=(0.0, 1.0, float(times[0]), float(times[-1])))
        ax.set_xlabel("x (normalized)")
        ax.set_ylabel("t")
        ax.set_title(f"density, population {k}")
        fig.colorbar(im, ax=ax, label="m")
        written.append(_save(fig, out_dir, f"heatmap_m_p{k}.png"))
    return written


def _render_values(view: RunView, out_dir: Path) -> list[Path]:
    fig, ax = plt.subplots(figsize=(6, 4))
    for k in view.populations():
        times, v = view.field_matrix("v", k)
        x = np.linspace(0.0, 1.0, v.shape[1])
        ax.plot(x, v[0], label=f"v_{k}(t=0)")
        ax.plot(x, v[-1], linestyle="--", label=f"v_{k}(t={times[-1]:g})")
    ax.set_xlabel("x (normalized)")
    ax.set_ylabel("value")
    ax.set_title("value snapshots")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "values.png")]


def _residual_traces(manifest: dict) -> list[tuple[str, list[float]]]:
    if "run" in manifest and manifest["run"].get("trace"):
        return [("run", manifest["run"]["trace"]["residuals"])]
    if "multistart" in manifest:
        return [(f"start {i}", t["residuals"])
                for i, t in enumerate(manifest["multistart"]["traces"])]
    if "sweep" in manifest:
        return [(f"{manifest['sweep']['parameter']} = {v}",
                 run["trace"]["residuals"])
                for v, run in zip(manifest["sweep"]["values"],
                                  manifest["sweep"]["runs"])]
    return []


def _render_residuals(view: RunView, out_dir: Path) -> list[Path]:
    traces = _residual_traces(view.manifest)
    if not traces:
        warnings.warn(f"{view.run_dir}: no residual traces; skipping")
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, residuals in traces:
        ax.semilogy(range(1, len(residuals) + 1), residuals,
                    marker="o", markersize=3, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("residual")
    ax.set_title("fixed-point convergence")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "residuals.png")]


def _render_psi(view: RunView, out_dir: Path) -> list[Path]:
    try:
        horizons, psi = psi_series(view.manifest)
    except RunViewError as exc:
        warnings.warn(f"{exc}; skipping psi figure")
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(horizons, psi, marker="o")
    ax.axhline(1.0, color="red", linestyle=":", linewidth=1,
               label="certificate threshold")
    ax.set_xlabel("horizon T")
    ax.set_ylabel("certificate value")
    ax.set_title("smallness certificate vs horizon")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "psi_sweep.png")]


def _render_multistart(view: RunView, out_dir: Path) -> list[Path]:
    ms = view.manifest.get("multistart")
    if not ms or not ms.get("pairwise_distances"):
        warnings.warn(f"{view.run_dir}: no multistart pairwise distances; "
                      "skipping")
        return []
    pairs = ms["pairwise_distances"]
    labels = [f"{p['start_a']}-{p['start_b']}" for p in pairs]
    dists = [p["distance"] for p in pairs]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, dists)
    ax.axhline(10 * ms.get("tolerance", 1e-9), color="red", linestyle=":",
               linewidth=1, label="uniqueness threshold")
    ax.set_yscale("log" if min(dists, default=1) > 0 else "linear")
    ax.set_xlabel("start pair")
    ax.set_ylabel("trajectory distance")
    ax.set_title(f"multistart distances ({ms['verdict']})")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "multistart.png")]


_RENDERERS = {
    "heatmap": _render_heatmap,
    "values": _render_values,
    "residuals": _render_residuals,
    "psi": _render_psi,
    "multistart": _render_multistart,
}


def render(run_dir, figs, out_dir) -> list[Path]:
    """Render the requested figure kinds; returns the written image paths."""
    unknown = sorted(set(figs) - set(FIGURE_KINDS))
    if unknown:
        raise ValueError(f"unknown figure kinds: {', '.join(unknown)}; "
                         f"available: {', '.join(FIGURE_KINDS)}")
    view = RunView.open(run_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in figs:
        if kind in ("heatmap", "values") and not view.snapshots():
            warnings.warn(f"{view.run_dir}: no snapshots; skipping {kind}")
            continue
        written.extend(_RENDERERS[kind](view, out_dir))
    return written
