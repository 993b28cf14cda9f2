"""Static-figure post-processing for mean field game run directories."""

from .render import FIGURE_KINDS, psi_series, render
from .runview import RunView, RunViewError, Snapshot

__version__ = "0.1.0"

__all__ = ["FIGURE_KINDS", "psi_series", "render", "RunView", "RunViewError",
           "Snapshot"]
