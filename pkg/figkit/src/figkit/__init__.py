"""Figure scripts for scenario outputs; see render.FIGURE_KINDS."""

from .io import InputDataError, load_fields, load_sweep
from .render import FIGURE_KINDS, FigureSpec, RenderInfo, render

__all__ = [
    "FIGURE_KINDS",
    "FigureSpec",
    "InputDataError",
    "RenderInfo",
    "load_fields",
    "load_sweep",
    "render",
]
