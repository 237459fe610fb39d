"""Uniform tensor grids on 1D/2D city domains with trapezoid quadrature.

The grid is the discretization backbone: every spatial field (revenue,
density, rent, choice shares) lives on its nodes and every integral in the
equilibrium system is the weighted sum against its precomputed trapezoid
weights. Node ordering is row-major with axis 0 varying fastest, which also
fixes the row order of every CSV export.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDomainError, InvalidResolutionError, NumericInputError


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CityGrid:
    """Uniform tensor-product grid over a closed interval or rectangle.

    Immutable after construction; safe to share across threads. ``nodes``
    has shape (node_count, dimension) and ``quad_weights`` sums to the
    domain measure (interior weight h per axis, boundary weight h/2,
    2D corners h^2/4).
    """

    dimension: int
    bounds: tuple[tuple[float, float], ...]
    nodes_per_axis: int
    axis_nodes: tuple[np.ndarray, ...]
    nodes: np.ndarray
    quad_weights: np.ndarray

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / (self.nodes_per_axis - 1) for lo, hi in self.bounds
        )

    @property
    def measure(self) -> float:
        out = 1.0
        for lo, hi in self.bounds:
            out *= hi - lo
        return out


@dataclass(frozen=True)
class Field:
    """One real value per grid node."""

    grid: CityGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.node_count,):
            raise NumericInputError(
                f"field has {vals.shape} values for a grid with "
                f"{self.grid.node_count} nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise NumericInputError("field contains non-finite values")
        object.__setattr__(self, "values", _readonly(vals))


def _normalize_bounds(dimension: int, bounds) -> tuple[tuple[float, float], ...]:
    b = np.asarray(bounds, dtype=float)
    if b.ndim == 1 and b.shape == (2,):
        b = np.tile(b, (dimension, 1))
    if b.shape != (dimension, 2):
        raise InvalidDomainError(
            f"expected {dimension} (lo, hi) pairs, got shape {b.shape}"
        )
    if not np.all(np.isfinite(b)):
        raise InvalidDomainError("bounds must be finite")
    for lo, hi in b:
        if not lo < hi:
            raise InvalidDomainError(f"degenerate interval [{lo}, {hi}]")
    return tuple((float(lo), float(hi)) for lo, hi in b)


def build_grid(dimension: int, bounds, nodes_per_axis: int) -> CityGrid:
    """Build a uniform grid with trapezoid quadrature weights.

    Parameters
    ----------
    dimension : 1 or 2
    bounds : (lo, hi) or sequence of per-axis (lo, hi) pairs
    nodes_per_axis : number of nodes per axis, at least 2
    """
    if dimension not in (1, 2):
        raise InvalidDomainError(f"dimension must be 1 or 2, got {dimension}")
    bnds = _normalize_bounds(dimension, bounds)
    n = int(nodes_per_axis)
    if n < 2:
        raise InvalidResolutionError(
            f"nodes_per_axis must be >= 2, got {nodes_per_axis}"
        )

    axis_nodes = []
    axis_weights = []
    for lo, hi in bnds:
        xs = np.linspace(lo, hi, n)
        h = (hi - lo) / (n - 1)
        w = np.full(n, h)
        w[0] = w[-1] = h / 2.0
        axis_nodes.append(_readonly(xs))
        axis_weights.append(w)

    if dimension == 1:
        nodes = axis_nodes[0][:, None].copy()
        weights = axis_weights[0]
    else:
        nx, ny = len(axis_nodes[0]), len(axis_nodes[1])
        # axis 0 fastest: (x0,y0), (x1,y0), ..., (x0,y1), ...
        xs = np.tile(axis_nodes[0], ny)
        ys = np.repeat(axis_nodes[1], nx)
        nodes = np.column_stack([xs, ys])
        weights = np.tile(axis_weights[0], ny) * np.repeat(axis_weights[1], nx)

    return CityGrid(
        dimension=dimension,
        bounds=bnds,
        nodes_per_axis=n,
        axis_nodes=tuple(axis_nodes),
        nodes=_readonly(nodes),
        quad_weights=_readonly(weights),
    )


def integrate(f: Field) -> float:
    """Trapezoid-rule integral of a node field over the domain.

    Exact for affine integrands; O(h^2) for C^2 integrands. Deterministic:
    fixed summation order via the BLAS dot product.
    """
    return float(np.dot(f.grid.quad_weights, f.values))


def write_field_csv(f: Field, path, value_name: str = "value") -> None:
    """Export a field as ``x[,y],value`` rows in node order, 10 significant digits."""
    grid = f.grid
    coord_names = ["x", "y"][: grid.dimension]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(coord_names + [value_name]) + "\n")
        for k in range(grid.node_count):
            coords = [f"{c:.10g}" for c in grid.nodes[k]]
            fh.write(",".join(coords + [f"{f.values[k]:.10g}"]) + "\n")
