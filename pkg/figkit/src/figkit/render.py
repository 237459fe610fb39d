"""The five figure kinds, rendered from scenario CSV outputs.

No model quantities are recomputed here: every curve is a CSV column (the
residential distributions are the pointwise product of the exported share
and density columns, mirroring how the runs define them). Rendering is
deterministic: fixed palette, fixed panel order (ascending sweep value,
left-to-right then top-to-bottom), no randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from .io import FieldTable, InputDataError, load_fields, load_sweep

FIGURE_KINDS = (
    "distribution-panels",
    "wages-vs-param",
    "masses-vs-param",
    "rent-panels",
    "occupancy-map-2d",
)

# role palette: home gray; firms orange/blue/green (extended cyclically);
# remote curves reuse the firm color dashed; ties get the reserved color
HOME_COLOR = "#8c8c8c"
FIRM_COLORS = ["#e07b39", "#2e6fb7", "#3f9b4f", "#9a5bb5", "#c23b4e", "#b8923a"]
REMOTE_2D_COLOR = "#7d9dbd"
TIE_COLOR = "#222222"


@dataclass(frozen=True)
class FigureSpec:
    input_dir: Path
    kind: str
    output_path: Path

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise InputDataError(
                f"unknown figure kind '{self.kind}'; expected one of "
                + ", ".join(FIGURE_KINDS)
            )


@dataclass
class RenderInfo:
    output_path: Path
    panel_count: int
    kind: str


def _firm_color(i: int) -> str:
    return FIRM_COLORS[i % len(FIRM_COLORS)]


def _panel_axes(n: int, width=4.2, height=3.0):
    cols = 2 if n > 1 else 1
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(
        rows, cols, figsize=(width * cols, height * rows), squeeze=False
    )
    flat = axes.ravel()
    for ax in flat[n:]:
        ax.set_visible(False)
    return fig, flat[:n]


def _load_sweep_fields(sweep) -> list[tuple[float, FieldTable]]:
    out = []
    for v in sweep.values:
        out.append((v, load_fields(sweep.field_path(v))))
    if not out:
        # single-solve directory: the runner writes fields_solve.csv
        path = sweep.directory / "fields_solve.csv"
        out.append((float("nan"), load_fields(path)))
    return out


def _require_1d(table: FieldTable, kind: str):
    if table.dimension != 1:
        raise InputDataError(
            f"{table.path}: figure kind '{kind}' needs 1D fields (no 'y' column)"
        )


def _distribution_panels(sweep, spec) -> RenderInfo:
    panels = _load_sweep_fields(sweep)
    fig, axes = _panel_axes(len(panels))
    for ax, (value, table) in zip(axes, panels):
        _require_1d(table, spec.kind)
        df = table.frame
        x = df["x"].to_numpy()
        for col, label in zip(table.share_columns, table.option_labels):
            dist = df[col].to_numpy() * df["density"].to_numpy()
            if label == "home":
                ax.plot(x, dist, color=HOME_COLOR, label="home")
            elif label.startswith("remote"):
                idx = int(label.split("_")[1]) - 1
                ax.plot(x, dist, color=_firm_color(idx), linestyle="--", label=label)
            else:
                idx = int(label.split("_")[1]) - 1
                ax.plot(x, dist, color=_firm_color(idx), label=label)
        title = f"{sweep.wages['parameter'].iloc[0]} = {value:g}" if np.isfinite(
            value
        ) else "solve"
        ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("residential distribution")
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=150)
    plt.close(fig)
    return RenderInfo(spec.output_path, len(panels), spec.kind)


def _rent_panels(sweep, spec) -> RenderInfo:
    panels = _load_sweep_fields(sweep)
    fig, axes = _panel_axes(len(panels))
    for ax, (value, table) in zip(axes, panels):
        _require_1d(table, spec.kind)
        df = table.frame
        ax.plot(df["x"].to_numpy(), df["rent"].to_numpy(), color="#555555")
        title = f"{sweep.wages['parameter'].iloc[0]} = {value:g}" if np.isfinite(
            value
        ) else "solve"
        ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("rent")
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=150)
    plt.close(fig)
    return RenderInfo(spec.output_path, len(panels), spec.kind)


def _lines_vs_param(sweep, spec, which: str) -> RenderInfo:
    df = sweep.wages
    param = df["parameter"].iloc[0]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, firm in enumerate(sweep.firm_ids):
        rows = df[df["firm"] == firm].sort_values("value")
        x = rows["value"].to_numpy()
        color = _firm_color(i)
        if sweep.telework:
            if which == "wages":
                ax.plot(x, rows["wage_onsite"], color=color, marker="o",
                        label=f"firm {firm} on-site")
                ax.plot(x, rows["wage_remote"], color=color, marker="o",
                        linestyle="--", label=f"firm {firm} remote")
            else:
                ax.plot(x, rows["mass_onsite"], color=color, marker="o",
                        label=f"firm {firm} on-site")
                ax.plot(x, rows["mass_remote"], color=color, marker="o",
                        linestyle="--", label=f"firm {firm} remote")
        else:
            col = "wage" if which == "wages" else "labor_supply"
            ax.plot(x, rows[col], color=color, marker="o", label=f"firm {firm}")
    ax.set_xlabel(param)
    ax.set_ylabel("wage" if which == "wages" else "workers")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=150)
    plt.close(fig)
    return RenderInfo(spec.output_path, 1, spec.kind)


def _occupancy_map_2d(sweep, spec) -> RenderInfo:
    panels = _load_sweep_fields(sweep)
    fig, axes = _panel_axes(len(panels), width=4.4, height=3.8)
    for ax, (value, table) in zip(axes, panels):
        if table.dimension != 2:
            raise InputDataError(
                f"{table.path}: figure kind '{spec.kind}' needs 2D fields "
                "(missing column 'y')"
            )
        df = table.frame
        xs = np.unique(df["x"].to_numpy())
        ys = np.unique(df["y"].to_numpy())
        shares = df[table.share_columns].to_numpy()
        labels = table.option_labels
        # category per node: 0 home, 1..n_firms on-site firm, n+1 remote (any),
        # last = tie between distinct leaders
        n_firms = sum(1 for l in labels if l.startswith("onsite") or l.startswith("firm"))
        top = shares.max(axis=1)
        arg = shares.argmax(axis=1)
        tie = (np.abs(shares - top[:, None]) < 1e-12).sum(axis=1) > 1
        cat = np.empty(len(df), dtype=int)
        for k, label in enumerate(labels):
            mask = arg == k
            if label == "home":
                cat[mask] = 0
            elif label.startswith("remote"):
                cat[mask] = n_firms + 1
            else:
                cat[mask] = int(label.split("_")[1])
        cat[tie] = n_firms + 2
        colors = [HOME_COLOR] + [_firm_color(i) for i in range(n_firms)]
        colors += [REMOTE_2D_COLOR, TIE_COLOR]
        img = cat.reshape(len(ys), len(xs))  # x varies fastest in node order
        ax.imshow(
            img,
            origin="lower",
            extent=(xs[0], xs[-1], ys[0], ys[-1]),
            cmap=ListedColormap(colors),
            vmin=-0.5,
            vmax=len(colors) - 0.5,
            interpolation="nearest",
        )
        title = f"{sweep.wages['parameter'].iloc[0]} = {value:g}" if np.isfinite(
            value
        ) else "solve"
        ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=150)
    plt.close(fig)
    return RenderInfo(spec.output_path, len(panels), spec.kind)


def render(spec: FigureSpec) -> RenderInfo:
    """Render one figure kind from a scenario output directory."""
    sweep = load_sweep(spec.input_dir)
    Path(spec.output_path).parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == "distribution-panels":
        return _distribution_panels(sweep, spec)
    if spec.kind == "rent-panels":
        return _rent_panels(sweep, spec)
    if spec.kind == "wages-vs-param":
        return _lines_vs_param(sweep, spec, "wages")
    if spec.kind == "masses-vs-param":
        return _lines_vs_param(sweep, spec, "masses")
    return _occupancy_map_2d(sweep, spec)
