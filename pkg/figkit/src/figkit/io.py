"""Reading and validating the scenario output directory.

Expected layout (written by the solver CLI):
  wages.csv        rows keyed by (parameter, value, firm)
  fields_<v>.csv   per-node columns: x[,y], revenue, density, rent, share_*
  summary.json     run metadata (unused here beyond existence)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd


class InputDataError(RuntimeError):
    """Missing or malformed scenario output; the message names the file
    (and column, when applicable)."""


def _read_csv(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise InputDataError(f"{path}: file not found")
    try:
        df = pd.read_csv(path)
    except Exception as exc:
        raise InputDataError(f"{path}: unreadable CSV ({exc})") from exc
    if df.empty and df.columns.size == 0:
        raise InputDataError(f"{path}: empty CSV")
    return df


def _require(df: pd.DataFrame, path: Path, columns) -> None:
    for col in columns:
        if col not in df.columns:
            raise InputDataError(f"{path}: missing column '{col}'")


@dataclass
class SweepData:
    directory: Path
    wages: pd.DataFrame
    telework: bool
    values: list[float]
    firm_ids: list[int]

    def field_path(self, value: float) -> Path:
        return self.directory / f"fields_{value:g}.csv"


def load_sweep(directory) -> SweepData:
    directory = Path(directory)
    path = directory / "wages.csv"
    wages = _read_csv(path)
    _require(wages, path, ["parameter", "value", "firm"])
    telework = "wage_onsite" in wages.columns
    if telework:
        _require(
            wages, path,
            ["wage_onsite", "wage_remote", "mass_onsite", "mass_remote"],
        )
    else:
        _require(wages, path, ["wage", "labor_supply"])
    values = sorted(wages["value"].dropna().unique().tolist())
    firm_ids = sorted(wages["firm"].unique().tolist())
    return SweepData(
        directory=directory,
        wages=wages,
        telework=telework,
        values=values,
        firm_ids=firm_ids,
    )


@dataclass
class FieldTable:
    path: Path
    frame: pd.DataFrame
    dimension: int
    share_columns: list[str]

    @property
    def option_labels(self) -> list[str]:
        return [c[len("share_"):] for c in self.share_columns]


def load_fields(path) -> FieldTable:
    path = Path(path)
    df = _read_csv(path)
    _require(df, path, ["x", "revenue", "density", "rent"])
    dimension = 2 if "y" in df.columns else 1
    share_cols = [c for c in df.columns if c.startswith("share_")]
    if not share_cols:
        raise InputDataError(f"{path}: missing column 'share_*'")
    return FieldTable(
        path=path, frame=df, dimension=dimension, share_columns=share_cols
    )
