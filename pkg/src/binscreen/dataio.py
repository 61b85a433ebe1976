"""CSV and JSON plumbing: dataset round-trips, report files, run manifests.

CSV datasets carry a header (predictor names plus the response column) and
shortest round-trip decimal values, so gen -> read_csv -> write is lossless
and byte-stable.  Reports are JSON with a fixed field order, each wrapped
with a RunManifest describing the invocation that produced it.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .datagen import Dataset
from .errors import InvariantError

__all__ = [
    "RunManifest",
    "config_hash",
    "read_csv",
    "write_dataset_csv",
    "write_json",
    "table1_rows",
    "table2_rows",
    "figure1_rows",
    "write_csv_rows",
]


def config_hash(config: dict[str, Any]) -> str:
    """sha256 of the canonical JSON encoding; invariant to field order."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Provenance stamp attached to every artifact a command writes."""

    command: str
    config_hash: str
    seed: int
    wall_time: float
    tool_version: str = __version__

    @classmethod
    def create(cls, command: str, config: dict[str, Any], seed: int, wall_time: float) -> "RunManifest":
        return cls(
            command=command,
            config_hash=config_hash(config),
            seed=int(seed),
            wall_time=float(wall_time),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "tool_version": self.tool_version,
        }


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------


def _parse_cell(raw: str, line: int, column: str) -> float:
    text = raw.strip()
    if not text:
        raise ValueError(f"missing value at line {line}, column {column!r}")
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"non-numeric value {raw!r} at line {line}, column {column!r}") from None
    if not np.isfinite(value):
        raise ValueError(f"non-finite value {raw!r} at line {line}, column {column!r}")
    return value


def read_csv(path: str | Path, response: str = "y") -> Dataset:
    """Load a delimited dataset, taking `response` as the binary outcome.

    Predictor columns keep their header names and file order.  Any malformed
    cell is reported with its line number and column name.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        header = [name.strip() for name in header]
        if response not in header:
            raise ValueError(f"{path}: response column {response!r} not in header {header}")
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate column names in header")
        y_pos = header.index(response)
        names = [name for i, name in enumerate(header) if i != y_pos]
        if not names:
            raise ValueError(f"{path}: no predictor columns besides the response")

        xs: list[list[float]] = []
        ys: list[int] = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: line {line} has {len(row)} fields, expected {len(header)}"
                )
            raw_y = row[y_pos]
            y_val = _parse_cell(raw_y, line, response)
            if y_val not in (0.0, 1.0):
                raise ValueError(
                    f"non-binary response value {raw_y!r} at line {line}, column {response!r}"
                )
            ys.append(int(y_val))
            xs.append(
                [
                    _parse_cell(cell, line, header[i])
                    for i, cell in enumerate(row)
                    if i != y_pos
                ]
            )
    return Dataset(
        X=np.array(xs, dtype=float),
        y=np.array(ys),
        names=tuple(names),
        response_name=response,
    )


def write_dataset_csv(path: str | Path, data: Dataset) -> None:
    """Write the dataset with its response as the last column.

    Floats are emitted as shortest round-trip decimals, so reading the file
    back reproduces the array bit for bit.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(data.names) + [data.response_name])
        for xi, yi in zip(data.X, data.y):
            writer.writerow([repr(float(v)) for v in xi] + [int(yi)])


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def write_json(path: str | Path, payload: dict[str, Any]) -> None:
    """Dump with stable (insertion) field order and a trailing newline."""
    path = Path(path)
    try:
        text = json.dumps(payload, indent=2, allow_nan=False)
    except ValueError as exc:
        raise InvariantError(f"report for {path} contains non-finite numbers: {exc}") from exc
    path.write_text(text + "\n")


def write_csv_rows(path: str | Path, header: list[str], rows: list[list[Any]]) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fmt(value: float) -> str:
    return repr(float(value))


def table1_rows(result) -> tuple[list[str], list[list[Any]]]:
    """Wide layout mirroring the bias table: one mean row and one s.e. row
    per covariance x link cell, with the cell's c1 on both."""
    p = result.gamma.size
    header = ["cov", "link", "row"] + [f"b{k}" for k in range(1, p + 1)] + ["c1"]
    rows = []
    for cell in result.cells:
        rows.append([cell.cov, cell.link, "bias"] + [_fmt(v) for v in cell.bias] + [_fmt(cell.c1)])
        rows.append([cell.cov, cell.link, "se"] + [_fmt(v) for v in cell.se] + [_fmt(cell.c1)])
    return header, rows


def table2_rows(result) -> tuple[list[str], list[list[Any]]]:
    """Wide layout mirroring the rate table: methods as rows, scenario x n
    as columns."""
    n_values = sorted(result.d_values)
    scenarios = ("ar1", "cs", "binom")
    header = ["method"] + [f"{sc}_{n}" for sc in scenarios for n in n_values]
    rows = []
    for method in ("sisl", "sisp", "less"):
        row: list[Any] = [method]
        for sc in scenarios:
            for n in n_values:
                row.append(_fmt(result.rates[(method, sc, n)]))
        rows.append(row)
    return header, rows


def figure1_rows(result) -> tuple[list[str], list[list[Any]]]:
    """Long layout: one row per (panel, predictor index) with analytic and
    averaged statistics side by side."""
    header = [
        "panel",
        "index",
        "active",
        "beta_ls",
        "beta_ml",
        "less_mean",
        "less_se",
        "ml_mean",
        "ml_se",
    ]
    rows = []
    active = set(result.active)
    for panel in result.panels:
        for j in range(result.p):
            rows.append(
                [
                    panel.cov,
                    j + 1,
                    int(j + 1 in active),
                    _fmt(panel.curve.beta_ls[j]),
                    _fmt(panel.curve.beta_ml[j]),
                    _fmt(panel.less_mean[j]),
                    _fmt(panel.less_se[j]),
                    _fmt(panel.ml_mean[j]),
                    _fmt(panel.ml_se[j]),
                ]
            )
    return header, rows
