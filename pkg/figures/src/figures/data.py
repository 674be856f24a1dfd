"""CSV loading and series extraction for the study figures.

Everything here is a pure function of the CSV rows: the renderers never
recompute statistics, they only rearrange the primary component's output
(the one computed quantity is the displayed proposed/oracle mean ratio).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

__all__ = ["SchemaError", "Row", "load_rows", "series_by_procedure", "ratio_series"]

REQUIRED_COLUMNS = (
    "procedure",
    "sweep_value",
    "k",
    "mean",
    "se",
    "fwe1",
    "fwe2",
    "trials",
    "mean_tstop",
    "se_tstop",
)


class SchemaError(ValueError):
    """The input CSV does not conform to the study-results schema."""


@dataclass(frozen=True)
class Row:
    procedure: str
    sweep_value: float
    k: int
    mean: float
    se: float


def load_rows(path: str | Path) -> list[Row]:
    """Read a study CSV, checking the schema before touching any values."""
    path = Path(path)
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise SchemaError(f"{path} is missing columns: {', '.join(missing)}")
            rows = []
            for record in reader:
                try:
                    rows.append(Row(
                        procedure=record["procedure"],
                        sweep_value=float(record["sweep_value"]) if record["sweep_value"] else float("nan"),
                        k=int(record["k"]),
                        mean=float(record["mean"]),
                        se=float(record["se"]),
                    ))
                except (TypeError, ValueError) as exc:
                    raise SchemaError(f"{path}: bad row {record!r}: {exc}") from exc
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path} contains no data rows")
    return rows


def series_by_procedure(rows: list[Row]) -> dict[str, dict[int, tuple[list[float], list[float], list[float]]]]:
    """Nest rows as procedure -> k -> (sweep values, means, ses), sweep-sorted."""
    cells: dict[str, dict[int, list[Row]]] = {}
    for row in rows:
        cells.setdefault(row.procedure, {}).setdefault(row.k, []).append(row)
    out: dict[str, dict[int, tuple[list[float], list[float], list[float]]]] = {}
    for procedure, by_k in cells.items():
        out[procedure] = {}
        for k, bucket in sorted(by_k.items()):
            bucket = sorted(bucket, key=lambda r: r.sweep_value)
            out[procedure][k] = (
                [r.sweep_value for r in bucket],
                [r.mean for r in bucket],
                [r.se for r in bucket],
            )
    return out


def ratio_series(rows: list[Row]) -> dict[int, tuple[list[float], list[float]]]:
    """Per k: (sweep values, numerator mean / oracle mean).

    The CSV must contain exactly two procedures, one of them labelled
    'oracle'; every (sweep value, k) cell must be present for both.
    """
    nested = series_by_procedure(rows)
    if len(nested) != 2 or "oracle" not in nested:
        raise SchemaError(
            f"ratio plot needs exactly two procedures including 'oracle', got {sorted(nested)}"
        )
    numerator_name = next(name for name in nested if name != "oracle")
    numerator, oracle = nested[numerator_name], nested["oracle"]
    if set(numerator) != set(oracle):
        raise SchemaError("procedures cover different k values")
    out: dict[int, tuple[list[float], list[float]]] = {}
    for k in sorted(numerator):
        x_num, means_num, _ = numerator[k]
        x_den, means_den, _ = oracle[k]
        if x_num != x_den:
            raise SchemaError(f"procedures cover different sweep values at k={k}")
        out[k] = (list(x_num), [m / d for m, d in zip(means_num, means_den)])
    return out
