"""The three figure renderers.

* ``bprime_sweep``: expected detection time per k against the exploration
  threshold b', with a dashed vertical reference at log(a) when the
  detection threshold is known (``--a`` flag or the sibling manifest).
* ``comparison_grid``: six panels (k = 1..5 and the pooled k >= 6 panel),
  one line per procedure, against the swept threshold a = b.
* ``ratio_plot``: per-k ratio of the non-oracle procedure's means to the
  oracle's, against a, with a horizontal reference at 1.

Rendering is a pure function of the CSV: the plotted series depend only
on the file contents, and SVG output is written without timestamps so
equal inputs give equal bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .data import SchemaError, load_rows, ratio_series, series_by_procedure

__all__ = ["KINDS", "FigureSpec", "render", "reference_a"]

KINDS = ("bprime_sweep", "comparison_grid", "ratio_plot")

_RC = {
    "svg.fonttype": "none",     # keep labels as searchable text
    "svg.hashsalt": "figures",  # deterministic element ids
    "figure.dpi": 100,
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_csv: str | Path
    output_path: str | Path
    a: float | None = None          # detection threshold for the log(a) reference
    manifest: str | Path | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def reference_a(spec: FigureSpec) -> float | None:
    """Detection threshold for the reference line: flag, manifest, or sibling.

    The primary writes `<study>.csv` next to `<study>.manifest.json`, so
    when neither --a nor --manifest is given the sibling manifest is
    tried; returns None when the threshold cannot be found.
    """
    if spec.a is not None:
        return spec.a
    if spec.manifest is not None:
        manifest = Path(spec.manifest)
    else:
        csv_path = str(spec.input_csv)
        if not csv_path.endswith(".csv"):
            return None
        manifest = Path(csv_path[: -len(".csv")] + ".manifest.json")
        if not manifest.exists():
            return None
    try:
        payload = json.loads(manifest.read_text())
        return float(payload["config"]["thresholds"]["a"])
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError):
        return None


def render(spec: FigureSpec) -> Path:
    """Render the figure and return the written path."""
    rows = load_rows(spec.input_csv)
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        if spec.kind == "bprime_sweep":
            fig = _bprime_sweep(rows, reference_a(spec))
        elif spec.kind == "comparison_grid":
            fig = _comparison_grid(rows)
        else:
            fig = _ratio_plot(rows)
        fig.savefig(out, metadata={"Date": None} if out.suffix == ".svg" else None)
        plt.close(fig)
    return out


def _bprime_sweep(rows, a: float | None):
    nested = series_by_procedure(rows)
    if len(nested) != 1:
        raise SchemaError(f"b' sweep expects a single procedure, got {sorted(nested)}")
    (procedure, by_k), = nested.items()
    fig, ax = plt.subplots(figsize=(7, 5))
    for k, (x, means, _ses) in by_k.items():
        ax.plot(x, means, marker="o", markersize=3, linewidth=1.2, label=f"k={k}")
    if a is not None and a > 0:
        ax.axvline(math.log(a), color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("exploration threshold b'")
    ax.set_ylabel("expected detection time")
    ax.set_title(f"{procedure}: detection times against b'")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    return fig


def _comparison_grid(rows):
    nested = series_by_procedure(rows)
    all_ks = sorted({k for by_k in nested.values() for k in by_k})
    own_panels = [k for k in all_ks if k <= 5]
    pooled = [k for k in all_ks if k > 5]
    n_panels = len(own_panels) + (1 if pooled else 0)
    n_cols = 2
    n_rows = math.ceil(n_panels / n_cols)
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(8, 2.6 * n_rows), squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax in flat[n_panels:]:
        ax.set_visible(False)

    for idx, k in enumerate(own_panels):
        ax = flat[idx]
        for procedure, by_k in nested.items():
            x, means, _ses = by_k[k]
            ax.plot(x, means, marker="o", markersize=3, linewidth=1.2, label=procedure)
        ax.set_title(f"k={k}", fontsize=9)
    if pooled:
        ax = flat[n_panels - 1]
        for procedure, by_k in nested.items():
            for j, k in enumerate(pooled):
                x, means, _ses = by_k[k]
                ax.plot(x, means, linewidth=0.9, label=procedure if j == 0 else None)
        ax.set_title(f"k={pooled[0]}..{pooled[-1]}", fontsize=9)
    for idx in range(n_panels):
        flat[idx].set_xlabel("threshold a = b", fontsize=8)
        flat[idx].set_ylabel("expected detection time", fontsize=8)
    flat[0].legend(fontsize=7)
    fig.tight_layout()
    return fig


def _ratio_plot(rows):
    ratios = ratio_series(rows)
    fig, ax = plt.subplots(figsize=(7, 5))
    for k, (x, values) in ratios.items():
        ax.plot(x, values, marker="o", markersize=3, linewidth=1.2, label=f"k={k}")
    ax.axhline(1.0, color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("threshold a = b")
    ax.set_ylabel("ratio to oracle")
    ax.set_title("expected detection times relative to the oracle")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    return fig
