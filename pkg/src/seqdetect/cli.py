"""Command-line front end.

Two subcommands:

* ``run``: execute a study (a preset or a config file, with flag
  overrides) and write a results CSV plus a reproduction manifest.
* ``bounds``: compute the lower-bound report for a configuration and
  emit it as CSV.

Presets reproduce the reference study design: K = 10 unit-variance
Gaussian streams with mean shifts (1.5, 1.5, 1.25, 1.25, 1, 1, 0.75,
0.75, 0.5, 0.5), true signals {2, 4, 6, 8, 10}, and equal thresholds
a = b. Flag precedence: CLI flags override config-file fields, which
override preset defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import lower_bounds
from .errors import ConfigError, SeqDetectError
from .montecarlo import (
    config_from_dict,
    config_to_dict,
    run_experiment,
    write_csv,
    write_manifest,
)
from .stream_models import GroundTruth, model_from_dict

__all__ = ["main", "cmd_run", "cmd_bounds", "parse_grid", "build_preset"]

PRESETS = ("bprime_sweep", "procedure_comparison", "oracle_ratio", "custom")

REFERENCE_DELTAS = (1.5, 1.5, 1.25, 1.25, 1.0, 1.0, 0.75, 0.75, 0.5, 0.5)
REFERENCE_SIGNALS = (2, 4, 6, 8, 10)
DEFAULT_A_GRID = (5.0, 10.0, 20.0, 40.0)


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse a sweep grid: 'start:stop:step' (inclusive) or 'v1,v2,...'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError(f"grid step must be positive, got {step}")
        values = []
        i = 0
        while True:
            v = start + i * step
            if v > stop + 1e-9:
                break
            values.append(min(v, stop))
            i += 1
        if not values:
            raise ConfigError(f"grid {text!r} is empty")
        return tuple(values)
    try:
        values = tuple(float(p) for p in text.split(",") if p.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad grid value in {text!r}: {exc}") from exc
    if not values:
        raise ConfigError(f"grid {text!r} is empty")
    return values


def _reference_models() -> list[dict]:
    return [{"kind": "gaussian", "delta": d} for d in REFERENCE_DELTAS]


def build_preset(name: str) -> dict:
    """Config dict for a named preset; flags may override any field."""
    if name == "custom":
        raise ConfigError("the custom preset requires --config")
    base = {
        "models": _reference_models(),
        "truth": {"signal_set": list(REFERENCE_SIGNALS)},
        "study": {"trials": 10_000, "base_seed": 20260810},
    }
    if name == "bprime_sweep":
        base["thresholds"] = {"a": 20.0, "b": 20.0}
        base["procedures"] = [{"kind": "proposed", "phase2": "follow_the_leader"}]
        base["study"]["sweep"] = {"axis": "b_prime", "values": list(parse_grid("0:20:0.5"))}
    elif name == "procedure_comparison":
        base["thresholds"] = {"a": 20.0, "b": 20.0}
        base["procedures"] = [
            {"kind": "proposed", "phase2": "follow_the_leader"},
            {"kind": "follow_the_leader"},
            {"kind": "oracle"},
        ]
        base["study"]["sweep"] = {"axis": "a", "values": list(DEFAULT_A_GRID)}
        base["study"]["common_random_numbers"] = True
    elif name == "oracle_ratio":
        base["thresholds"] = {"a": 20.0, "b": 20.0}
        base["procedures"] = [
            {"kind": "proposed", "phase2": "follow_the_leader"},
            {"kind": "oracle"},
        ]
        base["study"]["sweep"] = {"axis": "a", "values": list(DEFAULT_A_GRID)}
        base["study"]["common_random_numbers"] = True
    else:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    return base


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def _apply_overrides(payload: dict, args: argparse.Namespace) -> dict:
    """Fold CLI flags into a config dict; flags win over file fields."""
    study = payload.setdefault("study", {})
    if args.trials is not None:
        study["trials"] = args.trials
    if args.seed is not None:
        study["base_seed"] = args.seed
    if getattr(args, "crn", False):
        study["common_random_numbers"] = True

    if args.alpha is not None or args.beta is not None:
        if args.alpha is None or args.beta is None:
            raise ConfigError("--alpha and --beta must be given together")
        payload.pop("thresholds", None)
        payload["error_budget"] = {"alpha": args.alpha, "beta": args.beta}
    if args.a is not None or args.b is not None or args.bprime is not None:
        thresholds = payload.setdefault("thresholds", {})
        payload.pop("error_budget", None)
        if args.a is not None:
            thresholds["a"] = args.a
            if args.b is None:
                thresholds["b"] = args.a  # equal thresholds unless --b says otherwise
        if args.b is not None:
            thresholds["b"] = args.b
        if args.bprime is not None:
            thresholds["b_prime"] = args.bprime

    if args.bprime_grid is not None and args.a_grid is not None:
        raise ConfigError("choose one of --bprime-grid and --a-grid")
    if args.bprime_grid is not None:
        study["sweep"] = {"axis": "b_prime", "values": list(parse_grid(args.bprime_grid))}
    if args.a_grid is not None:
        study["sweep"] = {"axis": "a", "values": list(parse_grid(args.a_grid))}
    return payload


def _resolve_config_payload(args: argparse.Namespace) -> tuple[dict, str]:
    preset = args.preset
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; expected one of {PRESETS}")
    if args.config is not None:
        if preset not in (None, "custom"):
            raise ConfigError("--config and a non-custom --preset are mutually exclusive")
        payload = _load_config_file(args.config)
        name = Path(args.config).stem
    elif preset is not None:
        payload = build_preset(preset)
        name = preset
    else:
        raise ConfigError("provide --preset or --config")
    return _apply_overrides(payload, args), name


def cmd_run(args: argparse.Namespace) -> int:
    payload, name = _resolve_config_payload(args)
    config = config_from_dict(payload)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    manifest_path = out_dir / f"{name}.manifest.json"

    started = time.perf_counter()
    stats = run_experiment(config, workers=args.workers)
    elapsed = time.perf_counter() - started
    write_csv(stats, csv_path)
    write_manifest(config, manifest_path, csv_path.name, elapsed, args.workers, __version__)
    print(f"wrote {csv_path} and {manifest_path} ({elapsed:.1f}s, {config.trials} trials)")
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    payload = _load_config_file(args.config)
    models = [model_from_dict(m) for m in payload["models"]]
    truth = GroundTruth(payload.get("truth", {}).get("signal_set", ()))
    budget = payload.get("error_budget", {})
    alpha = args.alpha if args.alpha is not None else budget.get("alpha")
    beta = args.beta if args.beta is not None else budget.get("beta")
    if alpha is None or beta is None:
        raise ConfigError("bounds need alpha and beta (error_budget section or flags)")

    report = lower_bounds(models, truth, alpha, beta)
    lines = ["kind,k,nonasymptotic,asymptotic"]
    for k in range(1, len(models) + 1):
        lines.append(
            f"per_k,{k},{report.per_k_bounds[k - 1]!r},{report.asymptotic_per_k[k - 1]!r}"
        )
    lines.append(f"t_stop,,{report.t_stop_bound!r},{report.asymptotic_t_stop!r}")
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqdetect",
        description="Active sequential signal detection: studies, error rates, and bounds.",
    )
    parser.add_argument("--version", action="version", version=f"seqdetect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a Monte Carlo study and write CSV + manifest")
    run_p.add_argument("--preset", choices=PRESETS, help="named study design")
    run_p.add_argument("--config", help="JSON config file (schema in the README)")
    run_p.add_argument("--trials", type=int, help="Monte Carlo replications")
    run_p.add_argument("--seed", type=int, help="base seed for the derivation chain")
    run_p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    run_p.add_argument("--a", type=float, help="detection threshold (sets b too unless --b given)")
    run_p.add_argument("--b", type=float, help="noise threshold")
    run_p.add_argument("--alpha", type=float, help="familywise false-alarm budget (calibrates a)")
    run_p.add_argument("--beta", type=float, help="familywise miss budget (calibrates b)")
    run_p.add_argument("--bprime", type=float, help="exploration threshold")
    run_p.add_argument("--bprime-grid", help="sweep b_prime over start:stop:step or v1,v2,...")
    run_p.add_argument("--a-grid", help="sweep a=b over start:stop:step or v1,v2,...")
    run_p.add_argument("--crn", action="store_true",
                       help="share per-stream randomness across procedures")
    run_p.add_argument("--out-dir", default="results", help="output directory")
    run_p.set_defaults(func=cmd_run)

    bounds_p = sub.add_parser("bounds", help="emit the lower-bound report as CSV")
    bounds_p.add_argument("--config", required=True, help="JSON config file with models/truth")
    bounds_p.add_argument("--alpha", type=float, help="override error_budget alpha")
    bounds_p.add_argument("--beta", type=float, help="override error_budget beta")
    bounds_p.add_argument("--out", help="CSV output path (default: stdout)")
    bounds_p.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SeqDetectError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
