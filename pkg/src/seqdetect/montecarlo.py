"""Deterministic, parallelizable Monte Carlo experiment runner.

An experiment is (models, true signal set, thresholds or an error budget
to calibrate them from, procedures, trial count, base seed, optional
sweep axis). Every trial draws from generators keyed by
(base_seed, procedure_index, sweep_index, trial_index) through the fixed
mixing chain in :mod:`seqdetect.rng`, so results do not depend on worker
count or chunking: parallel runs are bit-identical to serial ones.

With ``common_random_numbers`` set, the procedure index is dropped from
the key, so all procedures see the same per-stream observation sequences
trial for trial; since streams own their substreams, quantities driven by
per-stream SPRT lengths (like the termination time) then coincide exactly
across procedures.
"""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bounds import calibrate_thresholds
from .errors import ConfigError, HorizonExceeded, InsufficientTrials
from .llr_core import DEFAULT_HORIZON, Thresholds
from .procedures import ProcedureSpec, run_procedure
from .rng import TrialRng, trial_key
from .stream_models import GroundTruth, StreamModel, model_from_dict, model_to_dict

__all__ = [
    "Sweep",
    "ExperimentConfig",
    "AggregateStats",
    "ErrorRates",
    "run_experiment",
    "estimate_error_rates",
    "write_csv",
    "write_manifest",
    "config_to_dict",
    "config_from_dict",
]

CSV_COLUMNS = (
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


@dataclass(frozen=True)
class Sweep:
    """One sweep axis: either the exploration threshold or a = b."""

    axis: str  # "b_prime" | "a"
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.axis not in ("b_prime", "a"):
            raise ConfigError(f"sweep axis must be 'b_prime' or 'a', got {self.axis!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if any(not math.isfinite(v) for v in self.values):
            raise ConfigError("sweep values must be finite")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a study bit for bit."""

    models: tuple[StreamModel, ...]
    truth: GroundTruth
    procedures: tuple[ProcedureSpec, ...]
    trials: int
    base_seed: int
    thresholds: Thresholds | None = None
    alpha: float | None = None
    beta: float | None = None
    sweep: Sweep | None = None
    common_random_numbers: bool = False
    horizon: int = DEFAULT_HORIZON

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "procedures", tuple(self.procedures))
        if not self.models:
            raise ConfigError("need at least one stream model")
        if not self.procedures:
            raise ConfigError("need at least one procedure")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.thresholds is None and (self.alpha is None or self.beta is None):
            raise ConfigError("provide thresholds or an (alpha, beta) budget to calibrate from")
        if any(s > len(self.models) for s in self.truth.signal_set):
            raise ConfigError("truth references streams beyond the model list")
        # Sweep values must produce valid thresholds at every point.
        for value in self.sweep.values if self.sweep else ():
            self.thresholds_at(value)

    def base_thresholds(self) -> Thresholds:
        if self.thresholds is not None:
            return self.thresholds
        return calibrate_thresholds(self.alpha, self.beta, len(self.models))

    def thresholds_at(self, sweep_value: float | None) -> Thresholds:
        """Thresholds in force at one sweep point.

        A b_prime sweep replaces only the exploration threshold; an a
        sweep sets a = b = value and refreshes the default exploration
        threshold to log(a) clamped into [0, b].
        """
        base = self.base_thresholds()
        if sweep_value is None or self.sweep is None:
            return base
        if self.sweep.axis == "b_prime":
            if not (0.0 <= sweep_value <= base.b):
                raise ConfigError(
                    f"swept b_prime={sweep_value} outside [0, b] = [0, {base.b}]"
                )
            return replace(base, b_prime=sweep_value)
        if sweep_value <= 0:
            raise ConfigError(f"swept threshold a must be positive, got {sweep_value}")
        b_prime = min(max(math.log(sweep_value), 0.0), sweep_value)
        return Thresholds(a=sweep_value, b=sweep_value, b_prime=b_prime,
                          alpha=base.alpha, beta=base.beta)

    def sweep_points(self) -> tuple[float | None, ...]:
        return self.sweep.values if self.sweep is not None else (None,)


@dataclass(frozen=True)
class AggregateStats:
    """Monte Carlo estimates for one (procedure, sweep point) cell.

    mean_tk_min_tstop[k-1] estimates E[T_k ^ T_stop]; a trial with fewer
    than k detections contributes its termination time. Standard errors
    are sample SDs over trials divided by sqrt(trials).
    """

    procedure: str
    sweep_value: float | None
    mean_tk_min_tstop: tuple[float, ...]
    se_tk: tuple[float, ...]
    mean_tstop: float
    se_tstop: float
    fwe1_rate: float
    fwe2_rate: float
    trials_used: int


@dataclass(frozen=True)
class ErrorRates:
    """Familywise error-rate estimates with binomial standard errors."""

    procedure: str
    sweep_value: float | None
    fwe1: float
    fwe1_se: float
    fwe2: float
    fwe2_se: float
    trials: int


def _simulate_chunk(
    config: ExperimentConfig,
    proc_index: int,
    sweep_index: int,
    lo: int,
    hi: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Run trials [lo, hi) of one cell; returns per-trial records in order."""
    spec = config.procedures[proc_index]
    sweep_value = config.sweep_points()[sweep_index]
    thresholds = config.thresholds_at(sweep_value)
    k_total = len(config.models)
    count = hi - lo
    tk = np.empty((count, k_total), dtype=np.int64)
    tstop = np.empty(count, dtype=np.int64)
    fa = np.empty(count, dtype=bool)
    md = np.empty(count, dtype=bool)
    seed_proc = 0 if config.common_random_numbers else proc_index
    for row, trial in enumerate(range(lo, hi)):
        key = trial_key(config.base_seed, seed_proc, sweep_index, trial)
        try:
            result = run_procedure(
                config.models, config.truth, thresholds, spec, TrialRng(key), config.horizon
            )
        except HorizonExceeded as exc:
            raise HorizonExceeded(
                f"procedure={spec.label} sweep_value={sweep_value} trial={trial}: {exc}"
            ) from exc
        detections = result.detection_times
        for i in range(k_total):
            tk[row, i] = detections[i] if i < len(detections) else result.t_stop
        tstop[row] = result.t_stop
        fa[row] = result.false_alarm
        md[row] = result.missed_detection
    return tk, tstop, fa, md


def _aggregate(
    label: str,
    sweep_value: float | None,
    tk: np.ndarray,
    tstop: np.ndarray,
    fa: np.ndarray,
    md: np.ndarray,
) -> AggregateStats:
    n = tstop.shape[0]

    def se(values: np.ndarray) -> float:
        return float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0

    return AggregateStats(
        procedure=label,
        sweep_value=sweep_value,
        mean_tk_min_tstop=tuple(float(m) for m in tk.mean(axis=0)),
        se_tk=tuple(se(tk[:, i]) for i in range(tk.shape[1])),
        mean_tstop=float(tstop.mean()),
        se_tstop=se(tstop),
        fwe1_rate=float(fa.mean()),
        fwe2_rate=float(md.mean()),
        trials_used=n,
    )


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[AggregateStats]:
    """Run every (procedure, sweep point) cell of the experiment.

    Results are ordered procedure-major, then sweep order. The reduction
    concatenates per-trial records in trial order before aggregating, so
    any worker count yields bit-identical statistics.
    """
    points = config.sweep_points()
    cells = [
        (pi, si) for pi in range(len(config.procedures)) for si in range(len(points))
    ]

    if workers <= 1:
        chunks = {
            (pi, si): [_simulate_chunk(config, pi, si, 0, config.trials)]
            for pi, si in cells
        }
    else:
        chunk_size = max(1, math.ceil(config.trials / (workers * 4)))
        jobs = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for pi, si in cells:
                for lo in range(0, config.trials, chunk_size):
                    hi = min(lo + chunk_size, config.trials)
                    jobs.append(((pi, si, lo), pool.submit(_simulate_chunk, config, pi, si, lo, hi)))
            chunks = {cell: [] for cell in cells}
            for (pi, si, _lo), future in sorted(jobs, key=lambda item: item[0]):
                chunks[(pi, si)].append(future.result())

    stats = []
    for pi, si in cells:
        parts = chunks[(pi, si)]
        tk = np.concatenate([p[0] for p in parts])
        tstop = np.concatenate([p[1] for p in parts])
        fa = np.concatenate([p[2] for p in parts])
        md = np.concatenate([p[3] for p in parts])
        stats.append(
            _aggregate(config.procedures[pi].label, points[si], tk, tstop, fa, md)
        )
    return stats


def estimate_error_rates(config: ExperimentConfig, workers: int = 1) -> list[ErrorRates]:
    """Empirical familywise error rates with binomial standard errors.

    Warns with InsufficientTrials when, under the union-bound error
    guarantees, fewer than 10 errors of a type are expected across all
    trials: the estimate then carries little information about the rate.
    """
    n_signals = len(config.truth.signal_set)
    n_noises = len(config.models) - n_signals
    for value in config.sweep_points():
        thresholds = config.thresholds_at(value)
        expected_fa = config.trials * n_noises * math.exp(-thresholds.a)
        expected_md = config.trials * n_signals * math.exp(-thresholds.b)
        if n_noises and expected_fa < 10:
            warnings.warn(
                f"expected false-alarm count {expected_fa:.2f} < 10 at a={thresholds.a}",
                InsufficientTrials,
                stacklevel=2,
            )
        if n_signals and expected_md < 10:
            warnings.warn(
                f"expected missed-detection count {expected_md:.2f} < 10 at b={thresholds.b}",
                InsufficientTrials,
                stacklevel=2,
            )

    def binom_se(rate: float, n: int) -> float:
        return math.sqrt(rate * (1.0 - rate) / n)

    return [
        ErrorRates(
            procedure=stat.procedure,
            sweep_value=stat.sweep_value,
            fwe1=stat.fwe1_rate,
            fwe1_se=binom_se(stat.fwe1_rate, stat.trials_used),
            fwe2=stat.fwe2_rate,
            fwe2_se=binom_se(stat.fwe2_rate, stat.trials_used),
            trials=stat.trials_used,
        )
        for stat in run_experiment(config, workers=workers)
    ]


def write_csv(stats: list[AggregateStats], path) -> None:
    """One row per (procedure, sweep point, k), in the documented schema.

    Floats are written with repr (shortest round-trip form), so files are
    reproducible bit for bit from equal statistics.
    """

    def fmt(value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for stat in stats:
            for k in range(1, len(stat.mean_tk_min_tstop) + 1):
                writer.writerow([
                    stat.procedure,
                    fmt(stat.sweep_value),
                    k,
                    fmt(stat.mean_tk_min_tstop[k - 1]),
                    fmt(stat.se_tk[k - 1]),
                    fmt(stat.fwe1_rate),
                    fmt(stat.fwe2_rate),
                    stat.trials_used,
                    fmt(stat.mean_tstop),
                    fmt(stat.se_tstop),
                ])


def write_manifest(config: ExperimentConfig, path, csv_name: str,
                   wall_time_s: float, workers: int, version: str) -> None:
    """Reproduction record: config echo, seed, code version, wall time."""
    payload = {
        "config": config_to_dict(config),
        "base_seed": config.base_seed,
        "csv": csv_name,
        "version": version,
        "wall_time_s": wall_time_s,
        "workers": workers,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def config_to_dict(config: ExperimentConfig) -> dict:
    """JSON-compatible echo of a config; inverse of :func:`config_from_dict`."""
    out: dict = {
        "models": [model_to_dict(m) for m in config.models],
        "truth": {"signal_set": sorted(config.truth.signal_set)},
        "procedures": [
            {
                "kind": p.kind,
                "b_prime": p.b_prime,
                "phase2": p.phase2,
                "name": p.name,
            }
            for p in config.procedures
        ],
        "study": {
            "trials": config.trials,
            "base_seed": config.base_seed,
            "common_random_numbers": config.common_random_numbers,
            "horizon": config.horizon,
        },
    }
    if config.thresholds is not None:
        thresholds = {"a": config.thresholds.a, "b": config.thresholds.b,
                      "b_prime": config.thresholds.b_prime}
        if config.thresholds.alpha is not None:
            thresholds["alpha"] = config.thresholds.alpha
        if config.thresholds.beta is not None:
            thresholds["beta"] = config.thresholds.beta
        out["thresholds"] = thresholds
    if config.alpha is not None or config.beta is not None:
        out["error_budget"] = {"alpha": config.alpha, "beta": config.beta}
    if config.sweep is not None:
        out["study"]["sweep"] = {"axis": config.sweep.axis,
                                 "values": list(config.sweep.values)}
    return out


def config_from_dict(payload: dict) -> ExperimentConfig:
    """Build a config from the documented file schema.

    Sections: models (list of tagged records), truth ({"signal_set":
    [...]}), thresholds ({a, b, b_prime?, alpha?, beta?}) or error_budget
    ({alpha, beta}), procedures (list of {kind, b_prime?, phase2?,
    name?}), study ({trials, base_seed, sweep?, common_random_numbers?,
    horizon?}).
    """
    try:
        models = tuple(model_from_dict(m) for m in payload["models"])
        truth = GroundTruth(payload.get("truth", {}).get("signal_set", ()))
        procedures = tuple(
            ProcedureSpec(
                kind=p["kind"],
                b_prime=p.get("b_prime"),
                phase2=p.get("phase2", "follow_the_leader"),
                name=p.get("name"),
            )
            for p in payload["procedures"]
        )
        study = payload.get("study", {})
        thresholds = None
        alpha = beta = None
        if "thresholds" in payload:
            t = payload["thresholds"]
            thresholds = Thresholds(
                a=float(t["a"]),
                b=float(t["b"]),
                b_prime=float(t.get("b_prime", 0.0)),
                alpha=t.get("alpha"),
                beta=t.get("beta"),
            )
        if "error_budget" in payload:
            alpha = payload["error_budget"].get("alpha")
            beta = payload["error_budget"].get("beta")
        sweep = None
        if study.get("sweep") is not None:
            sweep = Sweep(axis=study["sweep"]["axis"], values=tuple(study["sweep"]["values"]))
        return ExperimentConfig(
            models=models,
            truth=truth,
            procedures=procedures,
            trials=int(study.get("trials", 10_000)),
            base_seed=int(study.get("base_seed", 0)),
            thresholds=thresholds,
            alpha=alpha,
            beta=beta,
            sweep=sweep,
            common_random_numbers=bool(study.get("common_random_numbers", False)),
            horizon=int(study.get("horizon", DEFAULT_HORIZON)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed experiment config: {exc}") from exc
