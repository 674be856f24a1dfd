"""Per-stream hypothesis pairs and log-likelihood-ratio increment sampling.

Each data stream carries a simple-vs-simple testing problem: observations
are i.i.d. with density f (noise) or g (signal). Downstream code never sees
raw observations, only LLR increments log(g(X)/f(X)), so a model's job is
to expose its two KL divergences and to draw increments under either
hypothesis from a caller-owned random generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModel

__all__ = [
    "Hypothesis",
    "GaussianMeanShift",
    "Bernoulli",
    "TableLookup",
    "StreamModel",
    "GroundTruth",
    "kl_divergences",
    "llr_increment",
    "sample_llr_increment",
    "model_from_dict",
    "model_to_dict",
]

_KL_EPS = 1e-15  # divergences at or below this are treated as degenerate


class Hypothesis(enum.Enum):
    """Which density generates a stream's observations."""

    SIGNAL = "signal"  # observations ~ g
    NOISE = "noise"    # observations ~ f


@dataclass(frozen=True)
class GaussianMeanShift:
    """Unit-variance Gaussian observations, mean 0 (noise) vs delta (signal).

    Both KL divergences equal delta**2 / 2, so signal and noise are equally
    hard to identify. The LLR of an observation x is delta*x - delta**2/2.
    """

    delta: float
    signal_kl: float = field(init=False)
    noise_kl: float = field(init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DegenerateModel(f"delta must be positive and finite, got {self.delta}")
        kl = self.delta * self.delta / 2.0
        object.__setattr__(self, "signal_kl", kl)
        object.__setattr__(self, "noise_kl", kl)


@dataclass(frozen=True)
class Bernoulli:
    """Binary observations with success probability p0 (noise) vs p1 (signal)."""

    p0: float
    p1: float
    signal_kl: float = field(init=False)
    noise_kl: float = field(init=False)

    def __post_init__(self) -> None:
        for name, p in (("p0", self.p0), ("p1", self.p1)):
            if not (0.0 < p < 1.0):
                raise DegenerateModel(f"{name} must lie in (0,1), got {p}")
        i = _discrete_kl((self.p1, 1.0 - self.p1), (self.p0, 1.0 - self.p0))
        j = _discrete_kl((self.p0, 1.0 - self.p0), (self.p1, 1.0 - self.p1))
        _check_positive_finite(i, j)
        object.__setattr__(self, "signal_kl", i)
        object.__setattr__(self, "noise_kl", j)


@dataclass(frozen=True)
class TableLookup:
    """Finite-support observations with explicit noise and signal pmfs.

    Both pmfs must be strictly positive on the shared support (absolute
    continuity in both directions keeps every LLR increment finite) and
    each must sum to 1 within 1e-12.
    """

    support: tuple[float, ...]
    f_probs: tuple[float, ...]
    g_probs: tuple[float, ...]
    signal_kl: float = field(init=False)
    noise_kl: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(float(x) for x in self.support))
        object.__setattr__(self, "f_probs", tuple(float(p) for p in self.f_probs))
        object.__setattr__(self, "g_probs", tuple(float(p) for p in self.g_probs))
        n = len(self.support)
        if n == 0 or len(self.f_probs) != n or len(self.g_probs) != n:
            raise DegenerateModel("support, f_probs and g_probs must share a common nonzero length")
        if len(set(self.support)) != n:
            raise DegenerateModel("support values must be distinct")
        for name, probs in (("f_probs", self.f_probs), ("g_probs", self.g_probs)):
            if any(p <= 0.0 for p in probs):
                raise DegenerateModel(f"{name} must be strictly positive on the shared support")
            if abs(math.fsum(probs) - 1.0) > 1e-12:
                raise DegenerateModel(f"{name} must sum to 1 within 1e-12")
        i = _discrete_kl(self.g_probs, self.f_probs)
        j = _discrete_kl(self.f_probs, self.g_probs)
        _check_positive_finite(i, j)
        object.__setattr__(self, "signal_kl", i)
        object.__setattr__(self, "noise_kl", j)


StreamModel = GaussianMeanShift | Bernoulli | TableLookup


@dataclass(frozen=True)
class GroundTruth:
    """The true (unknown to the procedures) subset of signal streams.

    Stream indices are 1-based, matching the reporting convention used
    throughout the package; the set may be empty or cover every stream.
    """

    signal_set: frozenset[int]

    def __init__(self, signal_set=()) -> None:
        object.__setattr__(self, "signal_set", frozenset(int(i) for i in signal_set))
        if any(i < 1 for i in self.signal_set):
            raise ValueError("stream indices are 1-based")

    def is_signal(self, stream: int) -> bool:
        return stream in self.signal_set


def _discrete_kl(p: tuple[float, ...], q: tuple[float, ...]) -> float:
    return math.fsum(pi * math.log(pi / qi) for pi, qi in zip(p, q))


def _check_positive_finite(i: float, j: float) -> None:
    if not (math.isfinite(i) and math.isfinite(j)) or i <= _KL_EPS or j <= _KL_EPS:
        raise DegenerateModel(
            f"KL divergences must be positive and finite, got signal_kl={i}, noise_kl={j}"
        )


def kl_divergences(model: StreamModel) -> tuple[float, float]:
    """Return (signal_kl, noise_kl): KL(g||f) and KL(f||g).

    Closed form for Gaussian and Bernoulli models, exact finite sum for
    table models. Degenerate pairs are rejected at model construction, so
    a value returned here is always positive and finite.
    """
    return model.signal_kl, model.noise_kl


def llr_increment(model: StreamModel, x: float) -> float:
    """LLR log(g(x)/f(x)) of a single observation x under the model."""
    if isinstance(model, GaussianMeanShift):
        return model.delta * x - model.delta * model.delta / 2.0
    if isinstance(model, Bernoulli):
        if x == 1.0:
            return math.log(model.p1 / model.p0)
        if x == 0.0:
            return math.log((1.0 - model.p1) / (1.0 - model.p0))
        raise ValueError(f"Bernoulli observation must be 0 or 1, got {x}")
    idx = model.support.index(x)
    return math.log(model.g_probs[idx] / model.f_probs[idx])


def sample_llr_increment(
    model: StreamModel, hypothesis: Hypothesis, rng: np.random.Generator
) -> float:
    """Draw one observation under the hypothesis and return its LLR increment.

    One increment consumes exactly one variate from ``rng``: a standard
    normal for Gaussian models, a single uniform for Bernoulli and table
    models (inverse-CDF in declared support order). Replays are bit-exact
    for a generator seeded the same way.
    """
    signal = hypothesis is Hypothesis.SIGNAL
    if isinstance(model, GaussianMeanShift):
        mean = model.delta if signal else 0.0
        x = mean + rng.standard_normal()
        return model.delta * x - model.delta * model.delta / 2.0
    if isinstance(model, Bernoulli):
        p = model.p1 if signal else model.p0
        x = 1.0 if rng.random() < p else 0.0
        return llr_increment(model, x)
    probs = model.g_probs if signal else model.f_probs
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return math.log(model.g_probs[i] / model.f_probs[i])
    return math.log(model.g_probs[-1] / model.f_probs[-1])


def model_from_dict(spec: dict) -> StreamModel:
    """Build a stream model from its tagged-record config form.

    Recognized tags: {"kind": "gaussian", "delta": ...},
    {"kind": "bernoulli", "p0": ..., "p1": ...},
    {"kind": "table", "support": [...], "f_probs": [...], "g_probs": [...]}.
    """
    kind = spec.get("kind")
    if kind == "gaussian":
        return GaussianMeanShift(delta=float(spec["delta"]))
    if kind == "bernoulli":
        return Bernoulli(p0=float(spec["p0"]), p1=float(spec["p1"]))
    if kind == "table":
        return TableLookup(
            support=tuple(spec["support"]),
            f_probs=tuple(spec["f_probs"]),
            g_probs=tuple(spec["g_probs"]),
        )
    raise ValueError(f"unknown stream model kind: {kind!r}")


def model_to_dict(model: StreamModel) -> dict:
    """Inverse of :func:`model_from_dict`, used for config echo in manifests."""
    if isinstance(model, GaussianMeanShift):
        return {"kind": "gaussian", "delta": model.delta}
    if isinstance(model, Bernoulli):
        return {"kind": "bernoulli", "p0": model.p0, "p1": model.p1}
    return {
        "kind": "table",
        "support": list(model.support),
        "f_probs": list(model.f_probs),
        "g_probs": list(model.g_probs),
    }
