"""Per-stream LLR accumulation and two-sided SPRT boundary logic.

Every detection procedure in this package drives the same primitive: a
stream's cumulative LLR walks until it leaves the open interval (-b, a).
Crossing a (checked first) identifies the stream as a signal, crossing -b
declares it noise, and both decisions are absorbing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HorizonExceeded, SampledInactiveStream
from .stream_models import Hypothesis, StreamModel, sample_llr_increment

__all__ = [
    "DEFAULT_HORIZON",
    "Status",
    "Thresholds",
    "LLRState",
    "apply_increment",
    "run_local_sprt",
]

# Hard per-stream sample cap. Termination is almost sure for any valid
# model, so the cap only converts nontermination bugs into loud errors.
DEFAULT_HORIZON = 10_000_000


class Status(enum.Enum):
    ACTIVE = "active"
    DETECTED_SIGNAL = "detected_signal"
    DECLARED_NOISE = "declared_noise"


@dataclass(frozen=True)
class Thresholds:
    """SPRT boundaries (a, b), exploration boundary b_prime, and the error
    budget (alpha, beta) they were calibrated from, when applicable.

    Constraints: a > 0, b > 0 and 0 <= b_prime <= b. When alpha/beta are
    present the calibration a = |log alpha| + log K, b = |log beta| + log K
    is guaranteed by :func:`seqdetect.bounds.calibrate_thresholds`; the
    triple itself cannot check it because it does not know K.
    """

    a: float
    b: float
    b_prime: float = 0.0
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"a must be positive and finite, got {self.a}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise DomainError(f"b must be positive and finite, got {self.b}")
        if not (0.0 <= self.b_prime <= self.b):
            raise DomainError(
                f"b_prime must lie in [0, b] = [0, {self.b}], got {self.b_prime}"
            )
        for name, level in (("alpha", self.alpha), ("beta", self.beta)):
            if level is not None and not (0.0 < level < 1.0):
                raise DomainError(f"{name} must lie in (0,1), got {level}")


@dataclass(slots=True)
class LLRState:
    """Running LLR of one stream: current value, samples taken, and status.

    The value keeps any overshoot past a boundary (no clipping), and a
    non-active status is absorbing: the stream must not be sampled again.
    """

    value: float = 0.0
    samples: int = 0
    status: Status = Status.ACTIVE


def apply_increment(state: LLRState, increment: float, thresholds: Thresholds) -> LLRState:
    """Fold one LLR increment into the state, updating its status in place.

    The detection boundary is checked before the noise boundary (they are
    disjoint for a, b > 0, so the order is a convention, not a behavior
    fork). Raises SampledInactiveStream if the stream already holds a
    decision: that is always a procedure bug.
    """
    if state.status is not Status.ACTIVE:
        raise SampledInactiveStream(
            f"stream with status {state.status.value} received an increment"
        )
    state.value += increment
    state.samples += 1
    if state.value >= thresholds.a:
        state.status = Status.DETECTED_SIGNAL
    elif state.value <= -thresholds.b:
        state.status = Status.DECLARED_NOISE
    return state


def run_local_sprt(
    model: StreamModel,
    hypothesis: Hypothesis,
    thresholds: Thresholds,
    rng: np.random.Generator,
    horizon: int = DEFAULT_HORIZON,
) -> tuple[int, Hypothesis]:
    """Sample one stream continuously until its LLR leaves (-b, a).

    Returns (samples, decision) where the decision is SIGNAL if the upper
    boundary was reached and NOISE for the lower one. Raises
    HorizonExceeded if the walk is still inside the interval after
    ``horizon`` samples.
    """
    state = LLRState()
    while state.status is Status.ACTIVE:
        if state.samples >= horizon:
            raise HorizonExceeded(
                f"local SPRT exceeded {horizon} samples (a={thresholds.a}, b={thresholds.b})"
            )
        apply_increment(state, sample_llr_increment(model, hypothesis, rng), thresholds)
    decision = (
        Hypothesis.SIGNAL if state.status is Status.DETECTED_SIGNAL else Hypothesis.NOISE
    )
    return state.samples, decision
