"""The three full detection procedures: two-phase proposed rule,
follow-the-leader, and the oracle benchmark.

All procedures share the decision logic of :mod:`seqdetect.llr_core`
(detect at LLR >= a, declare noise at LLR <= -b, stop when no stream is
active) and differ only in which stream they sample at each time instant:

* proposed: Phase I walks the streams in non-increasing signal-KL order,
  sampling each until its LLR leaves (-b_prime, a); Phase II finishes the
  survivors with a configurable rule (largest LLR, largest |LLR|, or
  smallest index). With b_prime = 0 Phase I takes no samples and the rule
  degenerates to pure follow-the-leader.
* follow_the_leader: always samples the active stream with the largest
  LLR.
* oracle: knows the true signal set; runs full SPRTs on the signals first
  (hardest-to-miss first, i.e. largest signal KL), then on the noises in
  index order.

Ties in every argmax/argmin selection break toward the stream earliest
in the visit order (non-increasing signal KL, then original index).
Stream indices in results are the original 1-based ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, HorizonExceeded
from .llr_core import DEFAULT_HORIZON, LLRState, Status, Thresholds, apply_increment
from .rng import TrialRng
from .stream_models import GroundTruth, Hypothesis, StreamModel, sample_llr_increment

__all__ = [
    "PHASE2_RULES",
    "ProcedureSpec",
    "TrialResult",
    "sort_streams",
    "run_proposed",
    "run_follow_the_leader",
    "run_oracle",
    "run_procedure",
]

PHASE2_RULES = ("follow_the_leader", "follow_the_absolute_leader", "in_order")
_KINDS = ("proposed", "follow_the_leader", "oracle")


@dataclass(frozen=True)
class ProcedureSpec:
    """Which sampling rule to run.

    ``b_prime`` (proposed only) overrides the exploration threshold from
    the Thresholds when set; it must end up in [0, b]. ``name`` labels the
    procedure in CSV output and defaults to the kind.
    """

    kind: str
    b_prime: float | None = None
    phase2: str = "follow_the_leader"
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown procedure kind {self.kind!r}; expected one of {_KINDS}")
        if self.phase2 not in PHASE2_RULES:
            raise ConfigError(f"unknown phase2 rule {self.phase2!r}; expected one of {PHASE2_RULES}")
        if self.b_prime is not None and self.kind != "proposed":
            raise ConfigError("b_prime applies to the proposed procedure only")
        if self.b_prime is not None and self.b_prime < 0:
            raise ConfigError(f"b_prime must be nonnegative, got {self.b_prime}")

    @property
    def label(self) -> str:
        return self.name if self.name is not None else self.kind


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one simulated run.

    detection_times are the global times of successive detection events;
    per_stream_samples is indexed by original stream (entry i-1 for stream
    i); detected_set holds original 1-based indices. phase1_end is the
    global time at which Phase I finished, for the proposed procedure only.
    """

    detection_times: tuple[int, ...]
    t_stop: int
    detected_set: frozenset[int]
    per_stream_samples: tuple[int, ...]
    false_alarm: bool
    missed_detection: bool
    phase1_end: int | None = None

    def __post_init__(self) -> None:
        if sum(self.per_stream_samples) != self.t_stop:
            raise ValueError("per-stream samples must add up to t_stop")
        if any(t2 <= t1 for t1, t2 in zip(self.detection_times, self.detection_times[1:])):
            raise ValueError("detection times must be strictly increasing")
        if self.detection_times and self.detection_times[-1] > self.t_stop:
            raise ValueError("detections cannot happen after termination")
        if len(self.detected_set) != len(self.detection_times):
            raise ValueError("one detection event per detected stream")


def sort_streams(models: list[StreamModel] | tuple[StreamModel, ...]) -> tuple[int, ...]:
    """Visit order: 1-based stream indices by non-increasing signal KL.

    The sort is stable, so streams with equal signal KL keep their original
    relative order. Procedures sample in this order but report results in
    original indexing.
    """
    return tuple(sorted(range(1, len(models) + 1), key=lambda s: (-models[s - 1].signal_kl, s)))


class _Trial:
    """Shared per-trial machinery: states, global clock, detection log."""

    __slots__ = ("models", "hyps", "thresholds", "rng", "horizon", "states",
                 "n", "detection_times", "detected")

    def __init__(
        self,
        models: tuple[StreamModel, ...],
        truth: GroundTruth,
        thresholds: Thresholds,
        rng: TrialRng,
        horizon: int,
    ) -> None:
        k = len(models)
        if any(s > k for s in truth.signal_set):
            raise ConfigError(f"signal set {sorted(truth.signal_set)} references streams beyond K={k}")
        self.models = models
        self.hyps = tuple(
            Hypothesis.SIGNAL if (i + 1) in truth.signal_set else Hypothesis.NOISE
            for i in range(k)
        )
        self.thresholds = thresholds
        self.rng = rng
        self.horizon = horizon
        self.states = [LLRState() for _ in range(k)]
        self.n = 0
        self.detection_times: list[int] = []
        self.detected: list[int] = []

    def sample(self, stream: int) -> LLRState:
        """Draw one observation from 1-based ``stream`` and fold it in."""
        state = self.states[stream - 1]
        if state.samples >= self.horizon:
            raise HorizonExceeded(f"stream {stream} exceeded the {self.horizon}-sample cap")
        inc = sample_llr_increment(
            self.models[stream - 1], self.hyps[stream - 1], self.rng.stream(stream)
        )
        self.n += 1
        apply_increment(state, inc, self.thresholds)
        if state.status is Status.DETECTED_SIGNAL:
            self.detection_times.append(self.n)
            self.detected.append(stream)
        return state

    def result(self, truth: GroundTruth, phase1_end: int | None) -> TrialResult:
        detected = frozenset(self.detected)
        return TrialResult(
            detection_times=tuple(self.detection_times),
            t_stop=self.n,
            detected_set=detected,
            per_stream_samples=tuple(st.samples for st in self.states),
            false_alarm=bool(detected - truth.signal_set),
            missed_detection=bool(truth.signal_set - detected),
            phase1_end=phase1_end,
        )


def _select(order: tuple[int, ...], states: list[LLRState], phase2: str) -> int | None:
    """Next active stream under a Phase-II rule, or None when all decided.

    Scanning in visit order with strict comparisons implements the
    smallest-index tie-break.
    """
    best: int | None = None
    best_key = 0.0
    for s in order:
        state = states[s - 1]
        if state.status is not Status.ACTIVE:
            continue
        if phase2 == "in_order":
            return s
        key = abs(state.value) if phase2 == "follow_the_absolute_leader" else state.value
        if best is None or key > best_key:
            best = s
            best_key = key
    return best


def run_proposed(
    models: list[StreamModel] | tuple[StreamModel, ...],
    truth: GroundTruth,
    thresholds: Thresholds,
    spec: ProcedureSpec,
    rng: TrialRng,
    horizon: int = DEFAULT_HORIZON,
) -> TrialResult:
    """Run the two-phase procedure and return its TrialResult.

    Phase I samples each stream, in non-increasing signal-KL order, while
    its LLR stays inside (-b_prime, a); a stream leaving through a is a
    detection, through -b a noise declaration, and one left in (-b,
    -b_prime] stays active, keeping its accumulated LLR for Phase II.
    Phase II repeatedly samples the active stream chosen by the spec's
    phase2 rule until every stream holds a decision.
    """
    if spec.kind != "proposed":
        raise ConfigError(f"run_proposed got a spec of kind {spec.kind!r}")
    b_prime = thresholds.b_prime if spec.b_prime is None else spec.b_prime
    if not (0.0 <= b_prime <= thresholds.b):
        raise ConfigError(f"b_prime={b_prime} must lie in [0, b] = [0, {thresholds.b}]")

    models = tuple(models)
    order = sort_streams(models)
    trial = _Trial(models, truth, thresholds, rng, horizon)

    # Phase I: with b_prime = 0 the LLR starts on the boundary, so the
    # visit takes no samples and everything is left to Phase II.
    for s in order:
        state = trial.states[s - 1]
        while state.status is Status.ACTIVE and -b_prime < state.value < thresholds.a:
            trial.sample(s)
    phase1_end = trial.n

    # Phase II: finish the survivors.
    while True:
        s = _select(order, trial.states, spec.phase2)
        if s is None:
            break
        trial.sample(s)

    return trial.result(truth, phase1_end)


def run_follow_the_leader(
    models: list[StreamModel] | tuple[StreamModel, ...],
    truth: GroundTruth,
    thresholds: Thresholds,
    rng: TrialRng,
    horizon: int = DEFAULT_HORIZON,
) -> TrialResult:
    """At every instant sample the active stream with the largest LLR.

    Equals the proposed procedure with b_prime = 0 and a follow-the-leader
    Phase II, path for path under the same TrialRng; it is kept as its own
    entry point because it is a published baseline, and its TrialResult
    carries no phase1_end.
    """
    models = tuple(models)
    order = sort_streams(models)
    trial = _Trial(models, truth, thresholds, rng, horizon)
    while True:
        s = _select(order, trial.states, "follow_the_leader")
        if s is None:
            break
        trial.sample(s)
    return trial.result(truth, None)


def run_oracle(
    models: list[StreamModel] | tuple[StreamModel, ...],
    truth: GroundTruth,
    thresholds: Thresholds,
    rng: TrialRng,
    horizon: int = DEFAULT_HORIZON,
) -> TrialResult:
    """Benchmark that knows the true signal set.

    Runs a full SPRT on each stream in sequence: true signals first in
    non-increasing signal-KL order, then true noises in original index
    order (a deterministic choice; any noise order performs the same).
    """
    models = tuple(models)
    trial = _Trial(models, truth, thresholds, rng, horizon)
    signals = [s for s in sort_streams(models) if s in truth.signal_set]
    noises = [s for s in range(1, len(models) + 1) if s not in truth.signal_set]
    for s in signals + noises:
        state = trial.states[s - 1]
        while state.status is Status.ACTIVE:
            trial.sample(s)
    return trial.result(truth, None)


def run_procedure(
    models: list[StreamModel] | tuple[StreamModel, ...],
    truth: GroundTruth,
    thresholds: Thresholds,
    spec: ProcedureSpec,
    rng: TrialRng,
    horizon: int = DEFAULT_HORIZON,
) -> TrialResult:
    """Dispatch on the spec kind; the entry point the Monte Carlo engine uses."""
    if spec.kind == "proposed":
        return run_proposed(models, truth, thresholds, spec, rng, horizon)
    if spec.kind == "follow_the_leader":
        return run_follow_the_leader(models, truth, thresholds, rng, horizon)
    return run_oracle(models, truth, thresholds, rng, horizon)
