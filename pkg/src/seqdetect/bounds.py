"""Closed-form bounds and calibrations.

Four pieces live here, all pure functions of model constants:

* ``bernoulli_kl(x, y)`` -- the binary divergence
  d(x, y) = x log(x/(1-y)) + (1-x) log((1-x)/y), the building block of the
  universal lower bounds;
* ``lower_bounds`` -- for any procedure meeting familywise error levels
  (alpha, beta), a lower bound on E[T_k ^ T_stop] for every k and on
  E[T_stop], in both the exact d-based form and its small-error
  asymptotic form (d(beta, alpha) -> |log alpha|, d(alpha, beta) ->
  |log beta|);
* ``calibrate_thresholds`` -- the (a, b) selection that guarantees the
  familywise error levels via the union bound, a = |log alpha| + log K,
  b = |log beta| + log K, with default exploration threshold log(a);
* ``maxmin_allocation`` -- the closed-form solution of the max-min
  sampling-allocation problem behind the per-k lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .llr_core import Thresholds
from .stream_models import GroundTruth, StreamModel

__all__ = [
    "LowerBoundReport",
    "AllocationResult",
    "bernoulli_kl",
    "lower_bounds",
    "calibrate_thresholds",
    "maxmin_allocation",
]


@dataclass(frozen=True)
class LowerBoundReport:
    """Per-k and termination-time lower bounds for one (models, truth) pair.

    per_k_bounds[k-1] bounds E[T_k ^ T_stop]; for k beyond the number of
    true signals it equals t_stop_bound. The asymptotic variants replace
    the d terms by |log alpha| / |log beta|.
    """

    per_k_bounds: tuple[float, ...]
    t_stop_bound: float
    asymptotic_per_k: tuple[float, ...]
    asymptotic_t_stop: float


@dataclass(frozen=True)
class AllocationResult:
    """Value and maximizing weights of the max-min allocation problem."""

    value: float
    weights: tuple[float, ...]


def bernoulli_kl(x: float, y: float) -> float:
    """d(x, y) = x log(x/(1-y)) + (1-x) log((1-x)/y) for x, y in (0, 1).

    This is the KL divergence of a Bernoulli(x) against a Bernoulli(1-y);
    it is nonnegative, zero exactly at x = 1-y, and decreasing in both
    arguments on the x + y < 1 region the bounds use.
    """
    if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
        raise DomainError(f"bernoulli_kl needs x, y in (0,1), got x={x}, y={y}")
    return x * math.log(x / (1.0 - y)) + (1.0 - x) * math.log((1.0 - x) / y)


def _ordered_signal_kls(models, truth: GroundTruth) -> list[float]:
    return sorted((models[i - 1].signal_kl for i in truth.signal_set), reverse=True)


def lower_bounds(
    models: list[StreamModel] | tuple[StreamModel, ...],
    truth: GroundTruth,
    alpha: float,
    beta: float,
) -> LowerBoundReport:
    """Universal lower bounds on expected detection/termination times.

    For k up to the number of true signals,
    ``sum_{i<=k} d(beta, alpha) / I_(i)`` with I_(1) >= I_(2) >= ... the
    ordered signal KLs of the true signal streams; for larger k, and for
    the termination time, the sum over all streams of the per-stream
    testing costs ``d(beta, alpha)/I_i`` (signals) and
    ``d(alpha, beta)/J_i`` (noises). Requires alpha + beta < 1.
    """
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError(f"alpha and beta must lie in (0,1), got {alpha}, {beta}")
    if alpha + beta >= 1.0:
        raise DomainError(f"need alpha + beta < 1, got {alpha} + {beta}")
    k_total = len(models)
    if any(s > k_total for s in truth.signal_set):
        raise DomainError("signal set references streams beyond the model list")

    d_signal = bernoulli_kl(beta, alpha)   # cost numerator for signal streams
    d_noise = bernoulli_kl(alpha, beta)    # cost numerator for noise streams
    log_alpha = abs(math.log(alpha))
    log_beta = abs(math.log(beta))

    ordered = _ordered_signal_kls(models, truth)
    noise_inv = [
        1.0 / models[i - 1].noise_kl
        for i in range(1, k_total + 1)
        if i not in truth.signal_set
    ]
    signal_inv = [1.0 / kl for kl in ordered]

    t_stop = d_signal * sum(signal_inv) + d_noise * sum(noise_inv)
    asym_t_stop = log_alpha * sum(signal_inv) + log_beta * sum(noise_inv)

    per_k: list[float] = []
    asym_per_k: list[float] = []
    acc = 0.0
    for k in range(1, k_total + 1):
        if k <= len(ordered):
            acc += signal_inv[k - 1]
            per_k.append(d_signal * acc)
            asym_per_k.append(log_alpha * acc)
        else:
            per_k.append(t_stop)
            asym_per_k.append(asym_t_stop)

    return LowerBoundReport(
        per_k_bounds=tuple(per_k),
        t_stop_bound=t_stop,
        asymptotic_per_k=tuple(asym_per_k),
        asymptotic_t_stop=asym_t_stop,
    )


def calibrate_thresholds(alpha: float, beta: float, k: int) -> Thresholds:
    """Thresholds guaranteeing familywise error levels alpha and beta.

    a = |log alpha| + log K and b = |log beta| + log K make the union
    bound over K streams come out at the requested levels. The default
    exploration threshold is the rate-optimal log(a), clamped into [0, b].
    """
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError(f"alpha and beta must lie in (0,1), got {alpha}, {beta}")
    if k < 1:
        raise DomainError(f"need at least one stream, got K={k}")
    a = abs(math.log(alpha)) + math.log(k)
    b = abs(math.log(beta)) + math.log(k)
    b_prime = min(max(math.log(a), 0.0), b)
    return Thresholds(a=a, b=b, b_prime=b_prime, alpha=alpha, beta=beta)


def maxmin_allocation(kls: list[float] | tuple[float, ...], k: int) -> AllocationResult:
    """Closed-form solution of max over weights of the min, over k-subsets,
    of the weighted divergence sum.

    For non-increasing positive kls and 1 <= k <= K the optimum equalizes
    the first K-k+1 products w_i * kls[i] and drops the rest:
    value = 1 / sum_{i<=K-k+1} 1/kls[i], weights[i] = value / kls[i].
    """
    kls = tuple(float(v) for v in kls)
    n = len(kls)
    if n == 0:
        raise DomainError("kls must be nonempty")
    if not (1 <= k <= n):
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    if any(v <= 0.0 or not math.isfinite(v) for v in kls):
        raise DomainError("kls must be positive and finite")
    if any(kls[i] < kls[i + 1] for i in range(n - 1)):
        raise DomainError("kls must be sorted in non-increasing order")

    m = n - k + 1
    value = 1.0 / math.fsum(1.0 / kls[i] for i in range(m))
    weights = tuple(value / kls[i] if i < m else 0.0 for i in range(n))
    return AllocationResult(value=value, weights=weights)
