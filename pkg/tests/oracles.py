"""Independent oracles used by the test suite.

Everything here is deliberately written against the mathematical
definitions rather than the library code paths it checks: the allocation
oracle enumerates simplex grid points and k-subsets directly, and the
SPRT oracle simulates cumulative-sum paths with vectorized numpy instead
of the library's per-step state machine.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def simplex_grid(n: int, m: int) -> np.ndarray:
    """All weight vectors of length n with entries i/m summing exactly to 1."""
    points = [
        comp
        for comp in itertools.product(range(m + 1), repeat=n - 1)
        if sum(comp) <= m
    ]
    arr = np.array([list(c) + [m - sum(c)] for c in points], dtype=np.float64)
    return arr / m


def _grid_value(weights: np.ndarray, kls: np.ndarray, k: int) -> np.ndarray:
    """min over k-subsets of sum_{i in C} w_i * kls_i, for each grid row."""
    n = len(kls)
    best = None
    for subset in itertools.combinations(range(n), k):
        vals = weights[:, subset] @ kls[list(subset)]
        best = vals if best is None else np.minimum(best, vals)
    return best


def maxmin_allocation_grid(kls, k: int, stages: int = 3, m0: int = 50,
                           zoom: int = 10, box: float = 4.0):
    """Brute-force sup over the simplex of the min over k-subsets.

    Stage 1 scans a full simplex grid; later stages rescan a finer grid
    restricted to a box around the best point so far (the objective is
    concave, so the refinement keeps enumerating grid points near the
    optimum). Returns (value, weights) of the best grid point visited.
    """
    kls = np.asarray(kls, dtype=np.float64)
    n = len(kls)
    if n == 1:
        return float(kls[0]) if k == 1 else 0.0, np.array([1.0])

    step = 1.0 / m0
    grid = simplex_grid(n, m0)
    values = _grid_value(grid, kls, k)
    best_idx = int(np.argmax(values))
    best_w, best_v = grid[best_idx], float(values[best_idx])

    for _ in range(stages - 1):
        m = m0 * zoom
        radius = box * step
        lo = np.maximum(best_w - radius, 0.0)
        hi = np.minimum(best_w + radius, 1.0)
        axes = [
            np.arange(math.floor(lo[i] * m), math.ceil(hi[i] * m) + 1)
            for i in range(n - 1)
        ]
        combos = np.array(list(itertools.product(*axes)), dtype=np.int64)
        last = m - combos.sum(axis=1)
        keep = (last >= np.floor(lo[-1] * m)) & (last <= np.ceil(hi[-1] * m)) & (last >= 0)
        combos = np.column_stack([combos[keep], last[keep]])
        grid = combos / m
        values = _grid_value(grid, kls, k)
        idx = int(np.argmax(values))
        if float(values[idx]) > best_v:
            best_v, best_w = float(values[idx]), grid[idx]
        step = 1.0 / m
        m0 = m

    return best_v, best_w


def sprt_run_lengths_numpy(delta: float, signal: bool, a: float, b: float,
                           n_runs: int, seed: int, max_len: int = 4096):
    """Run lengths and decisions of Gaussian SPRTs, via vectorized cumsum.

    Independent of the library: paths are materialized as arrays and the
    first boundary crossing is located with argmax over boolean masks.
    Returns (samples, detected) arrays of shape (n_runs,).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    mean = (delta if signal else 0.0) * delta - delta * delta / 2.0
    samples = np.zeros(n_runs, dtype=np.int64)
    detected = np.zeros(n_runs, dtype=bool)
    for run in range(n_runs):
        total, steps = 0.0, 0
        while True:
            incs = rng.standard_normal(max_len) * delta + mean
            path = total + np.cumsum(incs)
            crossed = (path >= a) | (path <= -b)
            if crossed.any():
                first = int(np.argmax(crossed))
                samples[run] = steps + first + 1
                detected[run] = path[first] >= a
                break
            total = path[-1]
            steps += max_len
    return samples, detected
