"""Seeded Monte Carlo experiments and their statistics.

Trials run on counter-based streams addressed by (base_seed, trial index),
so batches are reproducible, order-independent and safely parallel.  A
fast level-space path samples directly from chain rows; phase experiments
decompose runs at the local optimum the way the waiting-time analysis
does.  All aggregation is pure arithmetic on the collected records.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .benchmarks import BenchmarkSpec, local_optimum_level
from .heuristics import AlgorithmSpec, Init, RngStream, TrialRecord, run_until_optimum
from .chain import ChainStructure, build_level_chain, expected_runtime_exact

_DEFAULT_MAX_ITERS = 10 ** 9
_LEVEL_STREAM = 1 << 62
_PHASE_STREAM = (1 << 62) + 1


class TruncatedRunError(RuntimeError):
    """A batch hit its iteration cap; means would be biased."""


@dataclass(frozen=True)
class BatchStats:
    """Aggregate of one batch; trials counts the runs included in the mean."""

    trials: int
    mean: float
    variance: float
    std_error: float
    truncation_count: int


@dataclass(frozen=True)
class PhaseStats:
    """Aggregate of a phase experiment started at the local-optimum level.

    A phase is one excursion that ends when the level is again the local
    optimum or has reached n; staying put for one iteration is a length-1
    phase.  mean_phase_count is the geometric estimate 1/success-rate, and
    wald_product = mean_phase_count * mean_phase_length estimates the mean
    crossing time measured directly by mean_T2 over completed crossings.
    """

    phases: int
    successes: int
    mean_phase_length: float
    se_phase_length: float
    success_rate: float
    se_success_rate: float
    mean_phase_count: float
    mean_T2: float
    se_T2: float
    t2_count: int
    wald_product: float
    se_wald: float


def _aggregate(values: list, truncated: int) -> BatchStats:
    count = len(values)
    mean = float(np.mean(values)) if count else math.nan
    variance = float(np.var(values, ddof=1)) if count >= 2 else 0.0
    std_error = math.sqrt(variance / count) if count else math.nan
    return BatchStats(count, mean, variance, std_error, truncated)


def default_max_iters(bench: BenchmarkSpec, alg: AlgorithmSpec, init: Init = Init()) -> int:
    """100x the exact expectation when finite, else a 1e9 cap."""
    exact = expected_runtime_exact(bench, alg, init)
    if not exact.is_finite:
        return _DEFAULT_MAX_ITERS
    return max(1000, int(math.ceil(100 * exact.as_float())))


def _run_range(bench, alg, init, max_iters, base_seed, lo, hi) -> list:
    out = []
    for t in range(lo, hi):
        rec = run_until_optimum(bench, alg, RngStream(base_seed, t), max_iters, init)
        out.append((rec.iterations, rec.truncated))
    return out


def run_batch(
    bench: BenchmarkSpec,
    alg: AlgorithmSpec,
    init: Init = Init(),
    trials: int = 1000,
    max_iters: Optional[int] = None,
    base_seed: int = 0,
    threads: Optional[int] = None,
    on_truncated: str = "fail",
) -> BatchStats:
    """Independent bit-string runs on streams (base_seed, 0..trials-1).

    on_truncated: "fail" raises if any trial hit the cap (the default;
    censored means are biased), "keep" scores capped trials at max_iters,
    "drop" excludes them from the mean but reports the count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if on_truncated not in ("fail", "keep", "drop"):
        raise ValueError(f"on_truncated must be fail, keep or drop, got {on_truncated!r}")
    if max_iters is None:
        max_iters = default_max_iters(bench, alg, init)
    if threads is None:
        threads = int(os.environ.get("HHLAB_THREADS", "1"))
    if threads > 1 and trials >= 2 * threads:
        chunk = (trials + threads - 1) // threads
        ranges = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    _run_range,
                    *zip(*(((bench, alg, init, max_iters, base_seed, lo, hi)) for lo, hi in ranges)),
                )
            )
        records = [rec for part in parts for rec in part]
    else:
        records = _run_range(bench, alg, init, max_iters, base_seed, 0, trials)
    truncated = sum(1 for _, trunc in records if trunc)
    if truncated and on_truncated == "fail":
        raise TruncatedRunError(
            f"{truncated} of {trials} trials hit max_iters={max_iters}; "
            "raise the cap or pass on_truncated='keep'/'drop'"
        )
    if on_truncated == "drop":
        values = [it for it, trunc in records if not trunc]
        if not values:
            raise TruncatedRunError("every trial was truncated; nothing to average")
    else:
        values = [it for it, _ in records]
    return _aggregate(values, truncated)


def run_batch_levels(
    bench: BenchmarkSpec,
    alg: AlgorithmSpec,
    init: Init = Init(),
    trials: int = 1000,
    max_iters: Optional[int] = None,
    base_seed: int = 0,
    on_truncated: str = "fail",
) -> BatchStats:
    """Same level process as run_batch, sampled directly from chain rows
    for all trials at once.  Statistically indistinguishable from the
    bit-string path, not pathwise identical."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if on_truncated not in ("fail", "keep", "drop"):
        raise ValueError(f"on_truncated must be fail, keep or drop, got {on_truncated!r}")
    if max_iters is None:
        max_iters = default_max_iters(bench, alg, init)
    chain = build_level_chain(bench, alg)
    n = bench.n
    gen = RngStream(base_seed, _LEVEL_STREAM).gen
    if init.level is None:
        levels = gen.binomial(n, 0.5, size=trials).astype(np.int64)
    else:
        levels = np.full(trials, init.level, dtype=np.int64)
    iters = np.zeros(trials, dtype=np.int64)
    active = levels != n
    if chain.structure is ChainStructure.BIRTH_DEATH:
        rows = chain.float_rows()
        up = np.ascontiguousarray(rows[np.arange(n + 1), np.minimum(np.arange(n + 1) + 1, n)])
        up[n] = 0.0
        down = np.zeros(n + 1)
        down[1:] = rows[np.arange(1, n + 1), np.arange(0, n)]
        down[n] = 0.0
        t = 0
        while active.any() and t < max_iters:
            t += 1
            cur = levels[active]
            u = gen.random(cur.shape[0])
            step = np.where(u < up[cur], 1, np.where(u < up[cur] + down[cur], -1, 0))
            cur = cur + step
            levels[active] = cur
            just_done = np.zeros_like(active)
            just_done[active] = cur == n
            iters[just_done] = t
            active &= ~just_done
    else:
        cum = np.cumsum(chain.float_rows(), axis=1)
        cum[:, -1] = 1.0
        t = 0
        while active.any() and t < max_iters:
            t += 1
            cur = levels[active]
            u = gen.random(cur.shape[0])
            new = (u[:, None] > cum[cur]).sum(axis=1)
            levels[active] = new
            just_done = np.zeros_like(active)
            just_done[active] = new == n
            iters[just_done] = t
            active &= ~just_done
    truncated = int(active.sum())
    iters[active] = max_iters
    if truncated and on_truncated == "fail":
        raise TruncatedRunError(
            f"{truncated} of {trials} level trials hit max_iters={max_iters}"
        )
    if on_truncated == "drop":
        values = iters[~active].tolist()
        if not values:
            raise TruncatedRunError("every trial was truncated; nothing to average")
    else:
        values = iters.tolist()
    return _aggregate(values, truncated)


def phase_experiment(
    bench: BenchmarkSpec,
    alg: AlgorithmSpec,
    phases: int = 100000,
    base_seed: int = 0,
) -> PhaseStats:
    """Simulate the level process phase by phase from the local optimum.

    Each phase runs until the level is back at the local optimum or has
    reached n; a success restarts the next phase at the local optimum.
    Crossing times T2 are sums of phase lengths between successes; only
    completed crossings enter mean_T2.
    """
    if phases < 1:
        raise ValueError("phases must be >= 1")
    anchor = local_optimum_level(bench)
    if anchor is None:
        raise ValueError("phase experiments need a benchmark with a local optimum")
    chain = build_level_chain(bench, alg)
    n = bench.n
    rows = chain.float_rows()
    cum = np.cumsum(rows, axis=1)
    cum[:, -1] = 1.0
    gen = RngStream(base_seed, _PHASE_STREAM).gen
    length_sum = 0
    length_sqsum = 0
    successes = 0
    t2_segments = []
    seg = 0
    block = np.empty(0)
    pos = 0
    for _ in range(phases):
        level = anchor
        length = 0
        while True:
            if pos >= block.shape[0]:
                block = gen.random(1 << 14)
                pos = 0
            u = block[pos]
            pos += 1
            level = int(np.searchsorted(cum[level], u, side="right"))
            length += 1
            if level == anchor or level == n:
                break
        length_sum += length
        length_sqsum += length * length
        seg += length
        if level == n:
            successes += 1
            t2_segments.append(seg)
            seg = 0
    mean_len = length_sum / phases
    var_len = max(0.0, length_sqsum / phases - mean_len ** 2)
    se_len = math.sqrt(var_len / phases)
    rate = successes / phases
    se_rate = math.sqrt(rate * (1 - rate) / phases)
    est_n = math.inf if successes == 0 else phases / successes
    if t2_segments:
        arr = np.asarray(t2_segments, dtype=float)
        t2_mean = float(arr.mean())
        t2_se = float(arr.std(ddof=1) / math.sqrt(arr.shape[0])) if arr.shape[0] >= 2 else math.inf
    else:
        t2_mean = math.nan
        t2_se = math.inf
    wald = est_n * mean_len
    if successes and rate > 0:
        se_wald = math.sqrt(
            (se_len / rate) ** 2 + (mean_len * se_rate / rate ** 2) ** 2
        )
    else:
        se_wald = math.inf
    return PhaseStats(
        phases=phases,
        successes=successes,
        mean_phase_length=mean_len,
        se_phase_length=se_len,
        success_rate=rate,
        se_success_rate=se_rate,
        mean_phase_count=est_n,
        mean_T2=t2_mean,
        se_T2=t2_se,
        t2_count=len(t2_segments),
        wald_product=wald,
        se_wald=se_wald,
    )


def loglog_slope(points: list) -> tuple:
    """OLS fit of ln(value) against ln(n); returns (slope, intercept, r2)."""
    if len(points) < 3:
        raise ValueError("a slope fit needs at least 3 points")
    xs = []
    ys = []
    for n, value in points:
        if n <= 0 or value <= 0:
            raise ValueError(f"slope fits need positive data, got ({n}, {value})")
        xs.append(math.log(n))
        ys.append(math.log(float(value)))
    x = np.asarray(xs)
    y = np.asarray(ys)
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(residuals @ residuals)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    r2 = 1.0 if ss_tot == 0 and ss_res == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2)
