"""Poisson references, total variation distance and the Monte Carlo harness."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .graphs import PatternGraph
from .params import ModelParams, as_fraction
from .sampling import SeedSpec, project_graph, sample_incidence
from .thresholds import ThresholdReport, analyze
from .witness import critical_orbits, per_cover_counts

TAIL = 1e-12
BOOT_RESAMPLES = 1000
BOOT_LEVEL = 0.95


def poisson_pmf(lam: float, k: int) -> float:
    """e^{-λ} λ^k / k! in log space."""
    if lam < 0 or k < 0:
        raise ValueError("need lambda >= 0 and k >= 0")
    if lam == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))


def poisson_reference(lam: float, support_max: int = 0, tail: float = TAIL) -> tuple[np.ndarray, float]:
    """Poisson(λ) pmf on 0..K with K >= support_max and tail mass < ``tail``.

    Returns (pmf, mass beyond K).
    """
    lam = float(lam)
    top = max(int(support_max), int(stats.poisson.ppf(1 - tail, lam)) if lam > 0 else 0)
    while lam > 0 and stats.poisson.sf(top, lam) >= tail:
        top += 1
    pmf = stats.poisson.pmf(np.arange(top + 1), lam) if lam > 0 else np.eye(1, top + 1)[0]
    rest = float(stats.poisson.sf(top, lam)) if lam > 0 else 0.0
    return pmf, rest


def tv_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """½ Σ |a_k - b_k| over the union of the two finite supports."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    size = max(a.size, b.size)
    a = np.pad(a, (0, size - a.size))
    b = np.pad(b, (0, size - b.size))
    return 0.5 * math.fsum(np.abs(a - b))


@dataclass(frozen=True)
class TV:
    value: float
    truncation: float  # Poisson mass not represented; the true TV lies in [value, value + truncation]


def tv_to_poisson(pmf: Sequence[float], lam: float, tail: float = TAIL) -> TV:
    pmf = np.asarray(pmf, dtype=float)
    ref, rest = poisson_reference(lam, pmf.size - 1, tail)
    return TV(tv_distance(pmf, ref) + 0.5 * rest, 0.5 * rest)


def empirical_pmf(samples: Sequence[int]) -> np.ndarray:
    x = np.asarray(samples, dtype=np.int64)
    if x.size == 0:
        raise ValueError("no samples")
    if x.min() < 0:
        raise ValueError("counts must be non-negative")
    return np.bincount(x) / x.size


@dataclass(frozen=True)
class Interval:
    level: float
    low: float
    high: float

    def contains(self, x: float) -> bool:
        return self.low <= x <= self.high


def _tv_stat(lam):
    def stat(x, axis=-1):
        x = np.asarray(x)
        top = int(x.max())
        ref, rest = poisson_reference(lam, top)
        counts = np.apply_along_axis(lambda r: np.bincount(r, minlength=ref.size), axis, x)
        emp = counts / x.shape[axis]
        return 0.5 * (np.abs(emp - ref).sum(axis=-1) + rest)
    return stat


def bootstrap_interval(samples: Sequence[int], statistic, seed: SeedSpec, *,
                       resamples: int = BOOT_RESAMPLES, level: float = BOOT_LEVEL) -> Interval | None:
    """Percentile bootstrap; None when fewer than two samples."""
    x = np.asarray(samples, dtype=np.int64)
    if x.size < 2:
        return None
    res = stats.bootstrap((x,), statistic, n_resamples=resamples, confidence_level=level,
                          method="percentile", vectorized=True, random_state=seed.generator())
    lo, hi = res.confidence_interval
    return Interval(level, float(lo), float(hi))


@dataclass
class DistributionSummary:
    n: int
    m: int
    p: float
    replicates: int
    lam: float
    pmf: np.ndarray
    tv: float
    tv_truncation: float
    tv_ci: Interval | None
    mean: float
    variance: float
    mean_ci: Interval | None
    y0_mean: float
    y1_mean: float
    counts: np.ndarray = field(repr=False)

    @property
    def y1_share(self) -> float:
        return self.y1_mean / self.mean if self.mean > 0 else 0.0


def summarize(counts: Sequence[int], y0: Sequence[int], y1: Sequence[int], lam: float,
              n: int, m: int, p: float, seed: SeedSpec) -> DistributionSummary:
    x = np.asarray(counts, dtype=np.int64)
    pmf = empirical_pmf(x)
    tv = tv_to_poisson(pmf, lam)
    tv_ci = bootstrap_interval(x, _tv_stat(lam), SeedSpec(seed.master, n, 1))
    mean_ci = bootstrap_interval(x, lambda s, axis=-1: np.mean(s, axis=axis), SeedSpec(seed.master, n, 2))
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    return DistributionSummary(n, m, p, int(x.size), float(lam), pmf, tv.value, tv.truncation, tv_ci,
                               float(x.mean()), var, mean_ci, float(np.mean(y0)), float(np.mean(y1)), x)


class RegimeError(RuntimeError):
    pass


def run_experiment(pattern: PatternGraph, alpha, c: float, n_grid: Sequence[int], replicates: int,
                   seed: int | SeedSpec, *, force: bool = False, min_replicates: int = 100,
                   report: ThresholdReport | None = None,
                   workers: int = 1) -> list[DistributionSummary]:
    """Sample ``replicates`` graphs at p = c n^-eta0 for each n and summarise X.

    Replicate r at grid size n uses stream (master, r) with stream index n,
    so each (n, r) pair is reproducible on its own.
    """
    alpha = as_fraction(alpha)
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    report = report if report is not None else analyze(pattern, alpha, c)
    if not force:
        if not report.regime.passes:
            raise RegimeError("; ".join(report.regime.messages))
        if replicates < min_replicates:
            raise RegimeError(f"need at least {min_replicates} replicates (got {replicates})")
    lam = float(report.lambda0(c))
    orbits0 = critical_orbits(pattern, report)
    out = []
    for n in n_grid:
        params = ModelParams.at_threshold(n, alpha, c, report.eta0)
        chunks = [range(i, min(i + _CHUNK, replicates)) for i in range(0, replicates, _CHUNK)]
        args = [(pattern, report, orbits0, params, seed.master, list(ch)) for ch in chunks]
        if workers > 1 and len(chunks) > 1:
            with ProcessPoolExecutor(workers) as pool:
                parts = list(pool.map(_replicate_batch, args))
        else:
            parts = [_replicate_batch(a) for a in args]
        rows = [row for part in parts for row in part]
        xs, y0s, y1s = (list(col) for col in zip(*rows)) if rows else ([], [], [])
        out.append(summarize(xs, y0s, y1s, lam, n, params.m, params.p, seed))
    return out


_CHUNK = 250


def _replicate_batch(args) -> list[tuple[int, int, int]]:
    pattern, report, orbits0, params, master, reps = args
    rows = []
    for r in reps:
        s = sample_incidence(params.n, params.m, params.p, SeedSpec(master, r, params.n))
        cc = per_cover_counts(s, pattern, report, project_graph(s), orbits0=orbits0)
        rows.append((cc.x, cc.y0, cc.y1))
    return rows


def tv_trend_ok(summaries: Sequence[DistributionSummary]) -> bool:
    """Each TV is at most the previous grid point's upper 95% bound."""
    for prev, cur in zip(summaries, summaries[1:]):
        bound = prev.tv_ci.high if prev.tv_ci is not None else prev.tv
        if cur.tv > bound:
            return False
    return True


def share_nonincreasing(summaries: Sequence[DistributionSummary]) -> bool:
    shares = [s.y1_share for s in summaries]
    return all(b <= a for a, b in zip(shares, shares[1:]))
