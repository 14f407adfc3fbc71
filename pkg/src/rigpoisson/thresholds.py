"""Appearance-threshold exponents and Poisson limits for induced copies.

All exponents are exact ``Fraction`` values; only c, p and concrete
monomial values are floats.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .covers import (
    CliqueCover,
    RestrictedCover,
    _cover_search,
    enumerate_cliques,
    enumerate_proper_covers,
)
from .graphs import DEFAULT_CAP, CapExceeded, PatternGraph, automorphism_count, bits, popcount
from .params import ModelParams, as_fraction

log = logging.getLogger(__name__)

STRICT = "strictly-alpha-balanced"
UNBALANCED = "alpha-unbalanced"
NEITHER = "neither"

MP2_WARN = 0.01


def _stats(cliques: Sequence[int], subset: int) -> tuple[int, int, int, int]:
    """(|C[S]|, ΣC[S], |C'[S]|, ΣC'[S])."""
    k = tot = k2 = tot2 = 0
    for q in cliques:
        s = popcount(q & subset)
        if s:
            k += 1
            tot += s
            if s >= 2:
                k2 += 1
                tot2 += s
    return k, tot, k2, tot2


def _cliques(cover) -> tuple[int, ...]:
    if isinstance(cover, CliqueCover):
        return cover.cliques
    if isinstance(cover, RestrictedCover):
        return cover.parts
    return tuple(cover)


def eta2(cover: CliqueCover, subset: int, alpha) -> Fraction | float:
    """Appearance exponent of the copies of H[S] induced by C[S] / C'[S].

    When no clique meets S (S made of isolated vertices) both monomials are
    n^{|S|}, which never vanishes; the exponent is then ``math.inf``.
    """
    alpha = as_fraction(alpha)
    if subset == 0:
        raise ValueError("S must be nonempty")
    size = popcount(subset)
    k, tot, k2, tot2 = _stats(cover.cliques, subset)
    if k == 0:
        return math.inf
    if tot == k:
        return (size + alpha * k) / tot
    boundary = Fraction(size, tot - k)
    if alpha < boundary:
        return (size + alpha * k) / tot
    if alpha == boundary:
        log.debug("eta2 boundary alpha = |S|/(ΣC[S]-|C[S]|) hit for S=%s", bits(subset))
    assert k2 > 0, "ΣC[S] > |C[S]| forces a restriction of size >= 2"
    return (size + alpha * k2) / tot2


def eta2_table(cover: CliqueCover, alpha) -> dict[int, Fraction]:
    return {s: eta2(cover, s, alpha) for s in range(1, cover.pattern.full + 1)}


def eta1(cover: CliqueCover, alpha) -> Fraction:
    return min(eta2_table(cover, alpha).values())


class _Feasibility:
    """Vectorised check of  min over S of eta2(P, S) >= eta  for a partial cover P.

    With alpha = a/b and eta = u/v the condition is, for every S,
        |S| b v + a v |P[S]|  - u b ΣP[S]  >= 0   and the same with P'[S],
    which adding cliques can only make harder once eta > alpha/2.
    """

    def __init__(self, graph: PatternGraph, cliques: Sequence[int]):
        subsets = np.arange(1 << graph.h)
        self.size = np.array([popcount(int(s)) for s in subsets], dtype=np.int64)
        self.rs = [np.array([popcount(q & int(s)) for s in subsets], dtype=np.int64) for q in cliques]
        self.ge1 = [(r >= 1).astype(np.int64) for r in self.rs]
        self.ge2 = [(r >= 2).astype(np.int64) for r in self.rs]
        self.rs2 = [r * g for r, g in zip(self.rs, self.ge2)]

    def zero(self):
        z = np.zeros_like(self.size)
        return (z, z, z, z)

    def add(self, state, i):
        k, t, k2, t2 = state
        return (k + self.ge1[i], t + self.rs[i], k2 + self.ge2[i], t2 + self.rs2[i])

    def ok(self, state, alpha: Fraction, eta: Fraction) -> bool:
        k, t, k2, t2 = state
        a, b = alpha.numerator, alpha.denominator
        u, v = eta.numerator, eta.denominator
        base = self.size * (b * v)
        if np.any(base + (a * v) * k - (u * b) * t < 0):
            return False
        return not np.any(base + (a * v) * k2 - (u * b) * t2 < 0)


def critical_covers(graph: PatternGraph, alpha, *, cap: int = DEFAULT_CAP,
                    exhaustive: bool = False) -> tuple[Fraction, list[CliqueCover]]:
    """(eta0, C0): the largest eta1 over proper covers and the covers attaining it.

    The default is an exact branch-and-bound over include/exclude choices of
    cliques. The all-edges cover always has eta1 > alpha/2, and above alpha/2
    adding a clique never raises any eta2, so a partial cover that already
    misses the incumbent can be cut. ``exhaustive=True`` scores every cover.
    """
    alpha = as_fraction(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if graph.h > cap:
        raise CapExceeded(f"pattern has {graph.h} vertices, cap is {cap}")
    if exhaustive:
        scored = [(eta1(c, alpha), c) for c in enumerate_proper_covers(graph, cap=cap)]
        best = max(s for s, _ in scored)
        return best, sorted((c for s, c in scored if s == best), key=lambda c: c.cliques)

    cliques = sorted(enumerate_cliques(graph), key=lambda q: (-popcount(q), q))
    edges_cover = CliqueCover(graph, tuple(sorted(q for q in cliques if popcount(q) == 2)))
    maximal = [q for q in cliques if not any(q != o and q & o == q for o in cliques)]
    incumbent = max(eta1(edges_cover, alpha), eta1(CliqueCover(graph, tuple(sorted(maximal))), alpha))
    assert incumbent > alpha / 2

    emasks, suffix = _cover_search(graph, cliques)
    target = (1 << graph.e) - 1
    feas = _Feasibility(graph, cliques)
    best = incumbent
    found: dict[tuple[int, ...], Fraction] = {}
    chosen: list[int] = []

    def rec(i, covered, state):
        nonlocal best
        if covered | suffix[i] != target:
            return
        if i == len(cliques):
            cover = CliqueCover(graph, tuple(sorted(chosen)))
            val = eta1(cover, alpha)
            if val >= best:
                best = val
                found[cover.cliques] = val
            return
        nxt = feas.add(state, i)
        if feas.ok(nxt, alpha, best):
            chosen.append(cliques[i])
            rec(i + 1, covered | emasks[i], nxt)
            chosen.pop()
        rec(i + 1, covered, state)

    rec(0, 0, feas.zero())
    c0 = sorted(k for k, v in found.items() if v == best)
    return best, [CliqueCover(graph, k) for k in c0]


def eta0(graph: PatternGraph, alpha, **kw) -> tuple[Fraction, list[CliqueCover]]:
    return critical_covers(graph, alpha, **kw)


@dataclass(frozen=True)
class BalanceVerdict:
    verdict: str
    witness: int | None  # subset S violating strict balance, if any
    eta2_full: Fraction
    eta2_min_proper: Fraction | None


def cover_balance(cover: CliqueCover, alpha, table: dict[int, Fraction] | None = None) -> BalanceVerdict:
    """Strict alpha-balance of one cover: eta2(S) > eta2(V) for all proper S."""
    table = table if table is not None else eta2_table(cover, alpha)
    full = cover.pattern.full
    top = table[full]
    proper = {s: v for s, v in table.items() if s != full}
    if not proper:
        return BalanceVerdict(STRICT, None, top, None)
    low = min(proper.values())
    witness = min((s for s, v in proper.items() if v == low), key=lambda s: (popcount(s), s))
    if low < top:
        return BalanceVerdict(UNBALANCED, witness, top, low)
    if low == top:
        return BalanceVerdict(NEITHER, witness, top, low)
    return BalanceVerdict(STRICT, None, top, low)


@dataclass(frozen=True)
class RegimeDiagnostics:
    eta0: Fraction
    alpha: Fraction
    mp2_exponent: Fraction  # mp^2 = c^2 n^(alpha - 2 eta0)
    passes: bool
    edgeless: bool  # mp^2 = o(n^-2)
    complete: bool  # ln n = o(mp^2)
    messages: tuple[str, ...] = ()


def regime_flags(eta0_value, alpha) -> RegimeDiagnostics:
    """Sign tests on the exponent of mp^2 at p = c n^-eta0."""
    eta0_value, alpha = as_fraction(eta0_value), as_fraction(alpha)
    x = alpha - 2 * eta0_value
    msgs = []
    passes = x < 0
    if not passes:
        msgs.append(f"mp^2 does not vanish: alpha - 2 eta0 = {x} >= 0")
    edgeless = x < -2
    if edgeless:
        msgs.append("mp^2 = o(n^-2): the graph is asymptotically edgeless")
    complete = x > 0
    if complete:
        msgs.append("ln n = o(mp^2): the graph is asymptotically complete")
    return RegimeDiagnostics(eta0_value, alpha, x, passes, edgeless, complete, tuple(msgs))


def regime_check(graph: PatternGraph, alpha, c: float | None = None) -> RegimeDiagnostics:
    # c only scales mp^2 by c^2 and does not move the exponent
    value, _ = critical_covers(graph, alpha)
    return regime_flags(value, alpha)


@dataclass
class ThresholdReport:
    pattern: PatternGraph
    alpha: Fraction
    eta0: Fraction
    c0: list[CliqueCover]
    eta1: dict[tuple[int, ...], Fraction]
    eta2: dict[tuple[int, ...], dict[int, Fraction]]
    verdicts: dict[tuple[int, ...], BalanceVerdict]
    aut: int
    regime: RegimeDiagnostics
    c: float | Fraction | None = None
    all_covers_scored: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def strictly_balanced(self) -> bool:
        return all(v.verdict == STRICT for v in self.verdicts.values())

    @property
    def lambda0_terms(self) -> dict[int, int]:
        """Exponent of c -> number of critical covers with that total size."""
        return dict(sorted(Counter(cov.total for cov in self.c0).items()))

    def lambda0(self, c=None):
        c = self.c if c is None else c
        if c is None:
            raise ValueError("lambda0 needs c")
        return lambda0_from_terms(self.lambda0_terms, self.aut, c)


def lambda0_from_terms(terms: dict[int, int], aut: int, c):
    if isinstance(c, (int, Fraction)):
        return sum((Fraction(c) ** k * mult for k, mult in terms.items()), Fraction(0)) / aut
    return math.fsum(mult * float(c) ** k for k, mult in terms.items()) / aut


def analyze(graph: PatternGraph, alpha, c=None, *, score_all_limit: int = 4096) -> ThresholdReport:
    """Full threshold analysis of a pattern at one alpha."""
    alpha = as_fraction(alpha)
    value, c0 = critical_covers(graph, alpha)
    scored: dict[tuple[int, ...], Fraction] = {}
    all_scored = False
    notes = []
    try:
        covers = []
        for cov in enumerate_proper_covers(graph, budget=score_all_limit):
            covers.append(cov)
        scored = {cov.cliques: eta1(cov, alpha) for cov in covers}
        all_scored = True
        assert max(scored.values()) == value
    except Exception as exc:  # budget exceeded: only C0 is scored
        if not type(exc).__name__ == "CoverBudgetExceeded":
            raise
        notes.append(f"more than {score_all_limit} proper covers; eta1 listed for C0 only")
    tables = {}
    verdicts = {}
    for cov in c0:
        table = eta2_table(cov, alpha)
        tables[cov.cliques] = table
        verdicts[cov.cliques] = cover_balance(cov, alpha, table)
        scored.setdefault(cov.cliques, value)
    return ThresholdReport(graph, alpha, value, c0, scored, tables, verdicts,
                           automorphism_count(graph), regime_flags(value, alpha), c,
                           all_scored, notes)


def lambda0(graph: PatternGraph, alpha, c):
    """Limiting Poisson mean (1/|aut H|) Σ_{C in C0} c^{ΣC}."""
    if c <= 0:
        raise ValueError("c must be positive")
    _, c0 = critical_covers(graph, alpha)
    terms = dict(Counter(cov.total for cov in c0))
    return lambda0_from_terms(terms, automorphism_count(graph), c)


# -- expected-count orders at concrete parameters -----------------------------

def log_psi(cover: CliqueCover, subset: int, params: ModelParams) -> float:
    """log of min{ n^{|S|+α|C[S]|} p^{ΣC[S]}, n^{|S|+α|C'[S]|} p^{ΣC'[S]} }.

    An empty C'[S] gives the monomial n^{|S|}. When params carry (c, eta)
    the two exponents of n are compared exactly, with log c breaking ties.
    """
    if subset == 0:
        raise ValueError("S must be nonempty")
    size = popcount(subset)
    k, tot, k2, tot2 = _stats(cover.cliques, subset)
    alpha = params.alpha
    ln_n = math.log(params.n)
    if params.eta is not None and params.c is not None:
        ln_c = math.log(params.c)
        x1 = size + alpha * k - params.eta * tot
        x2 = size + alpha * k2 - params.eta * tot2
        if x1 != x2:
            x, t = (x1, tot) if x1 < x2 else (x2, tot2)
        else:
            t = min(tot, tot2) if ln_c >= 0 else max(tot, tot2)
            x = x1
        return float(x) * ln_n + t * ln_c
    ln_p = math.log(params.p)
    l1 = float(size + alpha * k) * ln_n + tot * ln_p
    l2 = float(size + alpha * k2) * ln_n + tot2 * ln_p
    return min(l1, l2)


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def psi(cover: CliqueCover, subset: int, params: ModelParams) -> float:
    return _safe_exp(log_psi(cover, subset, params))


def omega(cover: CliqueCover, params: ModelParams) -> float:
    """min of psi over proper nonempty S."""
    full = cover.pattern.full
    return _safe_exp(min(log_psi(cover, s, params) for s in range(1, full)))


def phi(graph: PatternGraph, alpha, c: float, n: int) -> float:
    """min of omega over C0 at p = c n^-eta0."""
    value, c0 = critical_covers(graph, alpha)
    params = ModelParams.at_threshold(n, alpha, c, value)
    return min(omega(cov, params) for cov in c0)


def _warn_mp2(m: int, p: float, threshold: float):
    if m * p * p > threshold:
        warnings.warn(f"mp^2 = {m * p * p:.3g} is not small; the asymptotic form may be poor",
                      RuntimeWarning, stacklevel=3)


def pi_predict(cover, m: int, p: float, *, warn_threshold: float = MP2_WARN) -> float:
    """(1 - e^{-mp})^{#singletons} * Π_{|C_i| >= 2} m p^{|C_i|}.

    ``cover`` may be a CliqueCover, a RestrictedCover, or a sequence of
    vertex masks (singletons allowed).
    """
    _warn_mp2(m, p, warn_threshold)
    out = 1.0
    for q in _cliques(cover):
        s = popcount(q)
        out *= -math.expm1(-m * p) if s == 1 else m * p ** s
    return out


def pi_order(cover, m: int, p: float) -> float:
    """min{ m^{|C|} p^{ΣC}, m^{|C'|} p^{ΣC'} }."""
    sizes = [popcount(q) for q in _cliques(cover)]
    big = [s for s in sizes if s >= 2]
    l1 = len(sizes) * math.log(m) + sum(sizes) * math.log(p)
    l2 = len(big) * math.log(m) + sum(big) * math.log(p)
    return _safe_exp(min(l1, l2))


def pi_predict_above(cover, m: int, p: float, *, h: int | None = None,
                     n: int | None = None) -> float:
    """Above-threshold form for Omega(1) = mp^2 = O(log n):

    (1 - e^{-mp^2})^{#pairs} (e^{-mp^2})^{C(h,2) - #pairs} Π_{|C_i|>=3} m p^{|C_i|}.
    """
    if h is None:
        if not isinstance(cover, CliqueCover):
            raise ValueError("h is needed when the cover carries no pattern")
        h = cover.pattern.h
    x = m * p * p
    if x < 0.1 or (n is not None and x > 10 * math.log(n)):
        warnings.warn(f"mp^2 = {x:.3g} is outside the intended Omega(1) = mp^2 = O(log n) range",
                      RuntimeWarning, stacklevel=2)
    sizes = [popcount(q) for q in _cliques(cover)]
    pairs = sum(1 for s in sizes if s == 2)
    out = (-math.expm1(-x)) ** pairs * math.exp(-x * (math.comb(h, 2) - pairs))
    for s in sizes:
        if s >= 3:
            out *= m * p ** s
    return out
