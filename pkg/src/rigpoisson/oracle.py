"""Exact, non-asymptotic probabilities for small instances.

Every object independently leaves a "pattern" on a fixed vertex set U
(the set of vertices of U that chose it). A copy on U is induced by a
cover D exactly when every pattern is in D or has size <= 1, and every
member of D occurs at least once. That gives the closed form

    P = Σ_{T ⊆ D} (-1)^{|D|-|T|} (q0 + Σ_{i∈T} q_i)^m

used by ``induction_probability``. The terms alternate and nearly cancel
when p is small, so the float result carries an error bound and falls
back to mpmath when the bound is not small compared to the result.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import mpmath
import numpy as np

from .covers import (
    DEFAULT_COVER_BUDGET,
    CliqueCover,
    combine_covers,
    enumerate_cliques,
    enumerate_proper_covers,
    joint_cover_family,
)
from .graphs import (
    HostGraph,
    PatternGraph,
    bits,
    count_induced_copies,
    count_pattern_copies,
    popcount,
)

MAX_TERMS_LOG2 = 20
DEFAULT_ENUM_BUDGET = 1 << 24
EPS = 2.0 ** -52


class BudgetExceeded(RuntimeError):
    """The requested exact computation exceeds its enumeration budget."""


@dataclass(frozen=True)
class PatternWeights:
    """Per-object pattern probabilities on a vertex set of size h."""

    h: int
    sizes: tuple[int, ...]
    p: float

    @property
    def q(self) -> tuple[float, ...]:
        p, h = self.p, self.h
        return tuple(p ** s * (1 - p) ** (h - s) for s in self.sizes)

    @property
    def q0(self) -> float:
        p, h = self.p, self.h
        return (1 - p) ** h + h * p * (1 - p) ** (h - 1)


def _check_p(p: float):
    if not 0 <= p <= 1:
        raise ValueError(f"p = {p} outside [0, 1]")


def _subset_size_counts(sizes: Sequence[int]) -> list[list[int]]:
    """For each subset T (as a bitmask over ``sizes``), how many members have each size."""
    t = len(sizes)
    h = max(sizes) if sizes else 0
    out = [[0] * (h + 1)]
    for i in range(t):
        s = sizes[i]
        for mask in range(len(out)):
            row = list(out[mask])
            row[s] += 1
            out.append(row)
    return out


def _ie_float(h: int, sizes: Sequence[int], m: int, p: float) -> tuple[float, float]:
    t = len(sizes)
    w = [math.comb(h, s) for s in range(h + 1)]
    mono = [p ** s * (1 - p) ** (h - s) for s in range(h + 1)]
    terms = []
    bound = 0.0
    for mask, cnt in enumerate(_subset_size_counts(sizes)):
        # r = probability of a pattern outside T ∪ {size <= 1}, summed without cancellation
        r = math.fsum((w[s] - (cnt[s] if s < len(cnt) else 0)) * mono[s] for s in range(2, h + 1))
        r = min(max(r, 0.0), 1.0)
        val = math.exp(m * math.log1p(-r)) if r < 1 else (1.0 if m == 0 else 0.0)
        sign = -1 if (t - popcount(mask)) % 2 else 1
        terms.append(sign * val)
        bound += val * EPS * (8 + 4 * m * r + 2 * h)
    return math.fsum(terms), bound


def _ie_mp(h: int, sizes: Sequence[int], m: int, p: float, dps: int) -> mpmath.mpf:
    t = len(sizes)
    with mpmath.workdps(dps):
        P = mpmath.mpf(p)
        mono = [P ** s * (1 - P) ** (h - s) for s in range(h + 1)]
        total = mpmath.mpf(0)
        for mask, cnt in enumerate(_subset_size_counts(sizes)):
            r = mpmath.fsum((math.comb(h, s) - (cnt[s] if s < len(cnt) else 0)) * mono[s]
                            for s in range(2, h + 1))
            val = (1 - r) ** m
            total += -val if (t - popcount(mask)) % 2 else val
        return +total


def induction_probability(h: int, sizes: Sequence[int], m: int, p: float, *,
                          rel_tol: float = 1e-13, return_method: bool = False):
    """Probability that the distinct size->=2 object patterns on an h-set are
    exactly a given family whose member sizes are ``sizes``.
    """
    _check_p(p)
    if any(s < 2 or s > h for s in sizes):
        raise ValueError("family members must have sizes in [2, h]")
    if len(sizes) > MAX_TERMS_LOG2:
        raise BudgetExceeded(f"2^{len(sizes)} inclusion-exclusion terms exceed the cap 2^{MAX_TERMS_LOG2}")
    if m < len(sizes):
        return (0.0, "zero") if return_method else 0.0
    val, bound = _ie_float(h, sizes, m, p)
    if abs(val) > 1e3 * bound:
        return (val, "float") if return_method else val
    # high-precision fallback: double the working precision until stable
    digits = 40 + int(max(0.0, -math.log10(max(abs(val), bound, 1e-300))))
    prev = _ie_mp(h, sizes, m, p, digits)
    while True:
        digits *= 2
        cur = _ie_mp(h, sizes, m, p, digits)
        if cur == prev or abs(cur - prev) <= rel_tol * abs(cur) * 1e-3:
            out = float(cur)
            return (out, "mpmath") if return_method else out
        if digits > 5000:
            raise ArithmeticError("high-precision inclusion-exclusion did not stabilise")
        prev = cur


def exact_pi(cover: CliqueCover, m: int, p: float, **kw):
    """Exact probability that a fixed copy of the pattern is induced by ``cover``."""
    if not cover.is_proper:
        raise ValueError("exact_pi needs a proper cover")
    return induction_probability(cover.pattern.h, [popcount(q) for q in cover.cliques], m, p, **kw)


def copy_induced_probability(pattern: PatternGraph, m: int, p: float) -> float:
    """P(a fixed copy is induced), by inclusion-exclusion over sets F of edges
    that no object covers; patterns must be cliques of the pattern or small.
    """
    _check_p(p)
    h = pattern.h
    cliques = enumerate_cliques(pattern)
    from .covers import clique_edge_mask
    em = [clique_edge_mask(pattern, q) for q in cliques]
    q0 = (1 - p) ** h + h * p * (1 - p) ** (h - 1)
    qs = [p ** popcount(q) * (1 - p) ** (h - popcount(q)) for q in cliques]
    if pattern.e > 22:
        raise BudgetExceeded("too many edges for edge inclusion-exclusion")
    terms = []
    for f in range(1 << pattern.e):
        base = q0 + math.fsum(qv for qv, e in zip(qs, em) if not e & f)
        terms.append((-1) ** popcount(f) * base ** m)
    return math.fsum(terms)


def _pattern_probs(h: int, p: float) -> list[float]:
    return [p ** popcount(s) * (1 - p) ** (h - popcount(s)) for s in range(1 << h)]


def copy_induced_probability_enumerated(pattern: PatternGraph, m: int, p: float, *,
                                        budget: int = DEFAULT_ENUM_BUDGET) -> float:
    """The same probability by scanning all (2^h)^m pattern assignments."""
    h = pattern.h
    if (1 << h) ** m > budget:
        raise BudgetExceeded(f"(2^{h})^{m} assignments exceed the budget {budget}")
    probs = _pattern_probs(h, p)
    target = {(u, v) for u, v in pattern.edges}
    pairs = {}
    for s in range(1 << h):
        vs = bits(s)
        pairs[s] = {(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]}
    acc = []
    for assign in itertools.product(range(1 << h), repeat=m):
        got = set()
        for s in assign:
            got |= pairs[s]
        if got == target:
            acc.append(math.prod(probs[s] for s in assign))
    return math.fsum(acc)


def exact_mean(pattern: PatternGraph, n: int, m: int, p: float, *,
               budget: int = DEFAULT_COVER_BUDGET) -> float:
    """E(X) = N_n Σ_{C} exact_pi(C), summed over every proper cover."""
    if p == 0:
        return 0.0
    total = math.fsum(exact_pi(c, m, p) for c in enumerate_proper_covers(pattern, budget=budget))
    return count_pattern_copies(n, pattern) * total


# -- full distribution of X at tiny scale -------------------------------------

def exact_distribution(pattern: PatternGraph, n: int, m: int, p: float, *,
                       budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
    """Exact pmf of the number of induced copies, as an array indexed by count.

    Objects are exchangeable, so multisets of patterns are enumerated with
    multinomial weights; patterns of size <= 1 add no edges and are lumped.
    """
    _check_p(p)
    if (1 << n) ** m > budget:
        raise BudgetExceeded(f"(2^{n})^{m} = {(1 << n) ** m} assignments exceed the budget {budget}")
    big = [s for s in range(1 << n) if popcount(s) >= 2]
    q_small = (1 - p) ** n + n * p * (1 - p) ** (n - 1)
    symbols = [(0, q_small)] + [(s, p ** popcount(s) * (1 - p) ** (n - popcount(s))) for s in big]
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    pair_bit = {e: 1 << i for i, e in enumerate(pairs)}
    sym_edges = []
    for s, _ in symbols:
        vs = bits(s)
        em = 0
        for i, a in enumerate(vs):
            for b in vs[i + 1:]:
                em |= pair_bit[(a, b)]
        sym_edges.append(em)
    cache: dict[int, int] = {}
    mass: dict[int, list[float]] = {}
    log_mfact = math.lgamma(m + 1)
    for combo in itertools.combinations_with_replacement(range(len(symbols)), m):
        mult = Counter(combo)
        logw = log_mfact - sum(math.lgamma(k + 1) for k in mult.values())
        weight = math.exp(logw)
        for i, k in mult.items():
            weight *= symbols[i][1] ** k
        if weight == 0:
            continue
        em = 0
        for i in combo:
            em |= sym_edges[i]
        x = cache.get(em)
        if x is None:
            host = HostGraph.from_edges(n, [e for e in pairs if em & pair_bit[e]])
            x = cache[em] = count_induced_copies(host, pattern)
        mass.setdefault(x, []).append(weight)
    top = max(mass) if mass else 0
    pmf = np.zeros(top + 1)
    for x, ws in mass.items():
        pmf[x] = math.fsum(ws)
    return pmf


# -- joint probabilities for two copies ---------------------------------------

@dataclass(frozen=True)
class JointResult:
    """P(G1 induced by C1 and G2 induced by C2), computed several ways."""

    by_family: float        # Σ over the complete family of joint covers
    by_enumeration: float   # object-by-object dynamic programme
    by_matching: float      # Σ over the matching construction only
    family_size: int
    matching_size: int

    @property
    def matching_gap(self) -> float:
        return self.by_enumeration - self.by_matching


def _joint_dp(u, c1: Sequence[int], c2: Sequence[int], m: int, p: float) -> float:
    """Objects one at a time; the state is which members of C1 and C2 have been hit."""
    idx1 = {q: i for i, q in enumerate(sorted(set(c1)))}
    idx2 = {q: i for i, q in enumerate(sorted(set(c2)))}
    h = u.graph.h
    moves: dict[tuple[int, int], list[float]] = {}
    for s in range(1 << h):
        t1, t2 = s & u.v1, s & u.v2
        h1 = h2 = 0
        if popcount(t1) >= 2:
            if t1 not in idx1:
                continue
            h1 = 1 << idx1[t1]
        if popcount(t2) >= 2:
            if t2 not in idx2:
                continue
            h2 = 1 << idx2[t2]
        moves.setdefault((h1, h2), []).append(p ** popcount(s) * (1 - p) ** (h - popcount(s)))
    step = [(k, math.fsum(v)) for k, v in sorted(moves.items())]
    state = {(0, 0): 1.0}
    for _ in range(m):
        nxt: dict[tuple[int, int], list[float]] = {}
        for (a, b), pr in state.items():
            for (h1, h2), q in step:
                nxt.setdefault((a | h1, b | h2), []).append(pr * q)
        state = {k: math.fsum(v) for k, v in nxt.items()}
    return state.get(((1 << len(idx1)) - 1, (1 << len(idx2)) - 1), 0.0)


def exact_joint(g1: PatternGraph, c1: CliqueCover, g2: PatternGraph, c2: CliqueCover,
                overlap: Mapping[int, int], m: int, p: float) -> JointResult:
    """Joint induction probability of two overlapping labelled copies.

    ``overlap`` maps G1 vertices to the G2 vertices they are identified with.
    """
    _check_p(p)
    u, matched = combine_covers(g1, c1, g2, c2, overlap)
    a, b = u.lift1(c1.cliques), u.lift2(c2.cliques)
    family = joint_cover_family(u, a, b, max_size=m)
    h = u.graph.h
    by_family = math.fsum(induction_probability(h, [popcount(q) for q in d], m, p) for d in family)
    by_matching = math.fsum(induction_probability(h, [popcount(q) for q in d], m, p)
                            for d in sorted(matched))
    by_dp = _joint_dp(u, a, b, m, p)
    return JointResult(by_family, by_dp, by_matching, len(family), len(matched))


# -- multinomial pattern counts vs product Poisson -----------------------------

@dataclass(frozen=True)
class PatternJoint:
    exact: float
    poisson: float

    @property
    def ratio(self) -> float:
        return self.exact / self.poisson


def exact_pattern_joint(cover: CliqueCover | Sequence[int], m: int, p: float,
                        counts: Sequence[int], *, h: int | None = None) -> PatternJoint:
    """P(N_i = a_i for every member) exactly, against Π Poisson(m p^{|C_i|}) at a_i.

    N_i counts objects whose pattern on the copy is exactly C_i.
    """
    if isinstance(cover, CliqueCover):
        h = cover.pattern.h
        sizes = [popcount(q) for q in cover.cliques]
    else:
        if h is None:
            raise ValueError("h is needed when passing bare clique masks")
        sizes = [popcount(q) for q in cover]
    if len(counts) != len(sizes):
        raise ValueError("one count per cover member is needed")
    if any(a < 0 for a in counts) or sum(counts) > m:
        raise ValueError("counts must be non-negative and sum to at most m")
    a0 = m - sum(counts)
    log_p = math.log(p)
    log_q = math.log1p(-p)
    log_pi = [s * log_p + (h - s) * log_q for s in sizes]
    p0 = 1.0 - math.fsum(math.exp(x) for x in log_pi)
    log_exact = (math.lgamma(m + 1) - math.lgamma(a0 + 1) - sum(math.lgamma(a + 1) for a in counts)
                 + a0 * math.log(p0) + sum(a * x for a, x in zip(counts, log_pi)))
    log_pois = 0.0
    for s, a in zip(sizes, counts):
        lam = m * p ** s
        log_pois += -lam + a * math.log(lam) - math.lgamma(a + 1)
    return PatternJoint(math.exp(log_exact), math.exp(log_pois))
