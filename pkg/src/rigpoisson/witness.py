"""Recover, for each induced copy in a sample, the clique cover that induced it."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .covers import CliqueCover, CoverError, check_clique_cover
from .graphs import HostGraph, PatternGraph, automorphisms, bits, list_induced_copies, popcount
from .sampling import IncidenceSample, project_graph
from .thresholds import ThresholdReport


class NotInducedError(ValueError):
    """The vertex set does not carry an induced copy under the given embedding."""


class WitnessError(AssertionError):
    """A witness failed cover validation; indicates a bug, not bad input."""


def object_traces(sample: IncidenceSample, embedding: Sequence[int],
                  index: list[list[int]] | None = None) -> list[int]:
    """Pattern-vertex masks C_w = copy ∩ chooser(w) for objects touching the copy."""
    index = index if index is not None else sample.objects_of()
    where = {int(w): v for v, w in enumerate(embedding)}
    touched = sorted({i for w in where for i in index[w]})
    traces = []
    for i in touched:
        mask = 0
        for w in sample.chooser(i).tolist():
            v = where.get(w)
            if v is not None:
                mask |= 1 << v
        traces.append(mask)
    return traces


def witness_cover(sample: IncidenceSample, pattern: PatternGraph, embedding: Sequence[int],
                  index: list[list[int]] | None = None) -> CliqueCover:
    """The unique cover inducing the copy ``embedding`` (pattern vertex v -> host vertex).

    The traces of size >= 2 generate exactly the edges of the induced
    subgraph on the copy, so the copy is induced iff they are cliques of the
    pattern covering every pattern edge.
    """
    if len(embedding) != pattern.h or len(set(embedding)) != pattern.h:
        raise NotInducedError("embedding must be injective on the pattern's vertices")
    traces = sorted({q for q in object_traces(sample, embedding, index) if popcount(q) >= 2})
    for q in traces:
        if not pattern.is_clique(q):
            raise NotInducedError(f"objects join non-adjacent pattern vertices {[v + 1 for v in bits(q)]}")
    covered = set()
    for q in traces:
        vs = bits(q)
        covered.update((a, b) for i, a in enumerate(vs) for b in vs[i + 1:])
    missing = [e for e in pattern.edges if e not in covered]
    if missing:
        raise NotInducedError(f"pattern edges {[(u + 1, v + 1) for u, v in missing]} absent in the sample")
    try:
        check_clique_cover(pattern, traces, proper=True)
    except CoverError as exc:
        raise WitnessError(f"witness is not a proper cover: {exc}") from exc
    return CliqueCover(pattern, tuple(traces))


@lru_cache(maxsize=256)
def _auts(pattern: PatternGraph) -> tuple[tuple[int, ...], ...]:
    return tuple(automorphisms(pattern))


def canonical_orbit(pattern: PatternGraph, cliques: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least relabelling of a cover under aut(pattern)."""
    best = None
    for perm in _auts(pattern):
        img = tuple(sorted(sum(1 << perm[v] for v in bits(q)) for q in cliques))
        if best is None or img < best:
            best = img
    return best


@dataclass
class CoverCounts:
    by_orbit: dict[tuple[int, ...], int] = field(default_factory=dict)
    y0: int = 0
    y1: int = 0

    @property
    def x(self) -> int:
        return self.y0 + self.y1


def critical_orbits(pattern: PatternGraph, report: ThresholdReport) -> frozenset:
    return frozenset(canonical_orbit(pattern, c.cliques) for c in report.c0)


def per_cover_counts(sample: IncidenceSample, pattern: PatternGraph, report: ThresholdReport,
                     host: HostGraph | None = None, *,
                     orbits0: frozenset | None = None) -> CoverCounts:
    """Induced copies bucketed by the orbit of their witness cover; Y0 counts C0 orbits."""
    if report.pattern != pattern:
        raise ValueError("report was computed for a different pattern")
    host = host if host is not None else project_graph(sample)
    orbits0 = orbits0 if orbits0 is not None else critical_orbits(pattern, report)
    index = sample.objects_of()
    counts: Counter = Counter()
    y0 = y1 = 0
    for _, emb in list_induced_copies(host, pattern):
        cover = witness_cover(sample, pattern, emb, index)
        key = canonical_orbit(pattern, cover.cliques)
        counts[key] += 1
        if key in orbits0:
            y0 += 1
        else:
            y1 += 1
    return CoverCounts(dict(sorted(counts.items())), y0, y1)
