"""Clique covers of a pattern graph and their restrictions.

A cover is stored as a sorted tuple of vertex bitmasks. Restricted covers
are multisets (sorted tuples that may repeat an entry).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Mapping, Sequence

from .graphs import DEFAULT_CAP, CapExceeded, PatternError, PatternGraph, bits, popcount

DEFAULT_COVER_BUDGET = 1 << 20


class CoverError(ValueError):
    """A family of sets that is not a clique cover of the given graph."""


class CoverBudgetExceeded(RuntimeError):
    """Cover enumeration would produce more covers than allowed."""


def edge_mask_table(graph: PatternGraph) -> dict[tuple[int, int], int]:
    return {e: 1 << i for i, e in enumerate(graph.edges)}


def clique_edge_mask(graph: PatternGraph, clique: int) -> int:
    """Bitmask (over graph.edges) of the edges inside ``clique``."""
    out = 0
    for i, (u, v) in enumerate(graph.edges):
        if clique >> u & 1 and clique >> v & 1:
            out |= 1 << i
    return out


def check_clique_cover(graph: PatternGraph, cliques: Sequence[int], *, proper: bool = True) -> None:
    """Raise CoverError unless ``cliques`` is a (proper) clique cover."""
    if len(set(cliques)) != len(cliques):
        raise CoverError("cover lists a clique twice")
    for q in cliques:
        if q == 0 or q >> graph.h:
            raise CoverError(f"clique {bits(q)} is empty or outside the vertex range")
        if not graph.is_clique(q):
            raise CoverError(f"{[v + 1 for v in bits(q)]} does not induce a clique")
        if proper and popcount(q) < 2:
            raise CoverError(f"singleton {[v + 1 for v in bits(q)]} in a proper cover")
    for u, v in graph.edges:
        pair = (1 << u) | (1 << v)
        if not any(q & pair == pair for q in cliques):
            raise CoverError(f"edge {{{u + 1}, {v + 1}}} is not covered")


@dataclass(frozen=True)
class RestrictedCover:
    """Multiset of restrictions C_i ∩ S; ``variant`` is "all" (sizes >= 1) or "ge2"."""

    parts: tuple[int, ...]
    variant: str

    @property
    def cardinality(self) -> int:
        return len(self.parts)

    @property
    def total(self) -> int:
        return sum(popcount(q) for q in self.parts)

    def __len__(self):
        return len(self.parts)


@dataclass(frozen=True)
class CliqueCover:
    pattern: PatternGraph
    cliques: tuple[int, ...]

    @classmethod
    def of(cls, pattern: PatternGraph, cliques, *, check: bool = True, proper: bool = True) -> "CliqueCover":
        cl = tuple(sorted(cliques))
        if check:
            check_clique_cover(pattern, cl, proper=proper)
        return cls(pattern, cl)

    @property
    def size(self) -> int:
        return len(self.cliques)

    @property
    def total(self) -> int:
        """Sum of clique sizes."""
        return sum(popcount(q) for q in self.cliques)

    @property
    def is_proper(self) -> bool:
        return all(popcount(q) >= 2 for q in self.cliques)

    def restrict(self, subset: int) -> tuple[RestrictedCover, RestrictedCover]:
        return restrict_cover(self, subset)

    def relabel(self, perm: Sequence[int]) -> tuple[int, ...]:
        """Cliques after renaming vertex v to perm[v] (sorted)."""
        return tuple(sorted(sum(1 << perm[v] for v in bits(q)) for q in self.cliques))

    def as_lists(self) -> list[list[int]]:
        """1-indexed vertex lists, canonical order."""
        from .io import cliques_to_json
        return cliques_to_json(self.cliques)

    def __repr__(self):
        return f"CliqueCover({self.as_lists()})"


def enumerate_cliques(graph: PatternGraph) -> list[int]:
    """Every vertex subset of size >= 2 inducing a clique, ascending by mask."""
    return [s for s in range(1, graph.full + 1) if popcount(s) >= 2 and graph.is_clique(s)]


def restrict_cover(cover: CliqueCover, subset: int) -> tuple[RestrictedCover, RestrictedCover]:
    """The multisets C[S] (restrictions of size >= 1) and C'[S] (size >= 2)."""
    if subset == 0:
        raise PatternError("restriction to the empty set")
    parts = sorted(q & subset for q in cover.cliques if q & subset)
    return (RestrictedCover(tuple(parts), "all"),
            RestrictedCover(tuple(q for q in parts if popcount(q) >= 2), "ge2"))


def _cover_search(graph: PatternGraph, cliques: list[int]):
    """Shared pre-computation: edge masks and suffix coverage."""
    emasks = [clique_edge_mask(graph, q) for q in cliques]
    suffix = [0] * (len(cliques) + 1)
    for i in range(len(cliques) - 1, -1, -1):
        suffix[i] = suffix[i + 1] | emasks[i]
    return emasks, suffix


def enumerate_proper_covers(graph: PatternGraph, *, cap: int = DEFAULT_CAP,
                            budget: int = DEFAULT_COVER_BUDGET) -> Iterator[CliqueCover]:
    """Every proper clique cover, redundant ones included.

    Include/exclude search over the cliques with a coverage-feasibility
    cut. Raises CoverBudgetExceeded after ``budget`` covers.
    """
    if graph.h > cap:
        raise CapExceeded(f"pattern has {graph.h} vertices, cap is {cap}")
    cliques = enumerate_cliques(graph)
    emasks, suffix = _cover_search(graph, cliques)
    target = (1 << graph.e) - 1
    chosen: list[int] = []
    produced = 0

    def rec(i, covered):
        nonlocal produced
        if covered | suffix[i] != target:
            return
        if i == len(cliques):
            produced += 1
            if produced > budget:
                raise CoverBudgetExceeded(
                    f"more than {budget} proper clique covers; raise the budget or use the pruned search")
            yield CliqueCover(graph, tuple(chosen))
            return
        chosen.append(cliques[i])
        yield from rec(i + 1, covered | emasks[i])
        chosen.pop()
        yield from rec(i + 1, covered)

    yield from rec(0, 0)


def is_minimal_cover(graph: PatternGraph, cliques: Sequence[int]) -> bool:
    """True when removing any clique leaves an edge uncovered."""
    emasks = [clique_edge_mask(graph, q) for q in cliques]
    for i, em in enumerate(emasks):
        rest = 0
        for j, other in enumerate(emasks):
            if j != i:
                rest |= other
        if em & ~rest == 0:
            return False
    return True


def enumerate_minimal_covers(graph: PatternGraph, *, cap: int = DEFAULT_CAP) -> Iterator[CliqueCover]:
    """Proper covers from which no clique can be dropped."""
    if graph.h > cap:
        raise CapExceeded(f"pattern has {graph.h} vertices, cap is {cap}")
    cliques = enumerate_cliques(graph)
    emasks = [clique_edge_mask(graph, q) for q in cliques]
    target = (1 << graph.e) - 1
    by_edge = [[i for i, em in enumerate(emasks) if em >> k & 1] for k in range(graph.e)]

    def redundant(chosen):
        for i in chosen:
            rest = 0
            for j in chosen:
                if j != i:
                    rest |= emasks[j]
            if emasks[i] & ~rest == 0:
                return True
        return False

    def rec(chosen, excluded, covered):
        if covered == target:
            yield CliqueCover(graph, tuple(sorted(cliques[i] for i in chosen)))
            return
        uncovered = target & ~covered
        # branch on the uncovered edge with fewest available cliques
        best = None
        for k in bits(uncovered):
            opts = [i for i in by_edge[k] if i not in excluded]
            if best is None or len(opts) < len(best):
                best = opts
        tried = []
        for i in best:
            nxt = chosen + [i]
            if not redundant(nxt):
                yield from rec(nxt, excluded | set(tried), covered | emasks[i])
            tried.append(i)

    yield from rec([], frozenset(), 0)


# -- unions of two labelled graphs -------------------------------------------

@dataclass(frozen=True)
class GraphUnion:
    """G1 ∪ G2 on a common vertex range with the embeddings of both parts.

    G1's vertex i becomes union vertex i; G2's vertex j becomes
    ``embed2[j]`` (an overlap vertex of G1, or a fresh label).
    """

    graph: PatternGraph
    v1: int
    v2: int
    embed1: tuple[int, ...]
    embed2: tuple[int, ...]

    def lift1(self, cliques: Sequence[int]) -> tuple[int, ...]:
        return tuple(sorted(sum(1 << self.embed1[v] for v in bits(q)) for q in cliques))

    def lift2(self, cliques: Sequence[int]) -> tuple[int, ...]:
        return tuple(sorted(sum(1 << self.embed2[v] for v in bits(q)) for q in cliques))


def glue(g1: PatternGraph, g2: PatternGraph, overlap: Mapping[int, int]) -> GraphUnion:
    """Identify G1 vertex ``a`` with G2 vertex ``overlap[a]``.

    The overlap must be injective and G1, G2 must agree on it (their
    intersection is induced in both).
    """
    if len(set(overlap.values())) != len(overlap):
        raise PatternError("overlap identification is not injective")
    for a, b in overlap.items():
        if not (0 <= a < g1.h and 0 <= b < g2.h):
            raise PatternError(f"overlap pair ({a}, {b}) outside the vertex ranges")
    for (a, b), (c, d) in combinations(overlap.items(), 2):
        if g1.has_edge(a, c) != g2.has_edge(b, d):
            raise PatternError("G1 and G2 disagree on the shared vertices "
                               f"({a + 1},{c + 1}) vs ({b + 1},{d + 1})")
    inverse = {b: a for a, b in overlap.items()}
    embed2 = []
    nxt = g1.h
    for j in range(g2.h):
        if j in inverse:
            embed2.append(inverse[j])
        else:
            embed2.append(nxt)
            nxt += 1
    edges = set(g1.edges)
    for u, v in g2.edges:
        a, b = sorted((embed2[u], embed2[v]))
        edges.add((a, b))
    union = PatternGraph(nxt, sorted(edges), strict=False)
    v1 = (1 << g1.h) - 1
    v2 = sum(1 << x for x in embed2)
    return GraphUnion(union, v1, v2, tuple(range(g1.h)), tuple(embed2))


def _restricted_ge2(cliques: Sequence[int], subset: int) -> list[int]:
    return sorted(q & subset for q in cliques if popcount(q & subset) >= 2)


def combine_covers(g1: PatternGraph, c1: CliqueCover, g2: PatternGraph, c2: CliqueCover,
                   overlap: Mapping[int, int]) -> tuple[GraphUnion, set[tuple[int, ...]]]:
    """Covers of G1 ∪ G2 assembled from C1 and C2 by matching cliques.

    Each element is a clique of C1 alone, of C2 alone, or a union
    C1_i ∪ C2_j of a matched pair; every clique of C1 and C2 is used, each
    at most once. Merged sets must be cliques of G1 ∪ G2 and restrict back
    to their two parts. Returned covers satisfy C'[V(G1)] = C1 and
    C'[V(G2)] = C2 as multisets.
    """
    if not (c1.is_proper and c2.is_proper):
        raise CoverError("combine_covers needs proper covers")
    u = glue(g1, g2, overlap)
    a = u.lift1(c1.cliques)
    b = u.lift2(c2.cliques)
    a_set, b_set = set(a), set(b)
    r, s = len(a), len(b)
    results: set[tuple[int, ...]] = set()

    def mergeable(i, j):
        q = a[i] | b[j]
        return (u.graph.is_clique(q) and q & u.v1 == a[i] and q & u.v2 == b[j])

    ok = [[mergeable(i, j) for j in range(s)] for i in range(r)]

    def rec(i, used_b, elems):
        if i == r:
            rest = [b[j] for j in range(s) if not used_b >> j & 1]
            if any(q in a_set for q in rest):
                return
            cover = tuple(sorted(elems + rest))
            if len(set(cover)) != len(cover):
                return
            if (_restricted_ge2(cover, u.v1) == sorted(a)
                    and _restricted_ge2(cover, u.v2) == sorted(b)):
                results.add(cover)
            return
        if a[i] not in b_set:
            rec(i + 1, used_b, elems + [a[i]])
        for j in range(s):
            if not used_b >> j & 1 and ok[i][j]:
                rec(i + 1, used_b | (1 << j), elems + [a[i] | b[j]])

    rec(0, 0, [])
    return u, results


def joint_cover_family(u: GraphUnion, c1: Sequence[int], c2: Sequence[int], *,
                       max_size: int | None = None,
                       budget: int = DEFAULT_COVER_BUDGET) -> list[tuple[int, ...]]:
    """All families D of subsets of V(G1 ∪ G2) (sizes >= 2) whose size->=2
    traces on V(G1) and V(G2), taken as sets, are exactly C1 and C2.

    ``c1``/``c2`` are given in union labels (see GraphUnion.lift1/lift2).
    The events "the set of distinct object traces equals D" partition the
    event that G1 is induced by C1 and G2 by C2, so summing the induction
    probability over this family gives the joint probability exactly.
    With m objects a family larger than m is impossible; ``max_size`` drops
    those.
    """
    set1, set2 = set(c1), set(c2)
    allowed = []
    for q in range(1, u.graph.full + 1):
        if popcount(q) < 2:
            continue
        t1, t2 = q & u.v1, q & u.v2
        if popcount(t1) >= 2 and t1 not in set1:
            continue
        if popcount(t2) >= 2 and t2 not in set2:
            continue
        allowed.append(q)
    idx1 = {q: i for i, q in enumerate(sorted(set1))}
    idx2 = {q: i for i, q in enumerate(sorted(set2))}
    hits = []
    for q in allowed:
        h1 = 1 << idx1[q & u.v1] if popcount(q & u.v1) >= 2 else 0
        h2 = 1 << idx2[q & u.v2] if popcount(q & u.v2) >= 2 else 0
        hits.append((h1, h2))
    full1, full2 = (1 << len(set1)) - 1, (1 << len(set2)) - 1
    suf1 = [0] * (len(allowed) + 1)
    suf2 = [0] * (len(allowed) + 1)
    for i in range(len(allowed) - 1, -1, -1):
        suf1[i] = suf1[i + 1] | hits[i][0]
        suf2[i] = suf2[i + 1] | hits[i][1]
    out: list[tuple[int, ...]] = []
    chosen: list[int] = []

    def rec(i, got1, got2):
        if got1 | suf1[i] != full1 or got2 | suf2[i] != full2:
            return
        if max_size is not None and len(chosen) > max_size:
            return
        if i == len(allowed):
            out.append(tuple(chosen))
            if len(out) > budget:
                raise CoverBudgetExceeded(f"joint cover family larger than {budget}")
            return
        chosen.append(allowed[i])
        rec(i + 1, got1 | hits[i][0], got2 | hits[i][1])
        chosen.pop()
        rec(i + 1, got1, got2)

    rec(0, 0, 0)
    return out
