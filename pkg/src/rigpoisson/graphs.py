"""Small pattern graphs, sparse host graphs and induced-copy counting.

Vertices are 0-indexed internally; files and JSON use 1-indexed labels.
Vertex subsets of a pattern are int bitmasks (bit ``i`` set means vertex ``i``
is in the subset).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

DEFAULT_CAP = 8


class PatternError(ValueError):
    """Invalid pattern graph (self-loop, no edges, too many vertices...)."""


class CapExceeded(PatternError):
    """Pattern larger than the configured enumeration cap."""


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def bits(mask: int) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


class PatternGraph:
    """An immutable labelled simple graph on vertices ``0..h-1``.

    ``strict=True`` enforces the pattern invariants (h >= 2, at least one
    edge, h <= cap). Internal constructions such as induced subgraphs use
    ``strict=False``.
    """

    def __init__(self, h: int, edges: Iterable[tuple[int, int]] = (), *,
                 strict: bool = True, cap: int = DEFAULT_CAP):
        if h < 0:
            raise PatternError("vertex count must be non-negative")
        adj = [0] * h
        for u, v in edges:
            if not (0 <= u < h and 0 <= v < h):
                raise PatternError(f"edge ({u}, {v}) outside vertex range [0, {h})")
            if u == v:
                raise PatternError(f"self-loop at vertex {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.h = h
        self.adj = tuple(adj)
        if strict:
            if h < 2:
                raise PatternError("pattern needs at least 2 vertices")
            if h > cap:
                raise CapExceeded(f"pattern has {h} vertices, cap is {cap}")
            if self.e == 0:
                raise PatternError("pattern needs at least one edge")

    @classmethod
    def from_masks(cls, adj: Sequence[int], **kw) -> "PatternGraph":
        h = len(adj)
        edges = [(u, v) for u in range(h) for v in range(u + 1, h) if adj[u] >> v & 1]
        return cls(h, edges, **kw)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, v) for u in range(self.h) for v in bits(self.adj[u]) if u < v)

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def full(self) -> int:
        return (1 << self.h) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return popcount(self.adj[v])

    def edges_within(self, subset: int) -> int:
        """|E(S)| for the vertex subset ``subset``."""
        return sum(popcount(self.adj[v] & subset) for v in bits(subset)) // 2

    def is_clique(self, subset: int) -> bool:
        return all((self.adj[v] | (1 << v)) & subset == subset for v in bits(subset))

    def relabel(self, perm: Sequence[int]) -> "PatternGraph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        return PatternGraph(self.h, [(perm[u], perm[v]) for u, v in self.edges], strict=False)

    def __eq__(self, other):
        return isinstance(other, PatternGraph) and self.adj == other.adj

    def __hash__(self):
        return hash(self.adj)

    def __repr__(self):
        return f"PatternGraph(h={self.h}, edges={[(u + 1, v + 1) for u, v in self.edges]})"


# -- named families used throughout tests and the CLI ------------------------

def complete_graph(h: int, **kw) -> PatternGraph:
    return PatternGraph(h, [(u, v) for u in range(h) for v in range(u + 1, h)], **kw)


def cycle_graph(t: int, **kw) -> PatternGraph:
    return PatternGraph(t, [(i, (i + 1) % t) for i in range(t)], **kw)


def path_graph(h: int, **kw) -> PatternGraph:
    return PatternGraph(h, [(i, i + 1) for i in range(h - 1)], **kw)


def complete_bipartite(k: int, t: int, **kw) -> PatternGraph:
    return PatternGraph(k + t, [(i, k + j) for i in range(k) for j in range(t)], **kw)


# -- pattern-level operations ------------------------------------------------

def induced_subgraph(graph: PatternGraph, subset: int) -> PatternGraph:
    """H[S] with the vertices of S renumbered 0..|S|-1 in increasing order."""
    if subset == 0:
        raise PatternError("induced subgraph of an empty vertex set")
    if subset >> graph.h:
        raise PatternError("subset outside the pattern's vertex range")
    keep = bits(subset)
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[u], index[v]) for u, v in graph.edges if u in index and v in index]
    return PatternGraph(len(keep), edges, strict=False)


def automorphisms(graph: PatternGraph) -> Iterator[tuple[int, ...]]:
    """All adjacency-preserving permutations, by backtracking.

    A permutation is yielded as a tuple ``perm`` with ``perm[v]`` the image
    of ``v``.
    """
    h = graph.h
    deg = [graph.degree(v) for v in range(h)]
    perm = [-1] * h
    used = [False] * h

    def extend(v):
        if v == h:
            yield tuple(perm)
            return
        for w in range(h):
            if used[w] or deg[w] != deg[v]:
                continue
            if all(graph.has_edge(u, v) == graph.has_edge(perm[u], w) for u in range(v)):
                perm[v] = w
                used[w] = True
                yield from extend(v + 1)
                used[w] = False
        perm[v] = -1

    yield from extend(0)


def automorphism_count(graph: PatternGraph) -> int:
    return sum(1 for _ in automorphisms(graph))


def count_pattern_copies(n: int, graph: PatternGraph) -> int:
    """Number of copies of the pattern in the complete graph on n vertices."""
    h = graph.h
    if n < h:
        return 0
    return math.comb(n, h) * math.factorial(h) // automorphism_count(graph)


def is_strictly_balanced(graph: PatternGraph) -> bool:
    h, e = graph.h, graph.e
    target = Fraction(e, h)
    return all(Fraction(graph.edges_within(s), popcount(s)) < target
               for s in range(1, graph.full))


def kappa(graph: PatternGraph) -> Fraction | None:
    """Balance margin min |E(S)| * (|S|/|E(S)| - h/e) over proper S with edges.

    Returns None when no proper subset spans an edge (the pattern is K2).
    """
    ratio = Fraction(graph.h, graph.e)
    best = None
    for s in range(1, graph.full):
        es = graph.edges_within(s)
        if es == 0:
            continue
        val = popcount(s) - es * ratio
        if best is None or val < best:
            best = val
    return best


# -- host graphs ---------------------------------------------------------------

class HostGraph:
    """Simple undirected graph on ``0..n-1`` stored as neighbour sets."""

    def __init__(self, n: int, adj: Sequence[frozenset]):
        self.n = n
        self.adj = tuple(adj)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "HostGraph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside vertex range [0, {n})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, [frozenset(s) for s in nbrs])

    @classmethod
    def from_pattern(cls, graph: PatternGraph) -> "HostGraph":
        return cls.from_edges(graph.h, graph.edges)

    @cached_property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.adj) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self.adj[u]) if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def __eq__(self, other):
        return isinstance(other, HostGraph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"HostGraph(n={self.n}, edges={self.edge_count})"


def _search_order(graph: PatternGraph) -> list[int]:
    """Pattern vertex order: most-constrained first, connected pieces kept together."""
    h = graph.h
    order: list[int] = []
    placed = 0
    while len(order) < h:
        best, key = -1, None
        for v in range(h):
            if placed >> v & 1:
                continue
            k = (popcount(graph.adj[v] & placed), graph.degree(v), -v)
            if key is None or k > key:
                best, key = v, k
        order.append(best)
        placed |= 1 << best
    return order


def induced_embeddings(host: HostGraph, graph: PatternGraph) -> Iterator[tuple[int, ...]]:
    """Injective maps V(H) -> V(host) preserving adjacency and non-adjacency.

    Yields tuples ``emb`` with ``emb[v]`` the host image of pattern vertex v.
    """
    h = graph.h
    if h > host.n:
        return
    order = _search_order(graph)
    # For each step: earlier pattern vertices adjacent / non-adjacent to it.
    back_adj = []
    back_non = []
    for i, v in enumerate(order):
        earlier = order[:i]
        back_adj.append([u for u in earlier if graph.has_edge(u, v)])
        back_non.append([u for u in earlier if not graph.has_edge(u, v)])
    need_deg = [graph.degree(v) for v in order]
    adj = host.adj
    image = [-1] * h
    used: set[int] = set()
    all_vertices = range(host.n)

    def extend(i):
        if i == h:
            yield tuple(image)
            return
        v = order[i]
        nb = back_adj[i]
        if nb:
            anchor = min((image[u] for u in nb), key=lambda w: len(adj[w]))
            candidates = adj[anchor]
        else:
            candidates = all_vertices
        others = [image[u] for u in nb]
        nons = [image[u] for u in back_non[i]]
        dv = need_deg[i]
        for w in candidates:
            if w in used:
                continue
            aw = adj[w]
            if len(aw) < dv:
                continue
            if any(x not in aw for x in others):
                continue
            if any(x in aw for x in nons):
                continue
            image[v] = w
            used.add(w)
            yield from extend(i + 1)
            used.discard(w)
        image[v] = -1

    yield from extend(0)


def count_induced_copies(host: HostGraph, graph: PatternGraph) -> int:
    """Number of vertex subsets of the host inducing a copy of the pattern."""
    labelled = sum(1 for _ in induced_embeddings(host, graph))
    aut = automorphism_count(graph)
    if labelled % aut:
        raise AssertionError(f"{labelled} labelled embeddings not divisible by |aut| = {aut}")
    return labelled // aut


def list_induced_copies(host: HostGraph, graph: PatternGraph) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """One entry per induced copy: (sorted host vertices, least embedding).

    The embedding kept is the lexicographically least among the |aut(H)|
    embeddings onto the same vertex set.
    """
    best: dict[frozenset, tuple[int, ...]] = {}
    for emb in induced_embeddings(host, graph):
        key = frozenset(emb)
        cur = best.get(key)
        if cur is None or emb < cur:
            best[key] = emb
    return sorted((tuple(sorted(k)), emb) for k, emb in best.items())
