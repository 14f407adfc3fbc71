"""Seeded sampling of G(n, m, p) through its vertex-object incidences."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graphs import HostGraph

SKIP_BELOW = 0.01  # geometric skipping is used for p below this
_BLOCK = 1 << 22


@dataclass(frozen=True)
class SeedSpec:
    """A replicate's random stream is a pure function of (master, replicate, stream)."""

    master: int
    replicate: int = 0
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.master < 1 << 64):
            raise ValueError("master seed must fit in 64 unsigned bits")
        if self.replicate < 0 or self.stream < 0:
            raise ValueError("replicate and stream indices must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master, spawn_key=(self.stream, self.replicate))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, replicate: int) -> "SeedSpec":
        return SeedSpec(self.master, replicate, self.stream)


@dataclass(frozen=True)
class IncidenceSample:
    """Chooser sets of the objects in CSR form.

    ``objects`` lists the objects chosen by at least one vertex (ascending);
    object ``objects[i]`` is chosen by ``members[offsets[i]:offsets[i+1]]``.
    """

    n: int
    m: int
    p: float
    seed: SeedSpec | None
    objects: np.ndarray
    offsets: np.ndarray
    members: np.ndarray

    @classmethod
    def from_chooser_sets(cls, n: int, m: int, chooser_sets, p: float = float("nan"),
                          seed: SeedSpec | None = None) -> "IncidenceSample":
        """Build from an explicit {object: iterable of vertices} mapping."""
        items = sorted((int(w), sorted(set(int(v) for v in vs))) for w, vs in dict(chooser_sets).items())
        items = [(w, vs) for w, vs in items if vs]
        for w, vs in items:
            if not 0 <= w < m:
                raise ValueError(f"object {w} outside [0, {m})")
            if vs[0] < 0 or vs[-1] >= n:
                raise ValueError(f"object {w} chosen by a vertex outside [0, {n})")
        objects = np.array([w for w, _ in items], dtype=np.int64)
        sizes = [len(vs) for _, vs in items]
        offsets = np.zeros(len(items) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum(sizes, dtype=np.int64)
        members = np.array([v for _, vs in items for v in vs], dtype=np.int64)
        return cls(n, m, p, seed, objects, offsets, members)

    @property
    def incidence_count(self) -> int:
        return int(self.members.size)

    def chooser(self, i: int) -> np.ndarray:
        """Vertices choosing the i-th nonempty object (index into ``objects``)."""
        return self.members[self.offsets[i]:self.offsets[i + 1]]

    def chooser_sets(self) -> dict[int, tuple[int, ...]]:
        return {int(w): tuple(int(v) for v in self.chooser(i)) for i, w in enumerate(self.objects)}

    def vertex_object_counts(self) -> np.ndarray:
        return np.bincount(self.members, minlength=self.n)

    def objects_of(self) -> list[list[int]]:
        """Inverted index: vertex -> indices (into ``objects``) of its objects."""
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i in range(self.objects.size):
            for v in self.chooser(i):
                out[int(v)].append(i)
        return out

    def __eq__(self, other):
        return (isinstance(other, IncidenceSample) and (self.n, self.m) == (other.n, other.m)
                and np.array_equal(self.objects, other.objects)
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.members, other.members))

    __hash__ = None


def _positions_geometric(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    """Sorted indices in [0, total) of successes of independent Bernoulli(p) trials."""
    out = []
    pos = -1
    # draw gaps in batches sized to the expected count
    batch = max(64, int(total * p * 1.1) + 64)
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        keep = idx[idx < total]
        out.append(keep)
        if keep.size < idx.size:
            break
        pos = int(idx[-1])
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def _positions_bernoulli(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    out = []
    for start in range(0, total, _BLOCK):
        size = min(_BLOCK, total - start)
        out.append(np.flatnonzero(rng.random(size) < p) + start)
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def _bernoulli_positions(rng, total: int, p: float, method: str) -> np.ndarray:
    if not 0 <= p <= 1:
        raise ValueError(f"p = {p} outside [0, 1]")
    if total == 0 or p == 0:
        return np.zeros(0, dtype=np.int64)
    if p == 1:
        return np.arange(total, dtype=np.int64)
    if method == "auto":
        method = "skip" if p < SKIP_BELOW else "bernoulli"
    if method == "skip":
        return _positions_geometric(rng, total, p).astype(np.int64)
    if method == "bernoulli":
        return _positions_bernoulli(rng, total, p)
    raise ValueError(f"unknown sampling method {method!r}")


def sample_incidence(n: int, m: int, p: float, seed: SeedSpec | int, *,
                     method: str = "auto") -> IncidenceSample:
    """Draw every (object, vertex) incidence independently with probability p.

    The n*m grid is scanned object-major; ``method`` is "skip" (geometric
    gaps), "bernoulli" (one uniform per cell) or "auto".
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    rng = seed.generator()
    pos = _bernoulli_positions(rng, n * m, p, method)
    obj = pos // n if n else pos
    vert = pos % n if n else pos
    objects, starts = np.unique(obj, return_index=True)
    offsets = np.append(starts, pos.size).astype(np.int64)
    return IncidenceSample(n, m, p, seed, objects.astype(np.int64), offsets, vert.astype(np.int64))


def project_graph(sample: IncidenceSample) -> HostGraph:
    """Intersection graph: the union of the cliques on the chooser sets."""
    nbrs: list[set[int]] = [set() for _ in range(sample.n)]
    for i in range(sample.objects.size):
        vs = sample.chooser(i).tolist()
        if len(vs) < 2:
            continue
        for v in vs:
            nbrs[v].update(vs)
    for v, s in enumerate(nbrs):
        s.discard(v)
    return HostGraph(sample.n, [frozenset(s) for s in nbrs])


def _pair_from_index(n: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # row u holds pairs (u, u+1..n-1); row_start[u] = u*n - u(u+1)/2
    u_all = np.arange(n, dtype=np.int64)
    row_start = u_all * n - u_all * (u_all + 1) // 2
    u = np.searchsorted(row_start, idx, side="right") - 1
    v = idx - row_start[u] + u + 1
    return u, v


def sample_gnp(n: int, p_hat: float, seed: SeedSpec | int, *, method: str = "auto") -> HostGraph:
    """Erdős–Rényi G(n, p_hat)."""
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    rng = seed.generator()
    total = n * (n - 1) // 2
    pos = _bernoulli_positions(rng, total, p_hat, method)
    u, v = _pair_from_index(n, pos)
    return HostGraph.from_edges(n, zip(u.tolist(), v.tolist()))


def p_hat(m: int, p: float, mode: str = "leading") -> float:
    """Edge probability of the matched G(n, p_hat): mp^2 ("leading") or 1-(1-p^2)^m ("exact")."""
    if mode == "leading":
        x = m * p * p
        if x > 1:
            warnings.warn(f"mp^2 = {x:.3g} > 1; clamped to 1", RuntimeWarning, stacklevel=2)
            return 1.0
        return x
    if mode == "exact":
        if p >= 1:
            return 1.0 if m else 0.0
        return -math.expm1(m * math.log1p(-p * p))
    raise ValueError(f"unknown p_hat mode {mode!r}")
