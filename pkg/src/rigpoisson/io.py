"""Reading and writing patterns, host graphs and covers.

Edge-list format: the vertex count on the first non-comment line, then one
``u v`` pair per line, 1-indexed. ``#`` starts a comment. Graph6 is the
usual single-line nauty format (optionally prefixed by ``>>graph6<<``).
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import networkx as nx

from .graphs import DEFAULT_CAP, HostGraph, PatternError, PatternGraph, bits


def _parse_edge_lines(text: str) -> tuple[int, list[tuple[int, int]]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise PatternError("empty edge list")
    lineno, head = rows[0]
    if len(head) != 1:
        raise PatternError(f"line {lineno}: expected the vertex count alone")
    try:
        n = int(head[0])
    except ValueError:
        raise PatternError(f"line {lineno}: vertex count {head[0]!r} is not an integer") from None
    edges = []
    for lineno, parts in rows[1:]:
        if len(parts) != 2:
            raise PatternError(f"line {lineno}: expected 'u v', got {' '.join(parts)!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise PatternError(f"line {lineno}: non-integer vertex") from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise PatternError(f"line {lineno}: vertex outside 1..{n}")
        edges.append((u - 1, v - 1))
    return n, edges


def parse_edge_list(text: str, *, cap: int = DEFAULT_CAP) -> PatternGraph:
    n, edges = _parse_edge_lines(text)
    return PatternGraph(n, edges, cap=cap)


def parse_host_edge_list(text: str) -> HostGraph:
    n, edges = _parse_edge_lines(text)
    return HostGraph.from_edges(n, edges)


def _graph6_to_nx(line: str) -> nx.Graph:
    line = line.strip()
    if line.startswith(">>graph6<<"):
        line = line[len(">>graph6<<"):]
    try:
        return nx.from_graph6_bytes(line.encode("ascii"))
    except Exception as exc:  # networkx raises a mix of error types here
        raise PatternError(f"invalid graph6 string {line!r}: {exc}") from None


def parse_graph6(line: str, *, cap: int = DEFAULT_CAP) -> PatternGraph:
    g = _graph6_to_nx(line)
    return PatternGraph(g.number_of_nodes(), g.edges(), cap=cap)


def to_graph6(graph: PatternGraph | HostGraph) -> str:
    g = nx.Graph()
    if isinstance(graph, PatternGraph):
        g.add_nodes_from(range(graph.h))
    else:
        g.add_nodes_from(range(graph.n))
    g.add_edges_from(graph.edges() if isinstance(graph, HostGraph) else graph.edges)
    return nx.to_graph6_bytes(g, header=False).decode("ascii").strip()


def format_edge_list(graph: PatternGraph | HostGraph) -> str:
    if isinstance(graph, PatternGraph):
        n, edges = graph.h, graph.edges
    else:
        n, edges = graph.n, graph.edges()
    lines = [str(n)] + [f"{u + 1} {v + 1}" for u, v in edges]
    return "\n".join(lines) + "\n"


def _looks_like_edge_list(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line.isdigit()
    return True


def read_pattern(path: str | Path, *, cap: int = DEFAULT_CAP) -> PatternGraph:
    """Load a pattern from an edge-list or graph6 file (auto-detected)."""
    text = Path(path).read_text()
    if _looks_like_edge_list(text):
        return parse_edge_list(text, cap=cap)
    first = next(line for line in text.splitlines() if line.strip())
    return parse_graph6(first, cap=cap)


def read_host(path: str | Path) -> HostGraph:
    text = Path(path).read_text()
    if _looks_like_edge_list(text):
        return parse_host_edge_list(text)
    first = next(line for line in text.splitlines() if line.strip())
    g = _graph6_to_nx(first)
    return HostGraph.from_edges(g.number_of_nodes(), g.edges())


def cliques_to_json(cliques: Iterable[int]) -> list[list[int]]:
    """Canonical JSON form of a clique family: sorted lists of 1-indexed ids."""
    return sorted(([v + 1 for v in bits(q)] for q in cliques), key=lambda c: (len(c), c))


def cliques_from_json(data: list[list[int]]) -> tuple[int, ...]:
    out = []
    for clique in data:
        m = 0
        for v in clique:
            if not isinstance(v, int) or v < 1:
                raise PatternError(f"bad vertex id {v!r} in cover")
            m |= 1 << (v - 1)
        out.append(m)
    return tuple(sorted(out))
