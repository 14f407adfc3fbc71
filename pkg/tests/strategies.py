"""Hypothesis strategies for small labelled graphs."""

from hypothesis import strategies as st

from rigpoisson.graphs import PatternGraph


@st.composite
def pattern_graphs(draw, min_h=2, max_h=6):
    h = draw(st.integers(min_h, max_h))
    pairs = [(u, v) for u in range(h) for v in range(u + 1, h)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    return PatternGraph(h, chosen)


@st.composite
def host_edge_lists(draw, max_n=8):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return n, edges
