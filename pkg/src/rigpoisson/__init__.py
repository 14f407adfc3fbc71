"""Induced subgraph counts in random intersection graphs G(n, m, p)."""

__version__ = "0.1.0"
