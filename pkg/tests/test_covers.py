import itertools

import pytest
from hypothesis import given, settings

from rigpoisson.covers import (
    CliqueCover,
    CoverBudgetExceeded,
    CoverError,
    check_clique_cover,
    combine_covers,
    enumerate_cliques,
    enumerate_minimal_covers,
    enumerate_proper_covers,
    glue,
    is_minimal_cover,
    restrict_cover,
)
from rigpoisson.graphs import (
    CapExceeded,
    PatternError,
    complete_graph,
    cycle_graph,
    mask_of,
    path_graph,
    popcount,
)

from strategies import pattern_graphs

K2, K3, P3, C4 = complete_graph(2), complete_graph(3), path_graph(3), cycle_graph(4)


def m(*vs):
    return mask_of(v - 1 for v in vs)


def brute_covers(g):
    cl = enumerate_cliques(g)
    out = set()
    for r in range(1, len(cl) + 1):
        for combo in itertools.combinations(cl, r):
            try:
                check_clique_cover(g, combo)
            except CoverError:
                continue
            out.add(tuple(sorted(combo)))
    return out


class TestCliques:
    def test_k3(self):
        assert enumerate_cliques(K3) == sorted([m(1, 2), m(1, 3), m(2, 3), m(1, 2, 3)])

    def test_c4_edges_only(self):
        assert enumerate_cliques(C4) == sorted(mask_of(e) for e in C4.edges)


class TestEnumeration:
    @pytest.mark.parametrize("g, count", [(K2, 1), (K3, 9), (P3, 1), (C4, 1)])
    def test_anchor_counts(self, g, count):
        assert len(list(enumerate_proper_covers(g))) == count

    def test_k3_split(self):
        covers = list(enumerate_proper_covers(K3))
        assert sum(1 for c in covers if m(1, 2, 3) in c.cliques) == 8

    @given(pattern_graphs(max_h=5))
    @settings(max_examples=40)
    def test_matches_brute_force(self, g):
        if len(enumerate_cliques(g)) > 14:
            return
        got = {c.cliques for c in enumerate_proper_covers(g)}
        assert got == brute_covers(g)
        for cliques in got:
            check_clique_cover(g, cliques)  # independent validator

    def test_budget(self):
        with pytest.raises(CoverBudgetExceeded):
            list(enumerate_proper_covers(complete_graph(4), budget=10))

    def test_cap(self):
        with pytest.raises(CapExceeded):
            list(enumerate_proper_covers(complete_graph(5), cap=4))

    @given(pattern_graphs(max_h=5))
    @settings(max_examples=40)
    def test_minimal_covers(self, g):
        if len(enumerate_cliques(g)) > 14:
            return
        minimal = [c.cliques for c in enumerate_minimal_covers(g)]
        assert len(minimal) == len(set(minimal))
        expected = {c for c in brute_covers(g) if is_minimal_cover(g, c)}
        assert set(minimal) == expected
        for cliques in minimal:
            for drop in range(len(cliques)):
                with pytest.raises(CoverError):
                    check_clique_cover(g, cliques[:drop] + cliques[drop + 1:])


class TestCliqueCover:
    def test_validation(self):
        with pytest.raises(CoverError):
            CliqueCover.of(P3, [m(1, 2, 3)])
        with pytest.raises(CoverError):
            CliqueCover.of(P3, [m(1, 2)])
        with pytest.raises(CoverError):
            CliqueCover.of(K3, [m(1, 2, 3), m(1)])
        c = CliqueCover.of(K3, [m(1, 2, 3), m(1)], proper=False)
        assert not c.is_proper

    def test_totals(self):
        c = CliqueCover.of(K3, [m(1, 2), m(1, 3), m(2, 3)])
        assert (c.size, c.total) == (3, 6)
        assert c.as_lists() == [[1, 2], [1, 3], [2, 3]]


class TestRestriction:
    def test_three_edges_on_edge(self):
        c = CliqueCover.of(K3, [m(1, 2), m(1, 3), m(2, 3)])
        full, ge2 = restrict_cover(c, m(1, 2))
        assert sorted(full.parts) == sorted([m(1, 2), m(1), m(2)])
        assert (full.total, full.cardinality) == (4, 3)
        assert ge2.parts == (m(1, 2),)

    def test_full_set(self):
        for c in enumerate_proper_covers(K3):
            full, ge2 = restrict_cover(c, K3.full)
            assert full.parts == ge2.parts == c.cliques

    def test_singleton(self):
        full, ge2 = restrict_cover(CliqueCover.of(K3, [m(1, 2, 3)]), m(1))
        assert full.parts == (m(1),) and ge2.parts == ()

    def test_multiplicity_kept(self):
        c = CliqueCover.of(K3, [m(1, 2, 3), m(1, 2)])
        full, _ = restrict_cover(c, m(1, 2))
        assert full.parts == (m(1, 2), m(1, 2))

    def test_empty_rejected(self):
        with pytest.raises(PatternError):
            restrict_cover(CliqueCover.of(K2, [m(1, 2)]), 0)

    @given(pattern_graphs(max_h=5))
    @settings(max_examples=30)
    def test_identities(self, g):
        triangle_free = all(popcount(q) == 2 for q in enumerate_cliques(g))
        for c in itertools.islice(enumerate_proper_covers(g), 20):
            for s in range(1, g.full + 1):
                full, ge2 = restrict_cover(c, s)
                assert ge2.total <= full.total and ge2.cardinality <= full.cardinality
                if triangle_free:
                    assert full.total - full.cardinality == g.edges_within(s)


class TestCombine:
    def test_same_edge(self):
        c = CliqueCover.of(K2, [m(1, 2)])
        u, covers = combine_covers(K2, c, K2, c, {0: 0, 1: 1})
        assert covers == {(m(1, 2),)}

    def test_path_from_two_edges(self):
        c = CliqueCover.of(K2, [m(1, 2)])
        u, covers = combine_covers(K2, c, K2, c, {1: 0})
        assert u.graph == P3
        assert covers == {(m(1, 2), m(2, 3))}

    def test_disjoint(self):
        c1 = CliqueCover.of(K3, [m(1, 2, 3)])
        c2 = CliqueCover.of(K2, [m(1, 2)])
        u, covers = combine_covers(K3, c1, K2, c2, {})
        assert covers == {tuple(sorted([m(1, 2, 3), m(4, 5)]))}

    def test_inconsistent_overlap(self):
        c = CliqueCover.of(P3, [m(1, 2), m(2, 3)])
        with pytest.raises(PatternError):
            glue(P3, c.pattern, {0: 0, 2: 1})
        with pytest.raises(PatternError):
            glue(P3, P3, {0: 0, 1: 0})

    def test_defining_property(self):
        c1 = CliqueCover.of(K3, [m(1, 2), m(1, 3), m(2, 3)])
        c2 = CliqueCover.of(K3, [m(1, 2, 3)])
        u, covers = combine_covers(K3, c1, K3, c2, {1: 0, 2: 1})
        for cover in covers:
            for v, target in ((u.v1, u.lift1(c1.cliques)), (u.v2, u.lift2(c2.cliques))):
                assert sorted(q & v for q in cover if popcount(q & v) >= 2) == sorted(target)
