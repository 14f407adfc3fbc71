import math
import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from rigpoisson.covers import CliqueCover, enumerate_cliques, enumerate_proper_covers
from rigpoisson.graphs import (
    PatternGraph,
    automorphisms,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    is_strictly_balanced,
    mask_of,
    path_graph,
    popcount,
)
from rigpoisson.params import ModelParams, floor_power
from rigpoisson.thresholds import (
    NEITHER,
    STRICT,
    UNBALANCED,
    analyze,
    cover_balance,
    critical_covers,
    eta1,
    eta2,
    eta2_table,
    lambda0,
    log_psi,
    omega,
    phi,
    pi_order,
    pi_predict,
    pi_predict_above,
    psi,
    regime_check,
    regime_flags,
)

from strategies import pattern_graphs

K2, K3, P3, C4 = complete_graph(2), complete_graph(3), path_graph(3), cycle_graph(4)


def m(*vs):
    return mask_of(v - 1 for v in vs)


TRI = CliqueCover.of(K3, [m(1, 2, 3)])
EDGES3 = CliqueCover.of(K3, [m(1, 2), m(1, 3), m(2, 3)])

alphas = st.fractions(min_value=F(1, 12), max_value=F(8), max_denominator=12)


class TestEta:
    def test_eta2_examples(self):
        assert eta2(TRI, K3.full, 1) == F(4, 3)
        assert eta2(EDGES3, K3.full, 3) == 2
        # all restrictions singletons
        assert eta2(EDGES3, m(1), F(1, 2)) == (1 + F(1, 2) * 2) / 2

    def test_eta1_examples(self):
        assert eta1(TRI, 1) == F(4, 3)
        assert eta1(EDGES3, 1) == 1
        for a in (F(1, 3), F(1), F(5, 2)):
            assert eta1(CliqueCover.of(K2, [m(1, 2)]), a) == (2 + a) / 2

    def test_eta2_needs_nonempty(self):
        with pytest.raises(ValueError):
            eta2(TRI, 0, 1)

    @given(pattern_graphs(max_h=4), alphas)
    @settings(max_examples=40)
    def test_eta1_below_full_set(self, g, a):
        for c in list(enumerate_proper_covers(g))[:30]:
            assert eta1(c, a) <= eta2(c, g.full, a)

    @given(pattern_graphs(max_h=5), alphas)
    @settings(max_examples=40)
    def test_eta2_is_smaller_root(self, g, a):
        # both branch formulas are roots of a monomial exponent; the rule picks the smaller
        c = next(iter(enumerate_proper_covers(g)))
        for s in range(1, g.full + 1):
            full = [q & s for q in c.cliques if q & s]
            if not full:
                assert eta2(c, s, a) == math.inf
                continue
            ge2 = [q for q in full if popcount(q) >= 2]
            r1 = (popcount(s) + a * len(full)) / sum(map(popcount, full))
            r2 = (popcount(s) + a * len(ge2)) / sum(map(popcount, ge2)) if ge2 else None
            assert eta2(c, s, a) == (r1 if r2 is None else min(r1, r2))


class TestEta0:
    @pytest.mark.parametrize("h", [3, 4, 5])
    def test_cliques_piecewise(self, h):
        b = F(2 * h, h - 1)
        assert critical_covers(complete_graph(h), 1)[0] == 1 + F(1, h)
        assert critical_covers(complete_graph(h), b)[0] == F(h + 1, h - 1)
        assert critical_covers(complete_graph(h), 2 * b)[0] == F(1, h - 1) + 2 * b / 2

    def test_examples(self):
        v, c0 = critical_covers(K3, 1)
        assert v == F(4, 3) and [c.cliques for c in c0] == [TRI.cliques]
        v, c0 = critical_covers(K3, 3)
        assert v == 2 and {c.cliques for c in c0} == {TRI.cliques, EDGES3.cliques}
        v, c0 = critical_covers(C4, 1)
        assert v == 1 and len(c0) == 1 and c0[0].size == 4

    @given(pattern_graphs(max_h=5), alphas)
    @settings(max_examples=60)
    def test_pruned_matches_exhaustive(self, g, a):
        if len(enumerate_cliques(g)) > 12:
            return
        v1, c1 = critical_covers(g, a)
        v2, c2 = critical_covers(g, a, exhaustive=True)
        assert v1 == v2
        assert [c.cliques for c in c1] == [c.cliques for c in c2]

    @given(pattern_graphs(max_h=5), alphas)
    @settings(max_examples=30)
    def test_critical_set_closed_under_automorphisms(self, g, a):
        _, c0 = critical_covers(g, a)
        keys = {c.cliques for c in c0}
        for perm in automorphisms(g):
            for c in c0:
                assert c.relabel(perm) in keys

    def test_eta0_above_half_alpha(self):
        for g in (K3, C4, complete_bipartite(2, 3), complete_graph(5)):
            for a in (F(1, 10), F(1), F(7)):
                assert critical_covers(g, a)[0] > a / 2


class TestBalance:
    @pytest.mark.parametrize("h", [3, 4, 5, 6])
    def test_cliques_strict(self, h):
        b = F(2 * h, h - 1)
        for a in (F(1), b, 2 * b):
            assert analyze(complete_graph(h), a).strictly_balanced

    @pytest.mark.parametrize("t", [3, 4, 5, 6, 7])
    def test_cycles_strict(self, t):
        for a in (F(1, 100), F(1, 10), F(1), F(5), F(40)):
            r = analyze(cycle_graph(t), a)
            if t > 3:
                assert r.eta0 == F(1, 2) + a / 2
            assert r.strictly_balanced

    def test_bipartite_witness(self):
        g = complete_bipartite(2, 3)
        r = analyze(g, F(1, 12))
        (v,) = r.verdicts.values()
        assert v.verdict == UNBALANCED and v.witness is not None
        table = r.eta2[r.c0[0].cliques]
        assert table[v.witness] < table[g.full]
        assert analyze(g, F(1, 6)).verdicts[r.c0[0].cliques].verdict == NEITHER
        assert analyze(g, F(1, 5)).strictly_balanced

    @pytest.mark.parametrize("g", [cycle_graph(4), cycle_graph(5), cycle_graph(6), complete_bipartite(2, 3),
                                   complete_bipartite(2, 2), path_graph(4)])
    def test_triangle_free_rule(self, g):
        # the edge cover is the only cover; strict balance plus alpha > h/e gives strict alpha-balance
        (c,) = enumerate_proper_covers(g)
        for a in (F(1, 7), F(1, 2), F(1), F(3)):
            assert eta2(c, g.full, a) == F(g.h, 2 * g.e) + a / 2
            if is_strictly_balanced(g) and a > F(g.h, g.e):
                assert cover_balance(c, a).verdict == STRICT

    def test_verdict_invariant_under_relabelling(self):
        g = PatternGraph(4, [(0, 1), (1, 2), (2, 0), (2, 3)])
        for a in (F(1, 2), F(2), F(5)):
            r = analyze(g, a)
            for c in r.c0:
                for perm in automorphisms(g):
                    img = CliqueCover(g, c.relabel(perm))
                    assert cover_balance(img, a).verdict == r.verdicts[c.cliques].verdict

    def test_strict_means_subsets_above(self):
        r = analyze(complete_graph(4), 1)
        for c in r.c0:
            table = eta2_table(c, 1)
            assert eta1(c, 1) == table[c.pattern.full]
            assert all(v > r.eta0 for s, v in table.items() if s != c.pattern.full)


class TestLambda:
    def test_examples(self):
        c = F(3, 2)
        assert lambda0(K3, 3, c) == (c ** 3 + c ** 6) / 6
        assert lambda0(C4, F(7, 3), c) == c ** 8 / 8
        assert lambda0(complete_bipartite(2, 3), 1, c) == c ** 12 / 12
        assert lambda0(K3, 3, 1) == F(1, 3)

    def test_float_c(self):
        assert math.isclose(lambda0(C4, 1, 0.5), 0.5 ** 8 / 8)

    def test_monotone_in_c(self):
        vals = [lambda0(K3, 3, F(k, 4)) for k in range(1, 12)]
        assert vals == sorted(vals) and len(set(vals)) == len(vals)

    def test_rejects_nonpositive_c(self):
        with pytest.raises(ValueError):
            lambda0(K3, 1, 0)


class TestPsi:
    def test_edge_subset_value(self):
        params = ModelParams(100, F(1), 0.001)
        # min(100^(2+3) p^4, 100^(2+1) p^2) = min(1e-2, 1)
        assert math.isclose(psi(EDGES3, m(1, 2), params), 1e-2, rel_tol=1e-12)

    def test_full_set_single_monomial(self):
        params = ModelParams(50, F(2), 0.003)
        for c in (TRI, EDGES3):
            expected = 50 ** (3 + 2 * c.size) * 0.003 ** c.total
            assert math.isclose(psi(c, K3.full, params), expected, rel_tol=1e-9)

    def test_single_vertex(self):
        params = ModelParams(300, F(3, 2), 1e-4)
        assert math.isclose(psi(TRI, m(1), params), min(300 ** 2.5 * 1e-4, 300), rel_tol=1e-9)
        assert omega(TRI, params) <= min(300 ** 2.5 * 1e-4, 300) * (1 + 1e-12)

    @given(pattern_graphs(max_h=5), alphas)
    @settings(max_examples=30)
    def test_unity_at_own_exponent(self, g, a):
        c = next(iter(enumerate_proper_covers(g)))
        for s in range(1, g.full + 1):
            if eta2(c, s, a) == math.inf:
                continue
            params = ModelParams.at_threshold(1000, a, 1.0, eta2(c, s, a))
            assert log_psi(c, s, params) == 0.0

    def test_phi_regression(self):
        # S an edge: 10^9 p^2 = 10; S a vertex: min(10^6 p, 10^3) = 100
        assert math.isclose(phi(K3, 1, 1.0, 1000), 10.0, rel_tol=1e-9)

    def test_phi_grows(self):
        for g, a in ((K3, F(1)), (C4, F(1)), (K3, F(3))):
            assert phi(g, a, 1.0, 10 ** 4) > phi(g, a, 1.0, 10 ** 2)


class TestPredictors:
    def test_proper_cover_product(self):
        mm, p = 1000, 1e-3
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert math.isclose(pi_predict(EDGES3, mm, p), mm ** 3 * p ** 6)

    def test_singleton_factor(self):
        assert math.isclose(pi_predict([m(1), m(1, 2)], 10 ** 6, 1e-4), 10 ** 6 * 1e-8, rel_tol=1e-9)

    def test_triangle_at_threshold(self):
        params = ModelParams.at_threshold(10 ** 6, 1, 1, F(4, 3))
        assert math.isclose(pi_predict(TRI, params.m, params.p), 1e-18, rel_tol=1e-9)

    def test_warns_when_mp2_large(self):
        with pytest.warns(RuntimeWarning):
            pi_predict(TRI, 100, 0.05)

    @given(st.integers(1, 10 ** 6), st.floats(1e-6, 0.05))
    def test_order_within_constant(self, mm, p):
        for c in ([m(1), m(1, 2)], [m(1), m(2), m(1, 2)], EDGES3):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ratio = pi_predict(c, mm, p) / pi_order(c, mm, p)
            assert 1 / math.e - 1e-12 <= ratio <= 1 + 1e-12

    def test_above_forms(self):
        mm, p = 10 ** 4, 0.012
        x = mm * p * p
        c = CliqueCover.of(P3, [m(1, 2), m(2, 3)])
        assert math.isclose(pi_predict_above(c, mm, p), (1 - math.exp(-x)) ** 2 * math.exp(-x))
        assert math.isclose(pi_predict_above(TRI, mm, p), math.exp(-3 * x) * mm * p ** 3)


class TestRegime:
    def test_examples(self):
        r = regime_check(K3, 1)
        assert r.eta0 == F(4, 3) and r.mp2_exponent == F(-5, 3) and r.passes
        r = regime_check(C4, 4)
        assert r.eta0 == F(5, 2) and r.mp2_exponent == -1 and r.passes

    def test_flags(self):
        assert not regime_flags(1, 2).passes
        assert regime_flags(3, 1).edgeless
        assert regime_flags(F(1, 4), 1).complete


def test_floor_power():
    assert floor_power(10 ** 6, 1) == 10 ** 6
    assert floor_power(1000, F(2, 3)) == 100
    assert floor_power(999, F(2, 3)) == 99
    assert floor_power(8, F(1, 3)) == 2
    assert floor_power(10, F(1, 2)) == 3
    assert all(floor_power(n, F(3, 2)) == math.isqrt(n ** 3) for n in range(1, 400))
