import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublinear_matching.edcs import EdcsParams, EdcsState, build_edcs, edcs_epoch, gprime_graph
from sublinear_matching.exact import MatchingView, hopcroft_karp, rgmm_global
from sublinear_matching.graph import Graph, OracleSession, complete_bipartite, disjoint_edges, path_graph
from sublinear_matching.instances import gen_gnm, gen_lower_bound
from sublinear_matching.local import (GreedyMIS, LcaConfig, LcaOracle, LocalDepthError, RgmmRun,
                                      VirtualGraphOracle, estimate_degree_gprime, is_vertex_in_A, lca_matched,
                                      rgmm_global_virtual, rgmm_local_matched)


def full_h(g, beta=64):
    """H = G (every edge inserted), valid while max degree stays small."""
    st_ = EdcsState(g.n, EdcsParams(beta, 0.1, 1, 10))
    for u, v in g.edges().tolist():
        st_._insert(u, v)
    return st_


def no_filter(n, phase_count=1, seed=0):
    return LcaConfig(eps=0.1, degree_sample_count=max(1, n), degree_cutoff=math.inf,
                     phase_count=phase_count, seed=seed)


class TestGreedyMIS:
    def test_path_items(self):
        # items 0..5 on a path conflict graph, key = id: MIS = {0, 2, 4}
        mis = GreedyMIS(lambda x: (x,), lambda x: [y for y in (x - 1, x, x + 1) if 0 <= y < 6], 100)
        assert [mis.contains(i) for i in range(6)] == [True, False, True, False, True, False]

    def test_depth_cap(self):
        mis = GreedyMIS(lambda x: (-x,), lambda x: [x + 1], 5)
        with pytest.raises(LocalDepthError):
            mis.contains(0)


class TestDegreeEstimate:
    def test_isolated(self):
        g = Graph.from_edges(5, [(0, 1)])
        s = OracleSession(g, seed=1)
        assert estimate_degree_gprime(s, full_h(g), 4, no_filter(5)) == 0.0

    def test_full_star_is_unbiased(self):
        n = 40
        g = Graph.from_edges(n, [(0, v) for v in range(1, n)])
        st_ = EdcsState(n, EdcsParams(64, 0.1, 1, 10))  # empty H: every edge is underfull
        ests = []
        for seed in range(300):
            cfg = LcaConfig(0.1, 20, math.inf, 1, seed)
            ests.append(estimate_degree_gprime(OracleSession(g), st_, 0, cfg))
        # each estimate is n * k' / k with k' the non-self draws
        assert all(abs(e * 20 / n - round(e * 20 / n)) < 1e-9 for e in ests)
        assert abs(np.mean(ests) - (n - 1)) < 1.0

    def test_matrix_and_list_agree(self):
        g = gen_gnm(200, 800, 3)
        st_ = build_edcs(OracleSession(g, 2), EdcsParams.practical(g.n, beta=8))
        cfg = LcaConfig.practical(g.n, seed=5)
        for v in range(0, 200, 17):
            a = estimate_degree_gprime(OracleSession(g, model="matrix"), st_, v, cfg)
            b = estimate_degree_gprime(OracleSession(g, model="list"), st_, v, cfg)
            assert a == b

    @pytest.mark.xfail(strict=True, reason="error bound n^(eps^3) needs a sample size far above n at desk scale")
    def test_error_law_at_desk_scale(self):
        n = 2000
        g = gen_gnm(n, 20000, 1)
        s = OracleSession(g, 1)
        st_ = build_edcs(s, EdcsParams.practical(n))
        true_deg = np.bincount(gprime_graph(g, st_).edges().ravel(), minlength=n)
        cfg = LcaConfig.practical(n, seed=3)
        errs = [abs(estimate_degree_gprime(s, st_, v, cfg) - true_deg[v]) for v in range(0, n, 20)]
        assert max(errs) <= n ** (0.1**3)


class TestLca:
    def test_disjoint_edges_all_matched(self):
        g = disjoint_edges(3)
        s = OracleSession(g, 1)
        st_ = full_h(g)
        assert all(lca_matched(s, st_, v, no_filter(6)) for v in range(6))

    def test_isolated(self):
        g = Graph.from_edges(4, [(0, 1)])
        assert not lca_matched(OracleSession(g), full_h(g), 3, no_filter(4))

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_valid_and_approximate(self, p):
        g = gen_gnm(120, 180, p)
        s = OracleSession(g, 2)
        st_ = build_edcs(s, EdcsParams.practical(g.n, delta=g.n))
        o = LcaOracle(s, st_, LcaConfig.practical(g.n, phase_count=p, seed=p))
        m = MatchingView.from_edges(g.n, o.matching_edges())
        fg = Graph.from_edges(g.n, o.filtered_edges())
        assert m.is_valid_for(fg)
        assert m.size >= (1 - 1 / (p + 1)) * hopcroft_karp(fg).size

    def test_phase_one_is_maximal(self):
        g = gen_gnm(100, 200, 9)
        o = LcaOracle(OracleSession(g), full_h(g), no_filter(100))
        mate = np.array([o.mate(v) for v in range(g.n)])
        for u, v in g.edges().tolist():
            assert mate[u] >= 0 or mate[v] >= 0

    def test_order_independent(self):
        g = gen_gnm(80, 160, 4)
        st_ = full_h(g)
        cfg = no_filter(80, phase_count=2, seed=7)
        a = LcaOracle(OracleSession(g), st_, cfg)
        b = LcaOracle(OracleSession(g), st_, cfg)
        fwd = [a.mate(v) for v in range(80)]
        bwd = [b.mate(v) for v in reversed(range(80))][::-1]
        assert fwd == bwd

    def test_filter_removes_high_degree(self):
        g = complete_bipartite(1, 30)
        cfg = LcaConfig(0.1, 31, 5.0, 1, 0)
        o = LcaOracle(OracleSession(g), full_h(g), cfg)
        assert not o.retained(0) and not o.matched(1)

    def test_bad_selector(self):
        g = path_graph(3)
        with pytest.raises(ValueError):
            LcaOracle(OracleSession(g), full_h(g), no_filter(3), selector="G")


class TestVertexInA:
    def test_not_mid(self):
        g = path_graph(3)
        st_ = EdcsState(3, EdcsParams(10, 0.1, 1, 1))
        assert is_vertex_in_A(OracleSession(g), st_, 0, no_filter(3)) == "not-mid"

    def test_isolated_mid_vertex(self):
        # star centre with deg_H = 5 = 0.5 beta sits in V_mid; a lone vertex forced into V_mid is A
        g = Graph.from_edges(8, [(0, v) for v in range(1, 6)])
        st_ = full_h(g, beta=10)
        o = LcaOracle(OracleSession(g), st_, no_filter(8), "G''")
        assert o.v_mid[0]
        assert is_vertex_in_A(OracleSession(g), st_, 0, no_filter(8), oracle=o) == "B"
        mid = o.v_mid.copy()
        mid[7] = True
        o2 = LcaOracle(OracleSession(g), st_, no_filter(8), "G''", v_mid=mid)
        assert is_vertex_in_A(OracleSession(g), st_, 7, no_filter(8), oracle=o2) == "A"

    @pytest.mark.xfail(strict=True, reason="A and B vertices of the instance fall in V_low, not V_mid")
    def test_lower_bound_a_fraction(self):
        inst = gen_lower_bound(125, 0.2, 5, "YES", seed=1)
        g = inst.graph
        s = OracleSession(g, 1)
        st_ = build_edcs(s, EdcsParams.practical(g.n))
        o = LcaOracle(s, st_, LcaConfig.practical(g.n, seed=1), "G''")
        a = inst.vertices("A")
        labels = [is_vertex_in_A(s, st_, int(v), o.config, oracle=o) for v in a]
        assert labels.count("A") / len(a) >= 0.9


class TestRgmm:
    def test_single_edge(self):
        o = VirtualGraphOracle.from_graph(Graph.from_edges(2, [(0, 1)]))
        assert rgmm_local_matched(o, 0, 3) and rgmm_local_matched(o, 1, 3)

    def test_isolated(self):
        o = VirtualGraphOracle.from_graph(Graph.from_edges(3, [(0, 1)]))
        assert not rgmm_local_matched(o, 2, 3)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_global_on_real_graph(self, seed):
        g = gen_gnm(50, 120, seed)
        o = VirtualGraphOracle.from_graph(g)
        glob = rgmm_global(g, seed)
        run = RgmmRun(o, seed)
        for v in range(g.n):
            assert rgmm_local_matched(o, v, seed) == bool(glob.mate[v] >= 0)
            assert (run.partner(v) if run.partner(v) is not None else -1) == glob.mate[v]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**40), st.integers(2, 40), st.integers(0, 3))
    def test_dummies_agree_with_materialised(self, seed, n, kappa):
        g = gen_gnm(n, min(n * (n - 1) // 2, 2 * n), seed % 1000)
        owners = set(range(0, n, 3))
        o = VirtualGraphOracle.from_graph(g, lambda v: kappa if v in owners else 0)
        matched, mate = rgmm_global_virtual(o, seed)
        run = RgmmRun(o, seed)
        for v in range(n):
            p = run.partner(v)
            assert (p is not None) == bool(matched[v])
            if p is not None:
                assert (p if p >= 0 else -2) == mate[v]
