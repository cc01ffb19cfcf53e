import math

import numpy as np
import pytest

from sublinear_matching.edcs import EdcsParams, EdcsState, build_edcs
from sublinear_matching.estimators import (BeyondConfig, TwoThirdsConfig, estimate_beyond_two_thirds,
                                           estimate_mu1, estimate_two_thirds)
from sublinear_matching.exact import hopcroft_karp
from sublinear_matching.graph import Graph, OracleSession, disjoint_edges
from sublinear_matching.instances import gen_bipartite_gnm, gen_gnm, perfect_matching_graph


def mixed_bipartite(nd, ns, pd, ds, seed):
    """Dense core of nd + nd vertices plus ns sparse vertices per side attached by ds edges."""
    rng = np.random.default_rng(seed)
    half = nd + ns
    edges = set()
    for u in range(nd):
        for v in np.flatnonzero(rng.random(nd) < pd):
            edges.add((u, half + int(v)))
    for u in range(nd, half):
        for v in rng.choice(nd, ds, replace=False):
            edges.add((u, half + int(v)))
    for v in range(nd, half):
        for u in rng.choice(nd, ds, replace=False):
            edges.add((int(u), half + v))
    side = np.array([0] * half + [1] * half, dtype=np.int8)
    return Graph.from_edges(2 * half, sorted(edges), bipartition=side)


class TestTwoThirds:
    def test_empty_graph(self):
        g = Graph.from_edges(50, [])
        rep = estimate_two_thirds(OracleSession(g, 1), TwoThirdsConfig.practical(g.n, seed=1))
        assert rep.estimate == 0.0

    def test_single_vertex(self):
        rep = estimate_two_thirds(OracleSession(Graph.from_edges(1, []), 1), TwoThirdsConfig.practical(1))
        assert rep.estimate == 0.0

    @pytest.mark.parametrize("seed", range(3))
    def test_sandwich_perfect_matching(self, seed):
        n = 600
        g = perfect_matching_graph(n, seed)
        rep = estimate_two_thirds(OracleSession(g, seed), TwoThirdsConfig.practical(n, seed=seed))
        assert (2 / 3 - 0.05) * n / 2 - n / math.log2(n) <= rep.estimate <= n / 2

    @pytest.mark.parametrize("model", ["matrix", "list"])
    def test_sandwich_gnm(self, model):
        g = gen_gnm(600, 6000, 2)
        mu = hopcroft_karp(g).size
        rep = estimate_two_thirds(OracleSession(g, 3, model), TwoThirdsConfig.practical(g.n, seed=3))
        assert (2 / 3 - 0.05) * mu - g.n / math.log2(g.n) <= rep.estimate <= mu
        assert rep.model == model

    def test_report_echoes_everything(self):
        g = gen_gnm(200, 600, 1)
        cfg = TwoThirdsConfig.practical(g.n, seed=4, beta=32, r=50)
        rep = estimate_two_thirds(OracleSession(g, 4), cfg)
        d = rep.to_json()
        assert d["config"]["edcs"]["beta"] == 32 and d["config"]["r"] == 50
        assert d["total_queries"] == d["list_queries"] + d["pair_queries"] > 0
        assert {"estimate", "algorithm", "mode", "model", "seed", "n", "branch", "diagnostics"} <= set(d)

    def test_deterministic(self):
        g = gen_gnm(300, 1500, 1)
        a = estimate_two_thirds(OracleSession(g, 9), TwoThirdsConfig.practical(g.n, seed=9)).dumps()
        b = estimate_two_thirds(OracleSession(g, 9), TwoThirdsConfig.practical(g.n, seed=9)).dumps()
        assert a == b

    def test_multiplicative_bypass(self):
        g = gen_gnm(200, 800, 1)
        rep = estimate_two_thirds(OracleSession(g, 1, "list"),
                                  TwoThirdsConfig.practical(g.n, seed=1, mode="multiplicative"))
        assert rep.branch == "two-thirds-exact" and rep.estimate == hopcroft_karp(g).size

    def test_multiplicative_sampling(self):
        g = gen_gnm(400, 3000, 1)
        mu = hopcroft_karp(g).size
        cfg = TwoThirdsConfig.practical(g.n, seed=1, mode="multiplicative", bypass_exponent=1.0)
        rep = estimate_two_thirds(OracleSession(g, 1, "list"), cfg)
        assert rep.branch == "two-thirds" and 0 < rep.estimate <= mu

    def test_multiplicative_needs_list_model(self):
        g = gen_gnm(50, 100, 1)
        with pytest.raises(ValueError):
            estimate_two_thirds(OracleSession(g, 1, "matrix"),
                                TwoThirdsConfig.practical(g.n, mode="multiplicative"))

    def test_bad_override(self):
        with pytest.raises(TypeError):
            TwoThirdsConfig.practical(100, nonsense=3)


class TestMu1:
    def test_empty_h(self):
        g = gen_gnm(50, 100, 1)
        cfg = TwoThirdsConfig.practical(g.n)
        assert estimate_mu1(OracleSession(g), EdcsState(g.n, cfg.edcs), cfg) == 0.0

    def test_disjoint_edges_have_no_mid(self):
        g = disjoint_edges(20)
        s = OracleSession(g, 1)
        cfg = TwoThirdsConfig.practical(g.n, seed=1)
        st_ = build_edcs(s, cfg.edcs)
        assert st_.h_degree.max() <= 1 < 0.4 * cfg.edcs.beta
        assert estimate_mu1(s, st_, cfg) == 0.0


class TestBeyond:
    def test_empty_graph_falls_back(self):
        g = Graph.from_edges(40, [], bipartition=np.arange(40) % 2)
        rep = estimate_beyond_two_thirds(OracleSession(g, 1), BeyondConfig.practical(g.n))
        assert rep.estimate == 0.0 and rep.branch == "fallback"

    def test_non_bipartite_rejected(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
        with pytest.raises(ValueError, match="bipartition required"):
            estimate_beyond_two_thirds(OracleSession(g), BeyondConfig.practical(g.n))

    def test_case1_on_dense_bipartite(self):
        g = gen_bipartite_gnm(200, 200, 12000, 1)
        mu = hopcroft_karp(g).size
        for seed in range(2):
            rep = estimate_beyond_two_thirds(OracleSession(g, seed),
                                             BeyondConfig.practical(g.n, seed=seed, theta=0.0))
            assert rep.branch == "case1"
            assert rep.estimate >= rep.diagnostics["two_thirds"]
            assert rep.estimate <= mu

    def test_case3_shrinks_v_mid(self):
        g = mixed_bipartite(200, 200, 0.3, 4, 1)
        rep = estimate_beyond_two_thirds(OracleSession(g, 0), BeyondConfig.practical(g.n, seed=0, theta=0.0))
        its = rep.diagnostics["iterations"]
        assert its[0]["removed"] > 0
        assert its[1]["v_mid"] == its[0]["v_mid"] - its[0]["removed"]
        assert rep.estimate <= hopcroft_karp(g).size

    @pytest.mark.parametrize("seed", range(3))
    def test_return_structure(self, seed):
        g = mixed_bipartite(100, 100, 0.9, 1, seed)
        cfg = BeyondConfig.practical(g.n, seed=seed, theta=0.0)
        rep = estimate_beyond_two_thirds(OracleSession(g, seed), cfg)
        base = estimate_two_thirds(OracleSession(g, seed), cfg.two_thirds)
        assert rep.diagnostics["two_thirds"] == base.estimate
        if rep.branch == "fallback":
            assert rep.estimate == base.estimate
        else:
            assert rep.estimate >= base.estimate

    def test_deterministic(self):
        g = mixed_bipartite(100, 100, 0.5, 2, 3)
        cfg = BeyondConfig.practical(g.n, seed=5, theta=0.0)
        a = estimate_beyond_two_thirds(OracleSession(g, 5), cfg).dumps()
        b = estimate_beyond_two_thirds(OracleSession(g, 5), cfg).dumps()
        assert a == b

    def test_faithful_preset_shape(self):
        cfg = BeyondConfig.faithful(1000)
        assert cfg.threshold == pytest.approx(cfg.c * cfg.alpha)


def test_beyond_queries_include_two_thirds_run():
    g = mixed_bipartite(100, 100, 0.5, 2, 4)
    cfg = BeyondConfig.practical(g.n, seed=2, theta=0.0)
    rep = estimate_beyond_two_thirds(OracleSession(g, 2), cfg)
    base = estimate_two_thirds(OracleSession(g, 2), cfg.two_thirds)
    assert rep.total_queries >= base.total_queries


@pytest.mark.parametrize("seed", range(4))
def test_mu1_against_full_enumeration(seed):
    from sublinear_matching.local import LcaOracle
    g = mixed_bipartite(200, 200, 0.3, 4, 1)
    s = OracleSession(g, seed)
    cfg = TwoThirdsConfig.practical(g.n, seed=seed, theta=0.0)
    st_ = build_edcs(s, cfg.edcs)
    oracle = LcaOracle(s, st_, cfg.lca, "G''")
    full = len(oracle.matching_edges())
    assert full > 0
    assert abs(estimate_mu1(s, st_, cfg, oracle) - full) <= g.n / math.log2(g.n)
