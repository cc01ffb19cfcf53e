"""Sampling estimators for the maximum matching size.

:func:`estimate_two_thirds` sparsifies G to G' through a relaxed EDCS and
estimates the size of a local approximate matching of G' from ``r`` sampled
vertices.  :func:`estimate_beyond_two_thirds` (bipartite inputs) runs it first
and then looks for matching edges among the V_mid vertices left unmatched by
the G'' matching, returning a larger estimate when it finds them.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from .edcs import EdcsParams, EdcsState, build_edcs
from .exact import hopcroft_karp
from .graph import Graph, OracleSession
from .hashing import derive_seed
from .local import LcaConfig, LcaOracle, RgmmRun, VirtualGraphOracle

ESTIMATE_MODES = ("additive", "multiplicative")
BRANCHES = ("two-thirds", "two-thirds-exact", "case1", "case2", "fallback")

_TAG_RGMM = 0x52474D4D


def _log2(n: int) -> float:
    return math.log2(max(n, 2))


@dataclass
class EstimateReport:
    """Result of one estimator run.  ``to_json`` gives the stable serialised form."""

    estimate: float
    algorithm: str
    mode: str
    model: str
    seed: int
    n: int
    config: dict
    list_queries: int
    pair_queries: int
    branch: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def total_queries(self) -> int:
        return self.list_queries + self.pair_queries

    def to_json(self) -> dict:
        out = asdict(self)
        out["total_queries"] = self.total_queries
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# -- the two-thirds estimator --------------------------------------------------


@dataclass(frozen=True)
class TwoThirdsConfig:
    """Parameters of the sparsify-then-sample estimator.

    ``bypass_exponent`` applies to the multiplicative mode only: graphs with at
    most ``n ** bypass_exponent`` edges are solved exactly from the full edge list.
    """

    eps: float
    r: int
    edcs: EdcsParams
    lca: LcaConfig
    mode: str = "additive"
    seed: int = 0
    bypass_exponent: float = 1.99

    def __post_init__(self):
        if self.mode not in ESTIMATE_MODES:
            raise ValueError(f"mode must be one of {ESTIMATE_MODES}")
        if self.r < 1:
            raise ValueError("r must be positive")

    @classmethod
    def faithful(cls, n: int, eps: float = 0.1, seed: int = 0, mode: str = "additive") -> "TwoThirdsConfig":
        lg = _log2(n)
        r = math.ceil(36 * lg**3) if mode == "additive" else math.ceil(36 * n**0.01 * lg**3)
        return cls(eps, r, EdcsParams.faithful(n, eps), LcaConfig.faithful(n, eps, seed), mode, seed)

    @classmethod
    def practical(cls, n: int, eps: float = 0.1, seed: int = 0, mode: str = "additive",
                  **overrides) -> "TwoThirdsConfig":
        """Desk defaults: r = ceil(log2(n)^2) (times n^0.01 in multiplicative mode),
        beta = 64, lam = 0.1, delta = ceil(sqrt(n)), one matching phase."""
        lg = _log2(n)
        r = math.ceil(lg**2) if mode == "additive" else math.ceil(n**0.01 * lg**2)
        edcs_kw = {k: overrides.pop(k) for k in ("beta", "lam", "theta", "delta") if k in overrides}
        lca_kw = {k: overrides.pop(k) for k in ("phase_count", "degree_sample_count", "degree_cutoff")
                  if k in overrides}
        r = overrides.pop("r", r)
        cfg = cls(eps, r, EdcsParams.practical(n, **edcs_kw), LcaConfig.practical(n, eps, seed=seed, **lca_kw),
                  mode, seed, **overrides)
        return cfg

    def snapshot(self) -> dict:
        return {"eps": self.eps, "r": self.r, "mode": self.mode, "seed": self.seed,
                "bypass_exponent": self.bypass_exponent,
                "edcs": asdict(self.edcs), "lca": asdict(self.lca)}


def _sample_matched_fraction(session: OracleSession, oracle: LcaOracle, r: int) -> int:
    vs = session.rng.integers(0, session.n, size=r)
    return sum(1 for v in vs.tolist() if oracle.matched(v))


def _two_thirds(session: OracleSession, config: TwoThirdsConfig):
    """Shared body; returns (report, H or None)."""
    n = session.n
    diag: dict[str, Any] = {}
    if n < 2:
        return _report(session, config, 0.0, "two-thirds", diag, "two-thirds"), None
    if config.mode == "multiplicative":
        if session.model != "list":
            raise ValueError("multiplicative mode needs the adjacency-list model")
        degs = session.all_degrees()
        m = int(degs.sum()) // 2
        diag["m"] = m
        if m <= n ** config.bypass_exponent:
            rows = [session.neighbor_row(v) for v in range(n)]
            mu = hopcroft_karp(Graph.from_adjacency(rows, validate=False)).size
            return _report(session, config, float(mu), "two-thirds-exact", diag, "two-thirds"), None
    state = build_edcs(session, config.edcs)
    oracle = LcaOracle(session, state, config.lca, "G'")
    x = _sample_matched_fraction(session, oracle, config.r)
    raw = n * x / (2 * config.r)
    if config.mode == "additive":
        est = raw - n / (2 * _log2(n))
    else:
        est = raw / (1 + config.eps)
    diag.update({"X": x, "h_edges": state.size, "epochs": state.epochs, "moves": state.moves,
                 "rows_read": session.rows_read})
    return _report(session, config, max(0.0, est), "two-thirds", diag, "two-thirds"), state


def _report(session, config, estimate, branch, diag, algorithm) -> EstimateReport:
    return EstimateReport(
        estimate=float(estimate), algorithm=algorithm, mode=config.mode, model=session.model,
        seed=config.seed, n=session.n, config=config.snapshot(), list_queries=session.list_queries,
        pair_queries=session.pair_queries, branch=branch, diagnostics=diag)


def estimate_two_thirds(session: OracleSession, config: TwoThirdsConfig) -> EstimateReport:
    """(2/3 - eps)-style estimate: max(0, n X / (2 r) - n / (2 log2 n)) in additive mode."""
    return _two_thirds(session, config)[0]


def estimate_mu1(session: OracleSession, state: EdcsState | None, config: TwoThirdsConfig,
                 oracle: LcaOracle | None = None) -> float:
    """Sampling estimate of the G'' matching size (same formula as the two-thirds estimator)."""
    n = session.n
    if state is None or n < 2:
        return 0.0
    if oracle is None:
        oracle = LcaOracle(session, state, config.lca, "G''")
    if not oracle.v_mid.any():
        return 0.0
    x = _sample_matched_fraction(session, oracle, config.r)
    return max(0.0, n * x / (2 * config.r) - n / (2 * _log2(n)))


# -- beyond two-thirds ---------------------------------------------------------


@dataclass(frozen=True)
class BeyondConfig:
    """Parameters of the bipartite beyond-2/3 estimator.

    ``threshold`` is the product c * alpha that mu2 and mu3 are compared
    against (relative to mu1).  ``eta_divisor`` is the 100 in
    ``eta = n log2 n / (100 mu1)``.
    """

    two_thirds: TwoThirdsConfig
    gamma: float
    T: int
    kappa: int
    delta: int
    k: int
    r1: int
    r2: int
    r3: int
    threshold: float
    alpha: float = 1e-10
    c: float = 1e16
    eta_divisor: float = 100.0
    seed: int = 0

    @classmethod
    def faithful(cls, n: int, eps: float = 0.1, gamma: float = 0.5, seed: int = 0) -> "BeyondConfig":
        lg = _log2(n)
        return cls(TwoThirdsConfig.faithful(n, eps, seed), gamma, 200,
                   math.ceil(48 * n ** (1 - gamma) * lg**2), math.ceil(n ** (1 + gamma)),
                   math.ceil(n ** (gamma / 2)), math.ceil(72 * lg**3), math.ceil(288 * lg**3),
                   math.ceil(10 * n ** (1 - gamma / 2) * lg), 1e-10 * 1e16, seed=seed)

    @classmethod
    def practical(cls, n: int, eps: float = 0.1, gamma: float = 0.2, seed: int = 0,
                  threshold: float = 0.05, **overrides) -> "BeyondConfig":
        """Desk defaults: T = 3, kappa = ceil(n^(1-gamma)), delta = ceil(n^(1+gamma)),
        k = ceil(n^(gamma/2)), r1 = r2 = ceil(log2(n)^2), r3 = ceil(n^(1-gamma/2))."""
        lg = _log2(n)
        tt_keys = ("beta", "lam", "theta", "phase_count", "degree_sample_count", "degree_cutoff", "r")
        tt_kw = {k: overrides.pop(k) for k in tt_keys if k in overrides}
        base = dict(T=3, kappa=math.ceil(n ** (1 - gamma)), delta=math.ceil(n ** (1 + gamma)),
                    k=math.ceil(n ** (gamma / 2)), r1=math.ceil(lg**2), r2=math.ceil(lg**2),
                    r3=math.ceil(n ** (1 - gamma / 2)))
        base.update(overrides)
        return cls(TwoThirdsConfig.practical(n, eps, seed, **tt_kw), gamma, threshold=threshold,
                   seed=seed, **base)

    @property
    def mode(self) -> str:
        return self.two_thirds.mode

    def snapshot(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "two_thirds"}
        d["two_thirds"] = self.two_thirds.snapshot()
        return d


def _greedy_bucket(session: OracleSession, us: np.ndarray, vs: np.ndarray) -> dict[int, int]:
    """Greedy maximal matching over the confirmed edges of one bucket, in sampling order."""
    mate: dict[int, int] = {}
    keep = us != vs
    us, vs = us[keep], vs[keep]
    if session.model == "matrix":
        hit = session.pair_query_batch(us, vs)
    else:
        hit = np.fromiter((session.edge_exists(int(a), int(b)) for a, b in zip(us, vs)),
                          dtype=bool, count=us.size)
    for a, b in zip(us[hit].tolist(), vs[hit].tolist()):
        if a not in mate and b not in mate:
            mate[a] = b
            mate[b] = a
    return mate


def _sample_a(session: OracleSession, oracle: LcaOracle, live_ids: np.ndarray, want: int,
              exclude: dict | None = None) -> tuple[list[int], int]:
    """Rejection-sample ``want`` vertices of A (minus ``exclude``) from the live V_mid.

    Gives up after ``50 * want`` attempts.  Returns (samples, attempts).
    """
    out: list[int] = []
    attempts = 0
    rng = session.rng
    while len(out) < want and attempts < 50 * want:
        attempts += 1
        v = int(live_ids[rng.integers(live_ids.size)])
        if exclude is not None and v in exclude:
            continue
        if not oracle.matched(v):
            out.append(v)
    return out, attempts


def estimate_beyond_two_thirds(session: OracleSession, config: BeyondConfig) -> EstimateReport:
    """Beyond-2/3 estimator for bipartite graphs (cases 1-3 with a fallback).

    Returns the two-thirds estimate unless case 1 or case 2 fires, in which
    case it returns max(two-thirds estimate, mu1 + mu_i).
    """
    graph = session.graph
    if graph.bipartition is None and graph.two_coloring() is None:
        raise ValueError("bipartition required")
    n = session.n
    tt = replace(config.two_thirds, mode="additive") if config.two_thirds.mode != "additive" else config.two_thirds
    base_report, state = _two_thirds(session, tt)
    mu = base_report.estimate
    diag: dict[str, Any] = {"two_thirds": mu, "iterations": []}

    def finish(estimate, branch):
        return _report(session, config, estimate, branch, diag, "beyond")

    if state is None:
        diag.update({"mu1": 0.0, "eta": n})
        return finish(mu, "fallback")
    lg = _log2(n)
    _, live = state.bands()
    live = live.copy()
    oracle = LcaOracle(session, state, tt.lca, "G''", v_mid=live)
    mu1 = estimate_mu1(session, state, tt, oracle)
    eta = math.ceil(n * lg / (config.eta_divisor * mu1)) if mu1 > 0 else n
    diag.update({"mu1": mu1, "eta": eta, "v_mid": int(live.sum())})
    bar = config.threshold * mu1
    sub = n / (2 * lg)
    rng = session.rng
    for j in range(config.T):
        live_ids = np.flatnonzero(live)
        it = {"iteration": j, "v_mid": int(live_ids.size), "mu2": [], "mu3": [], "removed": 0}
        diag["iterations"].append(it)
        if live_ids.size < 2:
            break
        total = config.k * config.delta
        us = live_ids[rng.integers(live_ids.size, size=total)]
        vs = live_ids[rng.integers(live_ids.size, size=total)]
        matchings = [_greedy_bucket(session, us[i * config.delta:(i + 1) * config.delta],
                                    vs[i * config.delta:(i + 1) * config.delta]) for i in range(config.k)]
        for i, mate in enumerate(matchings):
            # case 1: A-A edges inside the bucket matching
            edges = [(a, b) for a, b in mate.items() if a < b]
            mu2 = 0.0
            if edges:
                pick = rng.integers(len(edges), size=config.r1)
                x = sum(1 for p in pick.tolist()
                        if not oracle.matched(edges[p][0]) and not oracle.matched(edges[p][1]))
                mu2 = max(0.0, len(edges) * x / config.r1 - sub)
            it["mu2"].append(mu2)
            if mu2 > 0 and mu2 >= bar:
                return finish(max(mu, mu1 + mu2), "case1")
            # case 2: random-greedy matching among A vertices the bucket left unmatched
            mu3 = _case2(session, oracle, live, mate, config, derive_seed(config.seed, _TAG_RGMM, j, i), sub)
            it["mu3"].append(mu3)
            if mu3 > 0 and mu3 >= bar:
                return finish(max(mu, mu1 + mu3), "case2")
        # case 3: drop likely-B vertices
        sample_a, _ = _sample_a(session, oracle, live_ids, config.r3)
        sampled = set(sample_a)
        hits: dict[int, int] = {}
        for a in sampled:
            partners = {mate[a] for mate in matchings if a in mate}
            for p in partners:
                hits[p] = hits.get(p, 0) + 1
        removed = [v for v, c in hits.items() if c >= eta]
        it["removed"] = len(removed)
        if removed:
            live[np.asarray(removed, dtype=np.int64)] = False
            oracle = LcaOracle(session, state, tt.lca, "G''", v_mid=live)
    return finish(mu, "fallback")


def _case2(session, oracle: LcaOracle, live: np.ndarray, mate: dict, config: BeyondConfig,
           seed: int, sub: float) -> float:
    live_ids = np.flatnonzero(live)
    samples, attempts = _sample_a(session, oracle, live_ids, config.r2, exclude=mate)
    if not samples:
        return 0.0
    kappa = config.kappa

    def in_set(x):
        return bool(live[x]) and x not in mate

    def neighbors(x):
        if not in_set(x):
            return []
        return [u for u in session.neighbor_row(x) if in_set(u)]

    def dummies(x):
        return kappa if in_set(x) and oracle.matched(x) else 0

    run = RgmmRun(VirtualGraphOracle(session.n, neighbors, dummies), seed)
    y = 0
    for v in samples:
        p = run.partner(v)
        if p is not None and p >= 0 and not oracle.matched(p):
            y += 1
    a_unmatched = live_ids.size * len(samples) / attempts
    return max(0.0, a_unmatched * y / (2 * len(samples)) - sub)
