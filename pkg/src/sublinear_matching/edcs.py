"""Relaxed edge-degree constrained subgraphs built from sampled edges.

Only the upper-degree property is maintained (every H-edge has
``deg_H(u) + deg_H(v) <= beta``).  Edges of G outside H whose degree sum is
still below ``(1 - lam) * beta`` are *underfull*; together with H they form
the sparsified graph G' that the local matching oracle runs on.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, OracleSession

MODES = ("practical", "faithful")


@dataclass(frozen=True)
class EdcsParams:
    """Parameters of the sampling loop.

    Attributes:
        beta: edge-degree bound.
        lam: slack; edges with degree sum below ``(1 - lam) * beta`` are inserted.
        delta: sampled pairs (matrix model) or edges (list model) per epoch.
        T: maximum number of epochs.
        mode: "practical" or "faithful" (recorded in reports only).
    """

    beta: int
    lam: float
    delta: int
    T: int
    mode: str = "practical"

    def __post_init__(self):
        if self.beta < 2:
            raise ValueError("beta must be at least 2")
        if not 0 < self.lam < 1:
            raise ValueError("lam must lie in (0, 1)")
        if self.delta < 1 or self.T < 1:
            raise ValueError("delta and T must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def threshold(self) -> float:
        return (1 - self.lam) * self.beta

    @classmethod
    def faithful(cls, n: int, eps: float) -> "EdcsParams":
        lam = eps / 128
        beta = math.ceil(16 * math.log2(1 / lam) / lam**2)
        return cls(beta, lam, max(1, math.ceil(n ** (1 - eps**3))), n * beta**2 + 1, "faithful")

    @classmethod
    def practical(cls, n: int, beta: int = 64, lam: float = 0.1, theta: float = 0.5,
                  delta: int | None = None) -> "EdcsParams":
        """Desk-scale defaults; ``delta`` defaults to ``ceil(n ** (1 - theta))``."""
        if delta is None:
            delta = max(1, math.ceil(max(n, 1) ** (1 - theta)))
        return cls(beta, lam, delta, max(n, 1) * beta**2 + 1, "practical")


class EdcsState:
    """The subgraph H with per-vertex degrees and a move counter."""

    def __init__(self, n: int, params: EdcsParams):
        self.n = n
        self.params = params
        # dicts keep insertion order, which fixes the removal scan order
        self.h_adjacency: list[dict[int, None]] = [{} for _ in range(n)]
        self.h_degree = np.zeros(n, dtype=np.int64)
        self.moves = 0
        self.epochs = 0

    # -- queries ---------------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.h_adjacency[u]

    def is_underfull(self, u: int, v: int) -> bool:
        return self.h_degree[u] + self.h_degree[v] < self.params.threshold

    def in_gprime(self, u: int, v: int) -> bool:
        """Membership of a G-edge in G' = H plus underfull edges."""
        return v in self.h_adjacency[u] or self.h_degree[u] + self.h_degree[v] < self.params.threshold

    @property
    def size(self) -> int:
        return int(self.h_degree.sum()) // 2

    def edges(self) -> np.ndarray:
        out = [(u, w) for u in range(self.n) for w in self.h_adjacency[u] if u < w]
        return np.asarray(out, dtype=np.int64).reshape(-1, 2)

    def bands(self) -> tuple[np.ndarray, np.ndarray]:
        """Masks of V_low (deg_H <= 0.2 beta) and V_mid (0.4 beta <= deg_H <= 0.6 beta)."""
        b = self.params.beta
        deg = self.h_degree
        return deg <= 0.2 * b, (deg >= 0.4 * b) & (deg <= 0.6 * b)

    # -- updates ---------------------------------------------------------------

    def _insert(self, u: int, v: int) -> None:
        self.h_adjacency[u][v] = None
        self.h_adjacency[v][u] = None
        self.h_degree[u] += 1
        self.h_degree[v] += 1
        self.moves += 1

    def _remove(self, u: int, v: int) -> None:
        del self.h_adjacency[u][v]
        del self.h_adjacency[v][u]
        self.h_degree[u] -= 1
        self.h_degree[v] -= 1
        self.moves += 1

    def _fix(self, u: int) -> bool:
        # Remove the first H-edge at u whose degree sum exceeds beta.
        du = int(self.h_degree[u])
        beta = self.params.beta
        deg = self.h_degree
        for w in self.h_adjacency[u]:
            if du + deg[w] > beta:
                self._remove(u, w)
                return True
        return False

    def epoch(self, sampled_edges) -> bool:
        """Apply one epoch of updates; returns whether H changed."""
        changed = False
        thr = self.params.threshold
        adj, deg = self.h_adjacency, self.h_degree
        for u, v in sampled_edges:
            if v in adj[u] or deg[u] + deg[v] >= thr:
                continue
            self._insert(u, v)
            self._fix(u)
            self._fix(v)
            changed = True
        limit = self.n * self.params.beta**2
        if self.moves > limit:
            raise AssertionError(f"move bound violated: {self.moves} > n*beta^2 = {limit}")
        return changed

    # -- validation ------------------------------------------------------------

    def check_p1(self) -> bool:
        e = self.edges()
        if len(e) == 0:
            return True
        return bool(np.all(self.h_degree[e[:, 0]] + self.h_degree[e[:, 1]] <= self.params.beta))

    def check_degrees(self) -> bool:
        return all(len(a) == d for a, d in zip(self.h_adjacency, self.h_degree.tolist()))

    # -- persistence -----------------------------------------------------------

    def to_json(self) -> dict:
        return {"n": self.n, "params": asdict(self.params), "moves": self.moves,
                "epochs": self.epochs, "edges": self.edges().tolist()}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, data: dict) -> "EdcsState":
        st = cls(int(data["n"]), EdcsParams(**data["params"]))
        for u, v in data["edges"]:
            st.h_adjacency[u][v] = None
            st.h_adjacency[v][u] = None
            st.h_degree[u] += 1
            st.h_degree[v] += 1
        st.moves = int(data.get("moves", 0))
        st.epochs = int(data.get("epochs", 0))
        return st

    @classmethod
    def load(cls, path) -> "EdcsState":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def edcs_epoch(state: EdcsState, sampled_edges) -> tuple[EdcsState, bool]:
    changed = state.epoch(sampled_edges)
    return state, changed


def is_underfull(state: EdcsState, u: int, v: int) -> bool:
    return state.is_underfull(u, v)


def _sample_edges(session: OracleSession, delta: int, weights) -> list[tuple[int, int]]:
    rng = session.rng
    n = session.n
    if session.model == "matrix":
        us = rng.integers(0, n, size=delta)
        vs = rng.integers(0, n, size=delta)
        keep = us != vs  # a pair (v, v) can never be an edge; no query is spent on it
        us, vs = us[keep], vs[keep]
        hit = session.pair_query_batch(us, vs)
        return list(zip(us[hit].tolist(), vs[hit].tolist()))
    degs, cdf = weights
    if cdf[-1] == 0:
        return []
    vs = np.searchsorted(cdf, rng.random(delta) * cdf[-1], side="right")
    idx = (rng.random(delta) * degs[vs]).astype(np.int64) + 1
    us = session.adj_list_query_batch(vs, idx)
    return list(zip(vs.tolist(), us.tolist()))


def build_edcs(session: OracleSession, params: EdcsParams) -> EdcsState:
    """Run sampling epochs until H stops changing (or ``params.T`` epochs).

    Matrix model: each epoch draws ``delta`` uniform ordered pairs and keeps
    the ones confirmed by pair queries.  List model: each epoch draws
    ``delta`` uniform edges (vertex by degree, then a uniform list index);
    degrees are obtained through the charged degree operation.
    """
    state = EdcsState(session.n, params)
    if session.n < 2:
        state.epochs = 1
        return state
    weights = None
    if session.model == "list":
        degs = session.all_degrees().astype(np.int64)
        weights = (degs, np.cumsum(degs))
    for _ in range(params.T):
        state.epochs += 1
        if not state.epoch(_sample_edges(session, params.delta, weights)):
            break
    return state


def enumerate_underfull(graph: Graph, state: EdcsState) -> np.ndarray:
    """All edges of G outside H with degree sum below the threshold (full scan)."""
    e = graph.edges()
    if len(e) == 0:
        return e
    deg = state.h_degree
    under = deg[e[:, 0]] + deg[e[:, 1]] < state.params.threshold
    in_h = np.fromiter((state.has_edge(u, v) for u, v in e.tolist()), dtype=bool, count=len(e))
    return e[under & ~in_h]


def gprime_graph(graph: Graph, state: EdcsState) -> Graph:
    """G' = H plus underfull edges, materialised (validation only)."""
    e = np.concatenate([state.edges(), enumerate_underfull(graph, state)])
    return Graph.from_edges(graph.n, e, bipartition=graph.bipartition, validate=False)
