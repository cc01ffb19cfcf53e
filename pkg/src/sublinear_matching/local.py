"""Local computation oracles over derived subgraphs.

Two oracles live here:

* :class:`LcaOracle` answers "is v matched?" for a fixed, seed-determined
  approximate matching of G' (or G'') after high-degree vertices are filtered
  out.  The matching is built in phases: phase 1 is a random-greedy maximal
  matching, phase i >= 2 augments along a random-greedy maximal set of
  vertex-disjoint augmenting paths of length exactly 2i - 1.  After p phases
  no augmenting path of length <= 2p - 1 remains, so the matching has size at
  least p/(p+1) of the maximum.
* :class:`VirtualGraphOracle` with :func:`rgmm_local_matched` simulates the
  random-greedy maximal matching of a graph given only by a neighbor function,
  optionally with virtual degree-one "dummy" neighbors attached to some
  vertices.

Both use :class:`GreedyMIS`, an iterative memoised simulation of the greedy
independent set under a fixed rank order, so recursion depth never touches
the interpreter limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable

import numpy as np

from .edcs import EdcsState
from .graph import OracleSession
from .hashing import derive_seed, hash64, hash64_array

SELECTORS = ("G'", "G''")

_TAG_DEGREE = 0x44454721
_TAG_DUMMY = 0x44554D59


class LocalDepthError(RuntimeError):
    """The rank-ordered exploration went deeper than the configured cap."""


class GreedyMIS:
    """Membership in the greedy maximal independent set of a conflict graph.

    Items are processed in increasing ``key`` order; an item joins the set iff
    no lower-key conflicting item did.  ``conflicts(item)`` may return a
    superset (including the item itself); it is filtered by key here.
    """

    def __init__(self, key: Callable[[Hashable], tuple], conflicts: Callable[[Hashable], Iterable],
                 max_depth: int):
        self.key = key
        self.conflicts = conflicts
        self.max_depth = max(1, max_depth)
        self.memo: dict = {}
        self.explored = 0

    def _lower(self, item) -> list:
        k = self.key(item)
        lower = [c for c in self.conflicts(item) if self.key(c) < k]
        lower.sort(key=self.key)
        self.explored += 1
        return lower

    def contains(self, item) -> bool:
        memo = self.memo
        if item in memo:
            return memo[item]
        stack = [[item, self._lower(item), 0]]
        while stack:
            frame = stack[-1]
            it, lower, i = frame
            pending = None
            decided = None
            while i < len(lower):
                r = memo.get(lower[i])
                if r is None:
                    pending = lower[i]
                    break
                if r:
                    decided = False
                    break
                i += 1
            frame[2] = i
            if pending is None:
                memo[it] = True if decided is None else False
                stack.pop()
                continue
            if len(stack) >= self.max_depth:
                raise LocalDepthError(f"exploration depth exceeded {self.max_depth}")
            stack.append([pending, self._lower(pending), 0])
        return memo[item]


# -- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class LcaConfig:
    """Parameters of the degree filter and the phased matching oracle.

    Attributes:
        eps: accuracy parameter (drives the asymptotic formulas).
        degree_sample_count: k, vertices sampled per degree estimate.
        degree_cutoff: vertices with estimated G'-degree above this are removed.
        phase_count: number of augmentation phases (1 = random-greedy maximal matching).
        seed: base seed for ranks and degree samples.
    """

    eps: float
    degree_sample_count: int
    degree_cutoff: float
    phase_count: int
    seed: int = 0

    def __post_init__(self):
        if self.phase_count < 1:
            raise ValueError("phase_count must be at least 1")
        if self.degree_sample_count < 1:
            raise ValueError("degree_sample_count must be positive")

    @classmethod
    def faithful(cls, n: int, eps: float, seed: int = 0) -> "LcaConfig":
        lg = math.log2(max(n, 2))
        k = math.ceil(100 * n ** (1 - eps**3) * lg**2)
        return cls(eps, k, n ** (eps**3) * lg**2, math.ceil(1 / eps), seed)

    @classmethod
    def practical(cls, n: int, eps: float = 0.1, phase_count: int = 1, seed: int = 0,
                  degree_sample_count: int | None = None,
                  degree_cutoff: float | None = None) -> "LcaConfig":
        """Cutoff keeps the asymptotic shape; k is ``ceil(sqrt(n) * log2 n)``."""
        lg = math.log2(max(n, 2))
        k = degree_sample_count or max(1, math.ceil(math.sqrt(n) * lg))
        cutoff = degree_cutoff if degree_cutoff is not None else n ** (eps**3) * lg**2
        return cls(eps, k, cutoff, phase_count, seed)


# -- degree estimation ---------------------------------------------------------


def estimate_degree_gprime(session: OracleSession, state: EdcsState, v: int, config: LcaConfig) -> float:
    """n * X / k, X = sampled vertices that are G'-neighbors of ``v``.

    The sample depends only on (seed, v), never on call order.  Matrix model:
    one pair query per sample unless v's row is already cached.  List model:
    v's row is read once (cached) and samples are checked against it.
    """
    n = session.n
    k = config.degree_sample_count
    if n < 2:
        return 0.0
    rng = np.random.default_rng(derive_seed(config.seed, _TAG_DEGREE, v))
    us = rng.integers(0, n, size=k)
    us = us[us != v]
    if us.size == 0:
        return 0.0
    if session.model == "list" or session.row_cached(v):
        row = np.asarray(session.neighbor_row(v), dtype=np.int64)
        hit = np.isin(us, row)
    else:
        hit = session.pair_query_batch(np.full(us.size, v), us)
    cand = us[hit]
    if cand.size:
        deg = state.h_degree
        under = deg[v] + deg[cand] < state.params.threshold
        in_h = np.fromiter((int(u) in state.h_adjacency[v] for u in cand), dtype=bool, count=cand.size)
        x = int(np.count_nonzero(under | in_h))
    else:
        x = 0
    return n * x / k


# -- the phased matching oracle ----------------------------------------------


class LcaOracle:
    """Seed-determined approximate matching of the filtered G' or G''.

    All caches (rows in the session, degree estimates, MIS memos) live for
    one logical run; build a new oracle when V_mid changes.
    """

    def __init__(self, session: OracleSession, state: EdcsState, config: LcaConfig,
                 selector: str = "G'", v_mid: np.ndarray | None = None):
        if selector not in SELECTORS:
            raise ValueError(f"selector must be one of {SELECTORS}")
        self.session = session
        self.state = state
        self.config = config
        self.selector = selector
        low, mid = state.bands()
        self.v_low = low
        self.v_mid = mid if v_mid is None else np.asarray(v_mid, dtype=bool)
        self.n = session.n
        self._deg_est: dict[int, float] = {}
        self._nbrs: dict[int, list[int]] = {}
        self._paths: dict[tuple[int, int], list[tuple]] = {}
        self._mate: dict[tuple[int, int], int] = {}
        self._keys: dict[tuple, tuple] = {}
        depth = max(self.n, 1) * config.phase_count + 16
        self._mis = [None] + [
            GreedyMIS(self._key_fn(i), self._conflicts_fn(i), depth)
            for i in range(1, config.phase_count + 1)
        ]

    # vertex and edge membership ------------------------------------------------

    def degree_estimate(self, v: int) -> float:
        est = self._deg_est.get(v)
        if est is None:
            est = self._deg_est[v] = estimate_degree_gprime(self.session, self.state, v, self.config)
        return est

    def in_band(self, v: int) -> bool:
        return self.selector == "G'" or bool(self.v_low[v] or self.v_mid[v])

    def retained(self, v: int) -> bool:
        return self.in_band(v) and self.degree_estimate(v) <= self.config.degree_cutoff

    def neighbors(self, v: int) -> list[int]:
        """Neighbors of ``v`` in the filtered derived graph (row read on first use)."""
        nb = self._nbrs.get(v)
        if nb is not None:
            return nb
        if not self.retained(v):
            nb = []
        else:
            st = self.state
            row = self.session.neighbor_row(v)
            if self.selector == "G''":
                want = self.v_mid if self.v_low[v] else self.v_low
                row = [u for u in row if want[u]]
            nb = [u for u in row if st.in_gprime(v, u) and self.retained(u)]
        self._nbrs[v] = nb
        return nb

    # matching ------------------------------------------------------------------------

    def _key_fn(self, phase: int):
        seed = self.config.seed
        keys = self._keys

        def key(path):
            k = keys.get(path)
            if k is None:
                k = keys[path] = (hash64(seed, phase, *path), path)
            return k
        return key

    def _conflicts_fn(self, phase: int):
        def conflicts(path):
            out = []
            for x in path:
                out.extend(self.paths_through(x, phase))
            return out
        return conflicts

    def mate(self, v: int, phase: int | None = None) -> int:
        """Partner of ``v`` in the phase-``phase`` matching (default: final), or -1."""
        phase = self.config.phase_count if phase is None else phase
        if phase == 0:
            return -1
        key = (v, phase)
        m = self._mate.get(key)
        if m is None:
            path = self.selected_path(v, phase)
            if path is None:
                m = self.mate(v, phase - 1)
            else:
                j = path.index(v)
                m = path[j + 1] if j % 2 == 0 else path[j - 1]
            self._mate[key] = m
        return m

    def matched(self, v: int) -> bool:
        return self.mate(v) >= 0

    def selected_path(self, v: int, phase: int):
        mis = self._mis[phase]
        for p in sorted(self.paths_through(v, phase), key=mis.key):
            if mis.contains(p):
                return p
        return None

    def paths_through(self, v: int, phase: int) -> list[tuple]:
        """Augmenting paths of length 2*phase - 1 (w.r.t. the previous phase) through ``v``.

        Paths are vertex tuples oriented so that the first endpoint is the smaller id.
        """
        key = (v, phase)
        got = self._paths.get(key)
        if got is not None:
            return got
        length = 2 * phase - 1
        prev = phase - 1
        m = self.mate(v, prev)
        out = []
        if m < 0:
            for half in self._half_paths(v, length, {v}, prev):
                out.append(_canonical(half))
        else:
            for a in range(1, length - 1, 2):
                b = length - 1 - a
                for hv in self._half_paths(v, a, {v, m}, prev):
                    used = set(hv)
                    used.add(m)
                    for hm in self._half_paths(m, b, used, prev):
                        out.append(_canonical(hv[::-1] + hm))
        out = sorted(set(out))
        self._paths[key] = out
        return out

    def _half_paths(self, start: int, length: int, banned: set, prev: int) -> list[list[int]]:
        """Alternating paths from ``start`` of odd ``length`` that begin with an
        unmatched edge and end at a free vertex, avoiding ``banned``."""
        results = []
        stack = [(start, [start], length)]
        while stack:
            x, path, left = stack.pop()
            for y in self.neighbors(x):
                if y in banned or y in path or self.mate(x, prev) == y:
                    continue
                my = self.mate(y, prev)
                if left == 1:
                    if my < 0:
                        results.append(path + [y])
                    continue
                if my < 0 or my in banned or my in path:
                    continue
                stack.append((my, path + [y, my], left - 2))
        return results

    # diagnostics -------------------------------------------------------------

    def matching_edges(self, vertices: Iterable[int] | None = None) -> set[tuple[int, int]]:
        vs = range(self.n) if vertices is None else vertices
        out = set()
        for v in vs:
            m = self.mate(v)
            if m >= 0:
                out.add((min(v, m), max(v, m)))
        return out

    def filtered_edges(self) -> np.ndarray:
        """Edges of the filtered derived graph (full enumeration; validation only)."""
        out = [(v, u) for v in range(self.n) for u in self.neighbors(v) if v < u]
        return np.asarray(out, dtype=np.int64).reshape(-1, 2)

    @property
    def explored(self) -> int:
        return sum(m.explored for m in self._mis[1:])


def _canonical(path: list[int]) -> tuple:
    return tuple(path) if path[0] < path[-1] else tuple(reversed(path))


def lca_matched(session: OracleSession, state: EdcsState, v: int, config: LcaConfig,
                selector: str = "G'", oracle: LcaOracle | None = None) -> bool:
    """Whether ``v`` is matched; pass ``oracle`` to share caches across calls in one run."""
    if oracle is None:
        oracle = LcaOracle(session, state, config, selector)
    return oracle.matched(v)


def is_vertex_in_A(session: OracleSession, state: EdcsState, v: int, config: LcaConfig,
                   oracle: LcaOracle | None = None) -> str:
    """"A", "B" or "not-mid" for the G'' matching (``oracle`` must use selector G'')."""
    if oracle is None:
        oracle = LcaOracle(session, state, config, "G''")
    if not oracle.v_mid[v]:
        return "not-mid"
    return "B" if oracle.matched(v) else "A"


# -- random-greedy maximal matching with virtual dummies -----------------------------


class VirtualGraphOracle:
    """A derived graph given by a neighbor function, plus optional virtual dummies.

    Args:
        n: number of real vertices.
        neighbors: real neighbor list of a vertex in the derived graph.
        dummy_count: number of degree-one dummy neighbors attached to a vertex
            (0 for most vertices).  Dummies are never materialised; the dummy
            side of owner ``x`` is represented by the id ``-1 - x``.
    """

    def __init__(self, n: int, neighbors: Callable[[int], Iterable[int]],
                 dummy_count: Callable[[int], int] | None = None):
        self.n = n
        self._neighbors = neighbors
        self._dummy_count = dummy_count or (lambda v: 0)
        self._cache: dict[int, list[int]] = {}
        self.runs: dict[int, "RgmmRun"] = {}

    @classmethod
    def from_graph(cls, graph, dummy_count=None) -> "VirtualGraphOracle":
        return cls(graph.n, lambda v: graph.neighbors(v).tolist(), dummy_count)

    def neighbors(self, v: int) -> list[int]:
        nb = self._cache.get(v)
        if nb is None:
            nb = self._cache[v] = list(self._neighbors(v))
        return nb

    def dummy_count(self, v: int) -> int:
        return int(self._dummy_count(v))


class RgmmRun:
    """One logical run (oracle + seed) of the local random-greedy maximal matching."""

    def __init__(self, oracle: VirtualGraphOracle, seed: int):
        self.oracle = oracle
        self.seed = seed
        self._dummy_rank: dict[int, int] = {}
        self._edges_at: dict[int, list[tuple]] = {}
        self.mis = GreedyMIS(self.key, self.conflicts, max(oracle.n, 1) + 1)

    def dummy_rank(self, owner: int) -> int | None:
        """Lowest rank among the owner's dummy edges (only that one can ever be chosen)."""
        if owner not in self._dummy_rank:
            kappa = self.oracle.dummy_count(owner)
            if kappa <= 0:
                self._dummy_rank[owner] = None
            else:
                j = np.arange(kappa, dtype=np.uint64)
                h = hash64_array(self.seed, np.full(kappa, _TAG_DUMMY, np.uint64),
                                 np.full(kappa, owner, np.uint64), j)
                self._dummy_rank[owner] = int(h.min())
        return self._dummy_rank[owner]

    def key(self, edge: tuple) -> tuple:
        u, v = edge
        if v < 0:
            return (self.dummy_rank(u), 1, u, 0)
        return (hash64(self.seed, u, v), 0, u, v)

    def edges_at(self, v: int) -> list[tuple]:
        out = self._edges_at.get(v)
        if out is None:
            out = [(min(v, u), max(v, u)) for u in self.oracle.neighbors(v)]
            if self.dummy_rank(v) is not None:
                out.append((v, -1 - v))
            out.sort(key=self.key)
            self._edges_at[v] = out
        return out

    def conflicts(self, edge: tuple) -> list[tuple]:
        u, v = edge
        return self.edges_at(u) if v < 0 else self.edges_at(u) + self.edges_at(v)

    def matched_edge(self, v: int):
        for e in self.edges_at(v):
            if self.mis.contains(e):
                return e
        return None

    def matched(self, v: int) -> bool:
        return self.matched_edge(v) is not None

    def partner(self, v: int) -> int | None:
        """Real partner id, -1 for a dummy partner, None when unmatched."""
        e = self.matched_edge(v)
        if e is None:
            return None
        if e[1] < 0:
            return -1
        return e[1] if e[0] == v else e[0]


def rgmm_local_matched(oracle: VirtualGraphOracle, v: int, seed: int) -> bool:
    """Whether ``v`` is matched in the random-greedy maximal matching under ``seed``.

    Memoisation is scoped to the (oracle, seed) pair, i.e. one logical run.
    """
    run = _run_for(oracle, seed)
    return run.matched(v)


def _run_for(oracle: VirtualGraphOracle, seed: int) -> RgmmRun:
    run = oracle.runs.get(seed)
    if run is None:
        run = oracle.runs[seed] = RgmmRun(oracle, seed)
    return run


def rgmm_global_virtual(oracle: VirtualGraphOracle, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Global simulation with every dummy edge materialised (validation only).

    Returns (matched mask over real vertices, real mate array with -1 for
    unmatched and -2 for a dummy partner).
    """
    n = oracle.n
    items = []
    for u in range(n):
        for v in oracle.neighbors(u):
            if u < v:
                items.append(((hash64(seed, u, v), 0, u, v), u, v))
        kappa = oracle.dummy_count(u)
        for j in range(kappa):
            items.append(((hash64(seed, _TAG_DUMMY, u, j), 1, u, 0), u, -1))
    items.sort(key=lambda t: t[0])
    mate = np.full(n, -1, dtype=np.int64)
    for _, u, v in items:
        if mate[u] != -1:
            continue
        if v == -1:
            mate[u] = -2
        elif mate[v] == -1:
            mate[u], mate[v] = v, u
    return mate != -1, mate
