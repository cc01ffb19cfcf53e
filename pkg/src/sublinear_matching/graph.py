"""Static simple graphs and query-counted oracle access to them.

A :class:`Graph` stores per-vertex neighbor arrays in CSR form (the stored
order *is* the adjacency-list order seen by list queries) plus a sorted index
of unordered pairs for O(log m) edge lookups.  Algorithms never touch the
graph directly; they go through an :class:`OracleSession`, which counts every
list and pair query.
"""

from __future__ import annotations

import math
from collections import deque
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MODELS = ("matrix", "list")


class GraphFormatError(ValueError):
    """Malformed graph file; the message names the offending line."""


def _csr_gather(indptr: np.ndarray, indices: np.ndarray, vertices: np.ndarray):
    """Return (owner, neighbor) arrays for all adjacency entries of ``vertices``."""
    starts = indptr[vertices]
    counts = indptr[vertices + 1] - starts
    total = int(counts.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    owner = np.repeat(vertices, counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return owner, indices[np.repeat(starts, counts) + offsets].astype(np.int64)


class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Args:
        n: vertex count.
        indptr, indices: CSR arrays; ``indices[indptr[v]:indptr[v+1]]`` is the
            adjacency list of ``v`` in stored order.
        bipartition: optional array of sides (0/1) per vertex.
        validate: run the full invariant scan (symmetry, no loops, no
            duplicates, bipartition respected).
    """

    def __init__(self, n: int, indptr, indices, bipartition=None, validate: bool = True):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int32)
        if self.indptr.shape != (self.n + 1,):
            raise ValueError("indptr must have length n + 1")
        self.bipartition = None if bipartition is None else np.asarray(bipartition, dtype=np.int8)
        self._keys: np.ndarray | None = None
        if validate:
            self.validate()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges, bipartition=None, validate: bool = True) -> "Graph":
        """Build from an edge sequence; each adjacency list follows edge order."""
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        m = arr.shape[0]
        if m and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        src = np.concatenate([arr[:, 0], arr[:, 1]])
        dst = np.concatenate([arr[:, 1], arr[:, 0]])
        eidx = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((eidx, src))
        counts = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, indptr, dst[order], bipartition=bipartition, validate=validate)

    @classmethod
    def from_adjacency(cls, lists: Sequence[Sequence[int]], bipartition=None,
                       validate: bool = True) -> "Graph":
        n = len(lists)
        counts = np.fromiter((len(a) for a in lists), dtype=np.int64, count=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        flat = np.fromiter((u for a in lists for u in a), dtype=np.int64, count=int(indptr[-1]))
        return cls(n, indptr, flat, bipartition=bipartition, validate=validate)

    def with_adjacency_order(self, indices) -> "Graph":
        """Same vertex set and bipartition, new per-vertex neighbor order."""
        return Graph(self.n, self.indptr, indices, bipartition=self.bipartition, validate=False)

    # -- basic access -----------------------------------------------------

    @property
    def m(self) -> int:
        return int(self.indptr[-1]) // 2

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    @property
    def average_degree(self) -> float:
        return 2 * self.m / self.n if self.n else 0.0

    def edges(self) -> np.ndarray:
        """All edges as an (m, 2) array with ``u < v``, sorted lexicographically."""
        keys = self.edge_keys
        return np.stack([keys // self.n, keys % self.n], axis=1) if self.n else np.empty((0, 2), np.int64)

    @property
    def edge_keys(self) -> np.ndarray:
        """Sorted ``min * n + max`` keys, one per edge (the edge-existence index)."""
        if self._keys is None:
            src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
            dst = self.indices.astype(np.int64)
            mask = src < dst
            self._keys = np.sort(src[mask] * self.n + dst[mask])
        return self._keys

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        a, b = (u, v) if u < v else (v, u)
        key = a * self.n + b
        keys = self.edge_keys
        i = int(np.searchsorted(keys, key))
        return i < keys.shape[0] and int(keys[i]) == key

    def has_edges(self, us, vs) -> np.ndarray:
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        keys = np.minimum(us, vs) * self.n + np.maximum(us, vs)
        idx = np.searchsorted(self.edge_keys, keys)
        idx = np.minimum(idx, max(self.edge_keys.shape[0] - 1, 0))
        if self.edge_keys.shape[0] == 0:
            return np.zeros(us.shape, dtype=bool)
        return (self.edge_keys[idx] == keys) & (us != vs)

    # -- structure --------------------------------------------------------

    def validate(self) -> None:
        """Full-scan check of the simple-undirected-graph invariants."""
        n = self.n
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n):
            raise ValueError("neighbor id out of range")
        src = np.repeat(np.arange(n, dtype=np.int64), self.degrees())
        dst = self.indices.astype(np.int64)
        if np.any(src == dst):
            v = int(src[np.argmax(src == dst)])
            raise ValueError(f"self-loop at vertex {v}")
        fwd = np.sort(src * n + dst)
        if fwd.size > 1 and np.any(fwd[1:] == fwd[:-1]):
            k = int(fwd[1:][fwd[1:] == fwd[:-1]][0])
            raise ValueError(f"duplicate neighbor {k % n} of vertex {k // n}")
        if not np.array_equal(fwd, np.sort(dst * n + src)):
            raise ValueError("adjacency is not symmetric")
        if self.bipartition is not None:
            if self.bipartition.shape != (n,):
                raise ValueError("bipartition must assign a side to every vertex")
            if np.any(self.bipartition[src] == self.bipartition[dst]):
                raise ValueError("edge inside one side of the bipartition")

    def two_coloring(self) -> np.ndarray | None:
        """Sides (0/1) from the stored bipartition or a BFS 2-coloring; None if odd cycle."""
        if self.bipartition is not None:
            return self.bipartition
        color = np.full(self.n, -1, dtype=np.int8)
        for root in range(self.n):
            if color[root] >= 0:
                continue
            color[root] = 0
            frontier = np.array([root], dtype=np.int64)
            while frontier.size:
                owner, nbrs = _csr_gather(self.indptr, self.indices, frontier)
                fresh = color[nbrs] < 0
                color[nbrs[fresh]] = 1 - color[owner[fresh]]
                frontier = np.unique(nbrs[fresh])
        src = np.repeat(np.arange(self.n), self.degrees())
        if np.any(color[src] == color[self.indices]):
            return None
        return color

    def induced_edges(self, keep: np.ndarray) -> np.ndarray:
        e = self.edges()
        return e[keep[e[:, 0]] & keep[e[:, 1]]] if len(e) else e

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, bipartite={self.bipartition is not None})"


class OracleSession:
    """Query-counted access to a graph in the adjacency-list or adjacency-matrix model.

    Every entry point increments exactly the documented counter.  Two sessions
    over the same graph and seed give identical answers and random draws for
    identical call sequences.
    """

    def __init__(self, graph: Graph, seed: int = 0, model: str = "matrix"):
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
        self.graph = graph
        self.seed = int(seed)
        self.model = model
        self.list_queries = 0
        self.pair_queries = 0
        self.rng = np.random.default_rng(self.seed)
        self._rows: dict[int, list[int]] = {}
        self._row_sets: dict[int, frozenset] = {}
        self._degrees: dict[int, int] = {}

    @property
    def n(self) -> int:
        return self.graph.n

    def _check(self, v: int) -> None:
        if not 0 <= v < self.graph.n:
            raise ValueError(f"vertex {v} out of range [0, {self.graph.n})")

    # -- raw oracle queries -----------------------------------------------

    def adj_list_query(self, v: int, i: int) -> int | None:
        """The ``i``-th (1-based) stored neighbor of ``v``, or None past the end."""
        self._check(v)
        self.list_queries += 1
        g = self.graph
        pos = g.indptr[v] + i - 1
        if i < 1 or pos >= g.indptr[v + 1]:
            return None
        return int(g.indices[pos])

    def adj_list_query_batch(self, vs, idx) -> np.ndarray:
        """Vectorised list queries; -1 marks an empty answer.  Charges one per entry."""
        vs = np.asarray(vs, dtype=np.int64)
        idx = np.asarray(idx, dtype=np.int64)
        self.list_queries += int(vs.size)
        g = self.graph
        pos = g.indptr[vs] + idx - 1
        ok = (idx >= 1) & (pos < g.indptr[vs + 1])
        out = np.full(vs.shape, -1, dtype=np.int64)
        out[ok] = g.indices[pos[ok]]
        return out

    def pair_query(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        if u == v:
            raise ValueError("pair query needs two distinct vertices")
        self.pair_queries += 1
        return self.graph.has_edge(u, v)

    def pair_query_batch(self, us, vs) -> np.ndarray:
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if np.any(us == vs):
            raise ValueError("pair query needs two distinct vertices")
        self.pair_queries += int(us.size)
        return self.graph.has_edges(us, vs)

    def degree(self, v: int) -> int:
        """deg(v), charged as a binary search over the list: ceil(log2 n) + 1 list queries.

        Cached per session; only the first call for a vertex is charged.
        """
        self._check(v)
        d = self._degrees.get(v)
        if d is None:
            self.list_queries += self.degree_cost
            d = self._degrees[v] = self.graph.degree(v)
        return d

    @property
    def degree_cost(self) -> int:
        return math.ceil(math.log2(self.graph.n)) + 1 if self.graph.n > 1 else 1

    def all_degrees(self) -> np.ndarray:
        """Degrees of every vertex through :meth:`degree` (charged per uncached vertex)."""
        missing = self.graph.n - len(self._degrees)
        self.list_queries += missing * self.degree_cost
        degs = self.graph.degrees()
        for v in range(self.graph.n):
            self._degrees.setdefault(v, int(degs[v]))
        return degs

    def query_counts(self) -> tuple[int, int]:
        return self.list_queries, self.pair_queries

    # -- cached whole-row reads ---------------------------------------------

    def neighbor_row(self, v: int) -> list[int]:
        """Read the full neighborhood of ``v`` once per session.

        Matrix model: n - 1 pair queries (one per other vertex).  List model:
        deg(v) + 1 list queries (read until the empty answer).
        """
        row = self._rows.get(v)
        if row is None:
            self._check(v)
            if self.model == "matrix":
                self.pair_queries += self.graph.n - 1
            else:
                self.list_queries += self.graph.degree(v) + 1
                self._degrees.setdefault(v, self.graph.degree(v))
            row = self._rows[v] = self.graph.neighbors(v).tolist()
        return row

    def neighbor_set(self, v: int) -> frozenset:
        s = self._row_sets.get(v)
        if s is None:
            s = self._row_sets[v] = frozenset(self.neighbor_row(v))
        return s

    def row_cached(self, v: int) -> bool:
        return v in self._rows

    def edge_exists(self, u: int, v: int) -> bool:
        """Edge test that reuses cached rows; otherwise a pair query (matrix) or a
        row read of the lower-degree endpoint (list)."""
        if u in self._rows:
            return v in self.neighbor_set(u)
        if v in self._rows:
            return u in self.neighbor_set(v)
        if self.model == "matrix":
            return self.pair_query(u, v)
        w, x = (u, v) if self.degree(u) <= self.degree(v) else (v, u)
        return x in self.neighbor_set(w)

    @property
    def rows_read(self) -> int:
        return len(self._rows)


# -- file formats ---------------------------------------------------------


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"malformed integer {tok!r} at line {lineno}") from None


def load_edge_list(path) -> Graph:
    """Parse the ``n`` / ``u v`` edge-list format.  Adjacency order follows file order."""
    n = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 1:
                    raise GraphFormatError(f"expected vertex count at line {lineno}")
                n = _parse_int(parts[0], lineno)
                if n < 0:
                    raise GraphFormatError(f"negative vertex count at line {lineno}")
                continue
            if len(parts) != 2:
                raise GraphFormatError(f"malformed edge line at line {lineno}")
            u, v = _parse_int(parts[0], lineno), _parse_int(parts[1], lineno)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"vertex id out of range at line {lineno}")
            if u == v:
                raise GraphFormatError(f"self-loop at line {lineno}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphFormatError(f"duplicate edge {key} at line {lineno}")
            seen.add(key)
            edges.append((u, v))
    if n is None:
        raise GraphFormatError("missing vertex count header at line 1")
    return Graph.from_edges(n, edges, validate=False)


def save_edge_list(graph: Graph, path) -> None:
    lines = [str(graph.n)]
    lines.extend(f"{u} {v}" for u, v in graph.edges().tolist())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


ADJ_HEADER = "adjacency"


def save_adjacency(graph: Graph, path) -> None:
    """One line per vertex listing its neighbors in stored order (bit-reproducible)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{ADJ_HEADER} {graph.n}\n")
        for v in range(graph.n):
            fh.write(" ".join(map(str, graph.neighbors(v).tolist())))
            fh.write("\n")


def load_adjacency(path, bipartition=None) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != ADJ_HEADER:
            raise GraphFormatError("expected 'adjacency <n>' header at line 1")
        n = _parse_int(header[1], 1)
        lists = []
        for lineno, raw in enumerate(fh, start=2):
            if len(lists) == n:
                if raw.strip():
                    raise GraphFormatError(f"extra content at line {lineno}")
                continue
            lists.append([_parse_int(t, lineno) for t in raw.split()])
    if len(lists) != n:
        raise GraphFormatError(f"expected {n} adjacency lines, found {len(lists)}")
    try:
        return Graph.from_adjacency(lists, bipartition=bipartition)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def load_graph(path, bipartition=None) -> Graph:
    """Load either format, sniffing the first non-comment token."""
    with open(path, "r", encoding="utf-8") as fh:
        first = ""
        for raw in fh:
            if raw.strip() and not raw.lstrip().startswith("#"):
                first = raw.split()[0]
                break
    if first == ADJ_HEADER:
        return load_adjacency(path, bipartition=bipartition)
    g = load_edge_list(path)
    if bipartition is not None:
        g = Graph(g.n, g.indptr, g.indices, bipartition=bipartition)
    return g


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    return Graph.from_edges(a + b, edges, bipartition=[0] * a + [1] * b)


def disjoint_edges(k: int) -> Graph:
    return Graph.from_edges(2 * k, [(2 * i, 2 * i + 1) for i in range(k)])


def star(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)],
                            bipartition=[0] + [1] * leaves)


def bfs_component(graph: Graph, root: int) -> list[int]:
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in graph.neighbors(v).tolist():
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return sorted(seen)


def iter_edges(graph: Graph) -> Iterable[tuple[int, int]]:
    return map(tuple, graph.edges().tolist())
