"""Ground-truth matching algorithms on fully materialised graphs.

These run with unrestricted access to the graph and are used to check the
sublinear estimators at desk scale: exact maximum matching (bipartite and
general), greedy and random-greedy maximal matching, and vertex-cover
certificates for the bipartite case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_bipartite_matching

from .graph import Graph
from .hashing import hash64_array


@dataclass(frozen=True)
class MatchingView:
    """A matching over ``n`` vertices, stored as a mate array (-1 = unmatched)."""

    mate: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "MatchingView":
        mate = np.full(n, -1, dtype=np.int64)
        for u, v in edges:
            if mate[u] != -1 or mate[v] != -1 or u == v:
                raise ValueError(f"edge ({u}, {v}) shares an endpoint with the matching")
            mate[u], mate[v] = v, u
        return cls(mate)

    @property
    def n(self) -> int:
        return int(self.mate.shape[0])

    @property
    def matched(self) -> np.ndarray:
        return self.mate >= 0

    @property
    def edges(self) -> set[tuple[int, int]]:
        idx = np.flatnonzero(self.mate > np.arange(self.n))
        return {(int(u), int(self.mate[u])) for u in idx}

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.mate >= 0)) // 2

    def __len__(self) -> int:
        return self.size

    def edge_array(self) -> np.ndarray:
        idx = np.flatnonzero(self.mate > np.arange(self.n))
        return np.stack([idx, self.mate[idx]], axis=1)

    def is_valid_for(self, graph: Graph) -> bool:
        """Symmetric mates and every matched pair is an edge of ``graph``."""
        mate = self.mate
        if mate.shape != (graph.n,):
            return False
        idx = np.flatnonzero(mate >= 0)
        if np.any(mate[mate[idx]] != idx):
            return False
        e = self.edge_array()
        return bool(graph.has_edges(e[:, 0], e[:, 1]).all()) if len(e) else True

    def to_lines(self) -> list[str]:
        return [f"{u} {v}" for u, v in sorted(self.edges)]


# -- exact maximum matching ------------------------------------------------


def _bipartite_matching(graph: Graph, side: np.ndarray) -> MatchingView:
    left = np.flatnonzero(side == 0)
    right = np.flatnonzero(side == 1)
    pos = np.empty(graph.n, dtype=np.int64)
    pos[left] = np.arange(left.size)
    pos[right] = np.arange(right.size)
    src = np.repeat(np.arange(graph.n), graph.degrees())
    dst = graph.indices.astype(np.int64)
    sel = side[src] == 0
    biadj = csr_matrix(
        (np.ones(int(sel.sum()), dtype=np.int8), (pos[src[sel]], pos[dst[sel]])),
        shape=(left.size, right.size),
    )
    col_of_row = maximum_bipartite_matching(biadj, perm_type="column")
    mate = np.full(graph.n, -1, dtype=np.int64)
    hit = np.flatnonzero(col_of_row >= 0)
    mate[left[hit]] = right[col_of_row[hit]]
    mate[right[col_of_row[hit]]] = left[hit]
    return MatchingView(mate)


def _blossom_matching(graph: Graph) -> MatchingView:
    """Edmonds' blossom algorithm (BFS with base contraction) from a greedy start."""
    n = graph.n
    adj = graph.adjacency
    match = [-1] * n
    for u in range(n):
        if match[u] == -1:
            for v in adj[u]:
                if match[v] == -1:
                    match[u], match[v] = v, u
                    break
    return _augment_all(n, adj, match)


def _augment_all(n: int, adj: list[list[int]], match: list[int]) -> MatchingView:
    # A vertex with no augmenting path now never gets one later, so one pass suffices.
    for root in range(n):
        if match[root] != -1 or not adj[root]:
            continue
        end, parent = _blossom_search(root, adj, match)
        v = end
        while v != -1:
            pv = parent[v]
            ppv = match[pv]
            match[v], match[pv] = pv, v
            v = ppv
    return MatchingView(np.asarray(match, dtype=np.int64))


def _blossom_search(root: int, adj: list[list[int]], match: list[int]):
    used = {root}
    parent: dict[int, int] = {}
    base: dict[int, int] = {}
    tree = [root]
    queue = [root]

    def b(x):
        return base.get(x, x)

    def lca(a, c):
        seen = set()
        while True:
            a = b(a)
            seen.add(a)
            if match[a] == -1:
                break
            a = parent[match[a]]
        while True:
            c = b(c)
            if c in seen:
                return c
            c = parent[match[c]]

    def mark(v, blossom_base, child, blossom):
        while b(v) != blossom_base:
            blossom.add(b(v))
            blossom.add(b(match[v]))
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for to in adj[v]:
            if b(v) == b(to) or match[v] == to:
                continue
            if to == root or (match[to] != -1 and match[to] in parent):
                cur = lca(v, to)
                blossom: set[int] = set()
                mark(v, cur, to, blossom)
                mark(to, cur, v, blossom)
                for i in tree:
                    if b(i) in blossom:
                        base[i] = cur
                        if i not in used:
                            used.add(i)
                            queue.append(i)
            elif to not in parent:
                parent[to] = v
                tree.append(to)
                if match[to] == -1:
                    return to, parent
                nxt = match[to]
                used.add(nxt)
                tree.append(nxt)
                queue.append(nxt)
    return -1, parent


def hopcroft_karp(graph: Graph) -> MatchingView:
    """Maximum matching of ``graph``.

    Bipartite graphs (stored bipartition, or one found by 2-coloring) use
    scipy's Hopcroft-Karp; anything else falls back to Edmonds' blossom
    algorithm, which is exact but pure Python.
    """
    side = graph.two_coloring()
    if side is not None:
        return _bipartite_matching(graph, np.asarray(side))
    return _blossom_matching(graph)


maximum_matching = hopcroft_karp


def konig_cover(graph: Graph, matching: MatchingView, side=None) -> np.ndarray:
    """Minimum vertex cover of a bipartite graph from a maximum matching.

    Z = vertices reachable from free left vertices by alternating paths;
    the cover is (L minus Z) together with (R intersect Z).  Returns a boolean mask.
    """
    side = graph.two_coloring() if side is None else np.asarray(side)
    if side is None:
        raise ValueError("Konig cover needs a bipartite graph")
    n = graph.n
    mate = matching.mate
    src = np.repeat(np.arange(n), graph.degrees())
    dst = graph.indices.astype(np.int64)
    sel = side[src] == 0
    rs = np.flatnonzero((side == 1) & (mate >= 0))
    free_left = np.flatnonzero((side == 0) & (mate < 0))
    rows = np.concatenate([src[sel], rs, np.full(free_left.size, n)])
    cols = np.concatenate([dst[sel], mate[rs], free_left])
    directed = csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n + 1, n + 1))
    reach = np.zeros(n + 1, dtype=bool)
    reach[breadth_first_order(directed, n, directed=True, return_predecessors=False)] = True
    reach = reach[:n]
    return ((side == 0) & ~reach) | ((side == 1) & reach)


def verify_vertex_cover(graph: Graph, cover) -> bool:
    """True iff every edge has at least one endpoint in ``cover`` (mask or vertex set)."""
    if not isinstance(cover, np.ndarray):
        cover = np.fromiter(cover, dtype=np.int64)
    if cover.dtype != bool:
        mask = np.zeros(graph.n, dtype=bool)
        mask[cover.astype(np.int64)] = True
        cover = mask
    src = np.repeat(np.arange(graph.n), graph.degrees())
    return bool(np.all(cover[src] | cover[graph.indices]))


def greedy_maximal_matching(edges: Iterable[tuple[int, int]], n: int) -> MatchingView:
    """Scan ``edges`` in order, taking an edge iff both endpoints are still free."""
    mate = [-1] * n
    for u, v in edges:
        if u != v and mate[u] == -1 and mate[v] == -1:
            mate[u], mate[v] = v, u
    return MatchingView(np.asarray(mate, dtype=np.int64))


def edge_order(graph: Graph, seed: int) -> np.ndarray:
    """Edges of ``graph`` sorted by rank hash64(seed, min, max), ties by (min, max)."""
    e = graph.edges()
    if len(e) == 0:
        return e
    ranks = hash64_array(seed, e[:, 0], e[:, 1])
    return e[np.lexsort((e[:, 1], e[:, 0], ranks))]


def rgmm_global(graph: Graph, seed: int) -> MatchingView:
    """Random-greedy maximal matching under the keyed-hash edge ranks."""
    return greedy_maximal_matching(edge_order(graph, seed).tolist(), graph.n)
