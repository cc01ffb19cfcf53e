"""Instance generators: the two-sided lower-bound family, near-regular bipartite
graphs with forbidden pairs, and plain random graphs.

Lower-bound vertices are laid out in canonical blocks (A, B, S, T on side V,
then on side U), wired, and then relabelled by a random permutation so that
vertex ids carry no information about the hidden A/B split.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, load_graph, save_adjacency

PARTS = ("A", "B", "S", "T")
SIDES = ("V", "U")
VARIANTS = ("fixed", "broken")
TRUTHS = ("YES", "NO")


class GenerationError(RuntimeError):
    """Infeasible generation parameters or a sampler that failed to converge."""


# -- near-regular bipartite sampling ---------------------------------------


def sample_near_regular_bipartite(left_degrees, right_degrees, forbidden=(), seed=0,
                                  max_restarts: int = 100) -> np.ndarray:
    """Simple bipartite graph with exact degree targets that avoids ``forbidden``.

    Stubs are matched uniformly at random (configuration model); parallel edges
    and forbidden pairs are then repaired by random right-endpoint swaps with
    other edges.  Each attempt gets ``10 * |E|`` swaps before a restart.

    Returns an ``(m, 2)`` array of (left index, right index) pairs sorted by
    left index.  Raises :class:`GenerationError` after ``max_restarts`` failures.
    """
    left_degrees = np.asarray(left_degrees, dtype=np.int64)
    right_degrees = np.asarray(right_degrees, dtype=np.int64)
    if left_degrees.sum() != right_degrees.sum():
        raise GenerationError("left and right degree sums differ")
    if np.any(left_degrees < 0) or np.any(right_degrees < 0):
        raise GenerationError("negative degree target")
    nr = right_degrees.size
    if left_degrees.size and left_degrees.max() > nr:
        raise GenerationError("a left degree exceeds the number of right vertices")
    if right_degrees.size and right_degrees.max() > left_degrees.size:
        raise GenerationError("a right degree exceeds the number of left vertices")
    m = int(left_degrees.sum())
    if m == 0:
        return np.empty((0, 2), dtype=np.int64)
    forbid = {int(a) * nr + int(b) for a, b in forbidden}
    rng = np.random.default_rng(seed)
    left = np.repeat(np.arange(left_degrees.size), left_degrees)
    right_stubs = np.repeat(np.arange(nr), right_degrees)
    for _ in range(max_restarts):
        right = rng.permutation(right_stubs)
        if _repair(left, right, nr, forbid, rng, 10 * m):
            return np.stack([left, right], axis=1)
    raise GenerationError(f"swap repair did not converge after {max_restarts} restarts")


def _repair(left, right, nr, forbid, rng, budget) -> bool:
    keys = left * nr + right
    counts: dict[int, int] = {}
    for k in keys.tolist():
        counts[k] = counts.get(k, 0) + 1

    def bad(i):
        k = int(keys[i])
        return counts[k] > 1 or k in forbid

    pending = [i for i in range(keys.size) if bad(i)]
    m = keys.size
    while pending:
        i = pending.pop()
        if not bad(i):
            continue
        while True:
            if budget <= 0:
                return False
            budget -= 1
            j = int(rng.integers(m))
            if j == i:
                continue
            ki = int(left[i]) * nr + int(right[j])
            kj = int(left[j]) * nr + int(right[i])
            if ki == kj or ki in forbid or kj in forbid or ki in counts or kj in counts:
                continue
            for old in (int(keys[i]), int(keys[j])):
                counts[old] -= 1
                if counts[old] == 0:
                    del counts[old]
            right[i], right[j] = right[j], right[i]
            keys[i], keys[j] = ki, kj
            counts[ki] = 1
            counts[kj] = 1
            break
    return True


def _rows_by_left(edges: np.ndarray, n_left: int, deg: int) -> np.ndarray:
    if deg == 0:
        return np.empty((n_left, 0), dtype=np.int64)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[order, 1].reshape(n_left, deg)


def _rows_by_right(edges: np.ndarray, n_right: int, deg: int) -> np.ndarray:
    if deg == 0:
        return np.empty((n_right, 0), dtype=np.int64)
    order = np.lexsort((edges[:, 0], edges[:, 1]))
    return edges[order, 0].reshape(n_right, deg)


# -- lower-bound instances --------------------------------------------------


@dataclass(frozen=True)
class LowerBoundParams:
    N: int
    eps: float
    d: int
    truth: str
    variant: str
    seed: int

    def sizes(self) -> dict[str, int]:
        eN = _integral(self.eps * self.N, "eps*N")
        if self.variant == "fixed":
            return {"A": self.N - eN, "B": self.N, "S": self.N, "T": eN}
        return {"A": self.N, "B": self.N, "S": self.N, "T": eN}


def _integral(x: float, what: str) -> int:
    k = round(x)
    if abs(x - k) > 1e-9:
        raise GenerationError(f"{what} = {x} is not an integer")
    return int(k)


@dataclass
class LowerBoundInstance:
    """A generated instance with its hidden labels.

    ``part[v]`` indexes PARTS, ``side[v]`` indexes SIDES.  Estimators may see
    :meth:`public_part` (S, T, or A-or-B) but never ``part`` itself.
    """

    graph: Graph
    part: np.ndarray
    side: np.ndarray
    params: LowerBoundParams
    # Block members in canonical (same-index) order; unavailable after loading.
    canonical: dict | None = field(default=None, repr=False)

    @property
    def truth(self) -> str:
        return self.params.truth

    def vertices(self, part: str, side: str | None = None) -> np.ndarray:
        mask = self.part == PARTS.index(part)
        if side is not None:
            mask &= self.side == SIDES.index(side)
        return np.flatnonzero(mask)

    def label(self, v: int) -> str:
        return PARTS[self.part[v]] + "_" + SIDES[self.side[v]]

    def public_part(self) -> np.ndarray:
        """Per-vertex public label: 0 for A-or-B, 2 for S, 3 for T."""
        pub = self.part.copy()
        pub[pub == 1] = 0
        return pub

    def expected_degrees(self) -> np.ndarray:
        """Degrees predicted by the construction, per vertex."""
        p = self.params
        sz = p.sizes()
        eN, d = sz["T"], p.d
        if p.variant == "fixed":
            by_part = [eN + d + 1, eN + d + 1, eN + 1, 3 * p.N - eN]
        else:
            a_deg = eN + d + (1 if p.truth == "YES" else 0)
            by_part = [a_deg, eN + d + 1, eN + 1, 3 * p.N]
        return np.asarray(by_part, dtype=np.int64)[self.part]

    def witness_matching(self) -> np.ndarray:
        """The A-A plus B-S matching, as an (k, 2) edge array (YES instances only)."""
        if self.truth != "YES":
            raise ValueError("witness matching exists only for YES instances")
        pairs = [(self._block("A", "V"), self._block("A", "U")),
                 (self._block("B", "V"), self._block("S", "U")),
                 (self._block("B", "U"), self._block("S", "V"))]
        return np.concatenate([np.stack([a, b], axis=1) for a, b in pairs])

    def cover(self) -> np.ndarray:
        """Boolean mask of B and T vertices (a vertex cover of every NO instance)."""
        return (self.part == 1) | (self.part == 3)

    def _block(self, part: str, side: str) -> np.ndarray:
        if self.canonical is None:
            raise ValueError("canonical index order is not stored for loaded instances")
        return self.canonical[PARTS.index(part), SIDES.index(side)]

    def save(self, prefix) -> list[Path]:
        """Write ``prefix.adj`` (adjacency, order preserved), ``prefix.labels`` and
        ``prefix.json`` (manifest)."""
        prefix = Path(prefix)
        paths = [prefix.with_suffix(".adj"), prefix.with_suffix(".labels"), prefix.with_suffix(".json")]
        save_adjacency(self.graph, paths[0])
        with open(paths[1], "w", encoding="utf-8") as fh:
            fh.write("vertex label side\n")
            for v in range(self.graph.n):
                fh.write(f"{v} {PARTS[self.part[v]]} {SIDES[self.side[v]]}\n")
        manifest = {"kind": "lowerbound", **asdict(self.params), "n": self.graph.n, "m": self.graph.m,
                    "graph": paths[0].name, "labels": paths[1].name}
        paths[2].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return paths


def load_instance(manifest_path) -> LowerBoundInstance:
    manifest_path = Path(manifest_path)
    meta = json.loads(manifest_path.read_text(encoding="utf-8"))
    params = LowerBoundParams(**{k: meta[k] for k in ("N", "eps", "d", "truth", "variant", "seed")})
    rows = [line.split() for line in
            (manifest_path.parent / meta["labels"]).read_text(encoding="utf-8").splitlines()[1:]]
    part = np.array([PARTS.index(r[1]) for r in rows], dtype=np.int8)
    side = np.array([SIDES.index(r[2]) for r in rows], dtype=np.int8)
    graph = load_graph(manifest_path.parent / meta["graph"], bipartition=side)
    return LowerBoundInstance(graph, part, side, params)


def gen_lower_bound(N: int, eps: float, d: int, truth: str = "YES", variant: str = "fixed",
                    seed: int = 0) -> LowerBoundInstance:
    """Generate one lower-bound instance.

    Raises :class:`GenerationError` on non-integral part sizes, ``eps*d < 1``
    (fixed variant), ``d > eps*N``, or a sampler failure.
    """
    if truth not in TRUTHS:
        raise ValueError(f"truth must be one of {TRUTHS}")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if N < 1 or d < 1 or not 0 < eps < 1:
        raise GenerationError("need N >= 1, d >= 1 and 0 < eps < 1")
    params = LowerBoundParams(int(N), float(eps), int(d), truth, variant, int(seed))
    sz = params.sizes()
    eN = sz["T"]
    if d > eN:
        raise GenerationError(f"d = {d} exceeds eps*N = {eN}")
    ss = np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss.spawn(1)[0])
    if variant == "fixed":
        ed = _integral(eps * d, "eps*d")
        if ed < 1:
            raise GenerationError("eps*d must be at least 1")
        return _gen_fixed(params, sz, ed, rng)
    return _gen_broken(params, sz, rng)


def _layout(sz: dict[str, int]):
    # Canonical ids: side V blocks A,B,S,T then side U blocks A,B,S,T.
    start = {}
    pos = 0
    for s in SIDES:
        for p in PARTS:
            start[p, s] = pos
            pos += sz[p]
    return start, pos


def _sub_seed(rng) -> int:
    return int(rng.integers(1 << 62))


def _gen_fixed(params, sz, ed, rng) -> LowerBoundInstance:
    N, d, eN, aN = params.N, params.d, sz["T"], sz["A"]
    start, n = _layout(sz)

    def ids(p, s, idx=None):
        base = start[p, s]
        return base + (np.arange(sz[p]) if idx is None else idx)

    yes = params.truth == "YES"
    # R(A_V, B_U) and R(B_V, A_U): A side degree d, B side (1-eps)d, no same index.
    forbidden = [(i, i) for i in range(aN)]
    r_ab = [sample_near_regular_bipartite(np.full(aN, d), np.full(N, d - ed), forbidden, _sub_seed(rng))
            for _ in range(2)]
    # R(B_V, B_U): (eps*d - 1)-regular avoiding same-index pairs.
    r_bb = sample_near_regular_bipartite(np.full(N, ed - 1), np.full(N, ed - 1),
                                         [(i, i) for i in range(N)], _sub_seed(rng))
    idxA = np.arange(aN)
    rows = {}
    for s, o in ((0, 1), (1, 0)):
        S_, O_ = SIDES[s], SIDES[o]
        r_a_own = r_ab[s]  # A on side s paired with B on side o
        r_b_own = r_ab[o]  # A on side o paired with B on side s
        t_other = np.broadcast_to(ids("T", O_), (1, eN))
        # A rows: T_other, R-neighbors in B_other, truth partner.
        a_partner = ids("A", O_) if yes else ids("B", O_, idxA)
        rows["A", S_] = np.hstack([np.broadcast_to(t_other, (aN, eN)),
                                   ids("B", O_, _rows_by_left(r_a_own, aN, d)),
                                   a_partner[:, None]])
        # B rows: T_other, S partner, B-B noise, A neighbors, same-index/truth partner.
        bb = _rows_by_left(r_bb, N, ed - 1) if s == 0 else _rows_by_right(r_bb, N, ed - 1)
        last = ids("B", O_).copy()
        if not yes:
            last[:aN] = ids("A", O_, idxA)
        rows["B", S_] = np.hstack([np.broadcast_to(t_other, (N, eN)),
                                   ids("S", O_)[:, None],
                                   ids("B", O_, bb),
                                   ids("A", O_, _rows_by_right(r_b_own, N, d - ed)),
                                   last[:, None]])
        rows["S", S_] = np.hstack([np.broadcast_to(t_other, (N, eN)), ids("B", O_)[:, None]])
        rows["T", S_] = np.broadcast_to(np.concatenate([ids("A", O_), ids("B", O_), ids("S", O_)]),
                                        (eN, 3 * N - eN))
    return _assemble(params, sz, start, n, rows, rng)


def _gen_broken(params, sz, rng) -> LowerBoundInstance:
    N, d, eN = params.N, params.d, sz["T"]
    start, n = _layout(sz)

    def ids(p, s, idx=None):
        return start[p, s] + (np.arange(sz[p]) if idx is None else idx)

    yes = params.truth == "YES"
    r_ab = [sample_near_regular_bipartite(np.full(N, d), np.full(N, d), (), _sub_seed(rng)) for _ in range(2)]
    rows = {}
    for s, o in ((0, 1), (1, 0)):
        S_, O_ = SIDES[s], SIDES[o]
        t_other = ids("T", O_)
        a_parts = [np.broadcast_to(t_other, (N, eN)), ids("B", O_, _rows_by_left(r_ab[s], N, d))]
        if yes:
            a_parts.append(ids("A", O_)[:, None])
        rows["A", S_] = np.hstack(a_parts)
        rows["B", S_] = np.hstack([np.broadcast_to(t_other, (N, eN)), ids("S", O_)[:, None],
                                   ids("A", O_, _rows_by_right(r_ab[o], N, d))])
        rows["S", S_] = np.hstack([np.broadcast_to(t_other, (N, eN)), ids("B", O_)[:, None]])
        rows["T", S_] = np.broadcast_to(np.concatenate([ids("A", O_), ids("B", O_), ids("S", O_)]),
                                        (eN, 3 * N))
    return _assemble(params, sz, start, n, rows, rng)


def _assemble(params, sz, start, n, rows, rng) -> LowerBoundInstance:
    """Shuffle every row, relabel all vertices by a random permutation, build CSR."""
    part = np.empty(n, dtype=np.int8)
    side = np.empty(n, dtype=np.int8)
    blocks = []
    for si, s in enumerate(SIDES):
        for pi, p in enumerate(PARTS):
            part[start[p, s]:start[p, s] + sz[p]] = pi
            side[start[p, s]:start[p, s] + sz[p]] = si
            blocks.append(rows[p, s])
    perm = rng.permutation(n)  # canonical id -> public id
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    deg_canon = np.concatenate([np.full(b.shape[0], b.shape[1], dtype=np.int64) for b in blocks])
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg_canon[inv], out=indptr[1:])
    indices = np.empty(int(indptr[-1]), dtype=np.int32)
    # Each block is written to the positions of its (relabelled) vertices.
    offset = 0
    for b in blocks:
        k = b.shape[0]
        if k == 0:
            continue
        shuffled = rng.permuted(perm[b], axis=1).astype(np.int32)
        new_ids = perm[offset:offset + k]
        pos = indptr[new_ids][:, None] + np.arange(b.shape[1])
        indices[pos] = shuffled
        offset += k
    graph = Graph(n, indptr, indices, bipartition=side[inv], validate=False)
    canonical = {(pi, si): perm[start[p, s]:start[p, s] + sz[p]]
                 for pi, p in enumerate(PARTS) for si, s in enumerate(SIDES)}
    return LowerBoundInstance(graph, part[inv], side[inv], params, canonical)


# -- generic random graphs ------------------------------------------------------


def gen_gnm(n: int, m: int, seed: int = 0) -> Graph:
    """Uniform simple graph with exactly ``m`` edges; adjacency order is random."""
    total = n * (n - 1) // 2
    if m < 0 or m > total:
        raise ValueError(f"m must lie in [0, {total}]")
    rng = np.random.default_rng(seed)
    if m > total // 3 or total <= 100_000:
        pick = rng.choice(total, size=m, replace=False)
        u, v = _unrank_pairs(pick, n)
    else:
        keys = np.empty(0, dtype=np.int64)
        while keys.size < m:
            a = rng.integers(0, n, size=2 * (m - keys.size) + 16)
            b = rng.integers(0, n, size=a.size)
            ok = a != b
            k = np.minimum(a, b)[ok] * n + np.maximum(a, b)[ok]
            keys = np.concatenate([keys, k])
            _, first = np.unique(keys, return_index=True)
            keys = keys[np.sort(first)]
        keys = keys[:m]
        u, v = keys // n, keys % n
    g = Graph.from_edges(n, np.stack([u, v], axis=1), validate=False)
    return shuffle_adjacency(g, seed + 1)


def _unrank_pairs(ranks: np.ndarray, n: int):
    # Rank r over pairs (u < v) in row-major order.
    ranks = np.asarray(ranks, dtype=np.int64)
    row_start = np.concatenate([[0], np.cumsum(np.arange(n - 1, 0, -1))])
    u = np.searchsorted(row_start, ranks, side="right") - 1
    v = ranks - row_start[u] + u + 1
    return u, v


def gen_random_bipartite(n_left: int, n_right: int, edge_prob: float, seed: int = 0) -> Graph:
    """Bipartite Erdos-Renyi graph; left ids ``0..n_left-1``, right ids after them."""
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    total = n_left * n_right
    m = int(rng.binomial(total, edge_prob)) if total else 0
    pick = np.sort(rng.choice(total, size=m, replace=False)) if m < total else np.arange(total)
    u, v = pick // max(n_right, 1), n_left + pick % max(n_right, 1)
    side = np.concatenate([np.zeros(n_left, np.int8), np.ones(n_right, np.int8)])
    g = Graph.from_edges(n_left + n_right, np.stack([u, v], axis=1), bipartition=side, validate=False)
    return shuffle_adjacency(g, seed + 1)


def gen_bipartite_gnm(n_left: int, n_right: int, m: int, seed: int = 0) -> Graph:
    """Bipartite graph with exactly ``m`` uniformly chosen edges."""
    total = n_left * n_right
    if not 0 <= m <= total:
        raise ValueError(f"m must lie in [0, {total}]")
    rng = np.random.default_rng(seed)
    pick = rng.choice(total, size=m, replace=False)
    u, v = pick // max(n_right, 1), n_left + pick % max(n_right, 1)
    side = np.concatenate([np.zeros(n_left, np.int8), np.ones(n_right, np.int8)])
    g = Graph.from_edges(n_left + n_right, np.stack([u, v], axis=1), bipartition=side, validate=False)
    return shuffle_adjacency(g, seed + 1)


def perfect_matching_graph(n: int, seed: int = 0) -> Graph:
    """``n/2`` disjoint edges on randomly paired vertices (bipartition attached)."""
    if n % 2:
        raise ValueError("n must be even")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    u, v = perm[: n // 2], perm[n // 2:]
    side = np.zeros(n, dtype=np.int8)
    side[v] = 1
    return Graph.from_edges(n, np.stack([u, v], axis=1), bipartition=side)


def shuffle_adjacency(graph: Graph, seed: int = 0) -> Graph:
    """Same graph with every adjacency list independently and uniformly permuted."""
    rng = np.random.default_rng(seed)
    owner = np.repeat(np.arange(graph.n), graph.degrees())
    order = np.lexsort((rng.random(owner.size), owner))
    return graph.with_adjacency_order(graph.indices[order])
