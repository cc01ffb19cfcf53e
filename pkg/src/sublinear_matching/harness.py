"""Experiment drivers: query-scaling benchmarks and the random-walk distinguisher."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimators import (BeyondConfig, EstimateReport, TwoThirdsConfig, estimate_beyond_two_thirds,
                         estimate_two_thirds)
from .exact import hopcroft_karp
from .graph import Graph, OracleSession
from .hashing import derive_seed
from .instances import TRUTHS, gen_gnm, gen_lower_bound

BENCH_HEADER = ("n", "trial", "queries_list", "queries_pair", "estimate", "mu_exact")
ALGORITHMS = ("two-thirds", "beyond")


def build_config(algorithm: str, n: int, seed: int, params: dict | None = None,
                 mode: str = "additive"):
    """Estimator config from a JSON-style override dict.

    ``params`` may carry ``"preset": "faithful"`` to start from the asymptotic
    constants; every other key is passed as a practical override.
    """
    params = dict(params or {})
    preset = params.pop("preset", "practical")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    if preset == "faithful":
        if params:
            raise ValueError("the faithful preset takes no overrides")
        if algorithm == "two-thirds":
            return TwoThirdsConfig.faithful(n, seed=seed, mode=mode)
        return BeyondConfig.faithful(n, seed=seed)
    if preset != "practical":
        raise ValueError(f"unknown preset {preset!r}")
    try:
        if algorithm == "two-thirds":
            return TwoThirdsConfig.practical(n, seed=seed, mode=mode, **params)
        return BeyondConfig.practical(n, seed=seed, **params)
    except TypeError as exc:
        raise ValueError(f"bad parameter override: {exc}") from None


def run_estimator(graph: Graph, algorithm: str = "two-thirds", model: str = "matrix", seed: int = 0,
                  params: dict | None = None, mode: str = "additive") -> EstimateReport:
    session = OracleSession(graph, seed=seed, model=model)
    config = build_config(algorithm, graph.n, seed, params, mode)
    if algorithm == "two-thirds":
        return estimate_two_thirds(session, config)
    return estimate_beyond_two_thirds(session, config)


# -- benchmarks -----------------------------------------------------------------


def _bench_one(task) -> dict:
    n, trial, density, algorithm, model, seed, params = task
    gseed = derive_seed(seed, n, trial)
    g = gen_gnm(n, min(density * n, n * (n - 1) // 2), gseed)
    rep = run_estimator(g, algorithm, model, derive_seed(gseed, 1), params)
    return {"n": n, "trial": trial, "queries_list": rep.list_queries, "queries_pair": rep.pair_queries,
            "estimate": rep.estimate, "mu_exact": hopcroft_karp(g).size}


def run_bench(sizes, trials: int = 1, algorithm: str = "two-thirds", model: str = "matrix", seed: int = 0,
              params: dict | None = None, density: int = 10, workers: int = 1) -> list[dict]:
    """One row per (n, trial) on G(n, density * n)."""
    if trials < 1 or not sizes:
        raise ValueError("need at least one size and one trial")
    tasks = [(int(n), t, density, algorithm, model, seed, params) for n in sizes for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_bench_one, tasks))
    return [_bench_one(t) for t in tasks]


def write_bench_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_HEADER, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(row[k]) if isinstance(row[k], float) else row[k]) for k in BENCH_HEADER})


def read_bench_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{"n": int(r["n"]), "trial": int(r["trial"]), "queries_list": int(r["queries_list"]),
                 "queries_pair": int(r["queries_pair"]), "estimate": float(r["estimate"]),
                 "mu_exact": int(r["mu_exact"])} for r in csv.DictReader(fh)]


def fit_slope(rows: list[dict]) -> float:
    """Least-squares slope of log(median total queries) against log n."""
    by_n: dict[int, list[int]] = {}
    for r in rows:
        by_n.setdefault(int(r["n"]), []).append(int(r["queries_list"]) + int(r["queries_pair"]))
    if len(by_n) < 2:
        raise ValueError("need at least two sizes to fit a slope")
    ns = sorted(by_n)
    med = [float(np.median(by_n[n])) for n in ns]
    slope, _ = np.polyfit(np.log(ns), np.log(med), 1)
    return float(slope)


# -- distinguishability ---------------------------------------------------------


@dataclass
class AttackResult:
    guess: str
    violations: int
    walks: int
    list_queries: int


def random_walk_attack(session: OracleSession, public: np.ndarray, walk_len: int, walks: int) -> AttackResult:
    """Parity attack on a lower-bound instance.

    ``public`` holds the public part of every vertex (0 for A-or-B, 2 for S,
    3 for T).  Each walk starts at an A vertex (an A-or-B vertex without S
    neighbors, found by full scans), takes ``walk_len`` steps to uniformly
    random A-or-B neighbors (random list queries, rejecting S and T), and
    checks whether it ended at a B vertex.  Guess YES iff some walk did.
    """
    rng = session.rng
    cand = np.flatnonzero(public == 0)
    if cand.size == 0:
        raise ValueError("no A-or-B vertices")

    def is_a(v: int) -> bool:
        return not any(public[u] == 2 for u in session.neighbor_row(v))

    violations = 0
    for _ in range(walks):
        for _ in range(50 * cand.size):
            start = int(cand[rng.integers(cand.size)])
            if is_a(start):
                break
        else:
            raise ValueError("no A vertex found")
        cur = start
        for _ in range(walk_len):
            deg = session.degree(cur)
            while True:
                u = session.adj_list_query(cur, int(rng.integers(deg)) + 1)
                if public[u] == 0:
                    break
            cur = u
        if not is_a(cur):
            violations += 1
    return AttackResult("YES" if violations else "NO", violations, walks, session.list_queries)


def _distinguish_one(task) -> dict:
    variant, N, eps, d, walk_len, walks, seed, i = task
    tseed = derive_seed(seed, i)
    truth = TRUTHS[tseed & 1]
    inst = gen_lower_bound(N, eps, d, truth, variant, tseed)
    session = OracleSession(inst.graph, seed=derive_seed(tseed, 1), model="list")
    res = random_walk_attack(session, inst.public_part(), walk_len, walks)
    return {"trial": i, "truth": truth, "guess": res.guess, "violations": res.violations,
            "list_queries": res.list_queries}


def run_distinguish(variant: str, N: int, eps: float, d: int, trials: int, walk_len: int | None = None,
                    walks: int = 32, seed: int = 0, workers: int = 1) -> dict:
    """Accuracy of :func:`random_walk_attack` over ``trials`` instances with uniform truth."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if walks < 1:
        raise ValueError("walks must be at least 1")
    walk_len = 2 * d if walk_len is None else walk_len
    tasks = [(variant, N, eps, d, walk_len, walks, seed, i) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_distinguish_one, tasks))
    else:
        rows = [_distinguish_one(t) for t in tasks]
    correct = sum(r["truth"] == r["guess"] for r in rows)
    return {"variant": variant, "N": N, "eps": eps, "d": d, "walk_len": walk_len, "walks": walks,
            "trials": trials, "seed": seed, "correct": correct, "accuracy": correct / trials,
            "median_list_queries": float(np.median([r["list_queries"] for r in rows])),
            "per_trial": rows}


def default_d(N: int) -> int:
    return max(1, round(N ** 0.2))


def write_text(path, text: str) -> None:
    Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")

