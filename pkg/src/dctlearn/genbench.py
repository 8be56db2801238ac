"""Random moral DAG families, the ic-ratio metric and the benchmark harness."""
from __future__ import annotations

import csv
import io
import logging
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .chordal import elimination_chordalize, is_chordal
from .dct import check_moral
from .graphs import Dag, UndirectedGraph
from .meek import essential_graph
from .mvis import lower_bound, mvis_dct
from .policy import POLICIES, Oracle

log = logging.getLogger(__name__)

FAMILIES = ("er-moral", "tree-like")
DEFAULT_RHO = 0.25


@dataclass(frozen=True)
class GenConfig:
    family: str
    n: int
    rho: float = DEFAULT_RHO
    seed: int = 0
    extra: str = "uniform"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        if self.extra not in ("uniform", "leaf"):
            raise ValueError("extra must be 'uniform' or 'leaf'")


def _orient_by(g: UndirectedGraph, order: Sequence[int]) -> Dag:
    pos = {v: i for i, v in enumerate(order)}
    return Dag(g.n, ((u, v) if pos[u] < pos[v] else (v, u) for u, v in g.edges))


def _check_output(d: Dag) -> Dag:
    g = d.skeleton()
    assert g.is_connected(), "generator produced a disconnected graph"
    assert is_chordal(g)[0], "generator produced a non-chordal skeleton"
    check_moral(d)
    return d


def gen_er_moral(n: int, rho: float = DEFAULT_RHO, seed=None) -> Dag:
    """Connected Erdos-Renyi style DAG made moral by triangulation.

    Each vertex after the first in a random order gets
    ``max(1, Binomial(k - 1, rho))`` parents among the earlier ones, where
    ``k`` is its 1-based position. The skeleton is then triangulated by
    eliminating vertices in reverse order, and every edge points forward.

    Examples
    --------
    >>> gen_er_moral(2, seed=0).arcs == {(0, 1)} or gen_er_moral(2, seed=0).arcs == {(1, 0)}
    True
    """
    GenConfig("er-moral", n, rho)
    rng = np.random.default_rng(seed)
    sigma = [int(v) for v in rng.permutation(n)]
    edges = []
    for k in range(1, n):
        indeg = max(1, int(rng.binomial(k, rho)))
        for j in rng.choice(k, size=indeg, replace=False):
            edges.append((sigma[int(j)], sigma[k]))
    g = elimination_chordalize(UndirectedGraph(n, edges), sigma[::-1])
    return _check_output(_orient_by(g, sigma))


def _dfs_order(n: int, arcs: Iterable[tuple[int, int]], root: int = 0) -> list[int]:
    # reverse postorder of a DFS from the root, children by increasing id
    ch: list[list[int]] = [[] for _ in range(n)]
    for u, v in arcs:
        ch[u].append(v)
    for c in ch:
        c.sort()
    seen = [False] * n
    post = []
    for start in [root, *range(n)]:
        if seen[start]:
            continue
        seen[start] = True
        stack = [(start, iter(ch[start]))]
        while stack:
            v, it = stack[-1]
            nxt = next((w for w in it if not seen[w]), None)
            if nxt is None:
                stack.pop()
                post.append(v)
            else:
                seen[nxt] = True
                stack.append((nxt, iter(ch[nxt])))
    return post[::-1]


def gen_tree_like(n: int, seed=None, extra: str = "uniform") -> Dag:
    """Directed 4-ary tree plus a few extra edges, triangulated.

    Vertex ``i`` has children ``4i + 1`` to ``4i + 4``. Between two and
    five extra edges join random non-adjacent pairs (``extra="leaf"``
    restricts them to leaves) and point from the smaller id to the larger,
    which keeps the graph acyclic. The skeleton is triangulated along the
    reverse of a DFS topological order and all edges follow that order.
    """
    GenConfig("tree-like", n, extra=extra)
    rng = np.random.default_rng(seed)
    arcs = {(i, c) for i in range(n) for c in range(4 * i + 1, min(4 * i + 5, n))}
    pool = range(n) if extra == "uniform" else [v for v in range(n) if 4 * v + 1 >= n]
    free = [
        (u, v) for u in pool for v in pool
        if u < v and (u, v) not in arcs
    ]
    r = int(rng.integers(2, 6))
    for idx in sorted(rng.choice(len(free), size=min(r, len(free)), replace=False)):
        arcs.add(free[int(idx)])
    order = _dfs_order(n, arcs)
    g = elimination_chordalize(UndirectedGraph(n, arcs), order[::-1])
    return _check_output(_orient_by(g, order))


def generate(cfg: GenConfig) -> Dag:
    if cfg.family == "er-moral":
        return gen_er_moral(cfg.n, cfg.rho, cfg.seed)
    return gen_tree_like(cfg.n, cfg.seed, cfg.extra)


def ic_ratio(used: int, m: int) -> tuple[float, bool]:
    """Interventions over the optimum; ``(1.0, True)`` when the optimum is zero."""
    if m == 0:
        return 1.0, True
    return used / m, False


@dataclass
class BenchRecord:
    graph_id: str
    family: str
    n: int
    policy: str
    interventions: int
    mvis_size: int
    lower_bound: int
    ic_ratio: float
    seed: int
    wall_time_ms: float
    flag: str = ""


RECORD_FIELDS = [f.name for f in fields(BenchRecord)]
AGGREGATE_FIELDS = ["family", "n", "policy", "mean_ic_ratio", "max_ic_ratio", "mean_time_ms", "trials"]


def _seed_for(master: int, *key: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=key).generate_state(1)[0])


def _run_trial(item) -> list[BenchRecord]:
    family, fam_idx, n, trial, policies, master, rho, extra = item
    gid = f"{family}-n{n}-t{trial}"
    gseed = _seed_for(master, fam_idx, n, trial, 0)
    try:
        d = generate(GenConfig(family, n, rho, gseed, extra))
        m = mvis_dct(d).size
        lb = lower_bound(essential_graph(d))
    except Exception as exc:  # recorded, the sweep goes on
        log.error("%s: generation failed: %s", gid, exc)
        return [BenchRecord(gid, family, n, p, -1, -1, -1, float("nan"), gseed, 0.0, f"error: {exc}") for p in policies]
    out = []
    for k, name in enumerate(policies, start=1):
        pseed = _seed_for(master, fam_idx, n, trial, k)
        t0 = time.perf_counter()
        try:
            o = Oracle(d)
            used = POLICIES[name](o, pseed).total
            if not o.matches_truth():
                raise RuntimeError("policy stopped before orienting the graph")
        except Exception as exc:
            log.error("%s/%s: %s", gid, name, exc)
            out.append(BenchRecord(gid, family, n, name, -1, m, lb, float("nan"), pseed, 0.0, f"error: {exc}"))
            continue
        ms = (time.perf_counter() - t0) * 1000
        ratio, zero = ic_ratio(used, m)
        out.append(BenchRecord(gid, family, n, name, used, m, lb, ratio, pseed, round(ms, 3), "m=0" if zero else ""))
    return out


def aggregate(records: Iterable[BenchRecord]) -> list[dict]:
    groups: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        if not r.flag.startswith("error"):
            groups.setdefault((r.family, r.n, r.policy), []).append(r)
    rows = []
    for (family, n, policy), rs in groups.items():
        ratios = [r.ic_ratio for r in rs]
        rows.append({
            "family": family,
            "n": n,
            "policy": policy,
            "mean_ic_ratio": float(np.mean(ratios)),
            "max_ic_ratio": float(np.max(ratios)),
            "mean_time_ms": float(np.mean([r.wall_time_ms for r in rs])),
            "trials": len(rs),
        })
    return rows


def run_benchmark(
    families: Sequence[str],
    sizes: Sequence[int],
    policies: Sequence[str],
    trials: int,
    seed: int = 0,
    rho: float = DEFAULT_RHO,
    extra: str = "uniform",
    jobs: int = 1,
) -> tuple[list[BenchRecord], list[dict]]:
    """Run every policy on freshly generated graphs.

    Graph and policy seeds derive from `seed` and the position of the run
    in the sweep, so results do not depend on `jobs`.

    Returns
    -------
    records : list of BenchRecord
        In (family, n, trial, policy) order.
    aggregates : list of dict
        Mean and max ic-ratio per (family, n, policy).
    """
    unknown = [p for p in policies if p not in POLICIES]
    if unknown:
        raise ValueError(f"unknown policies: {unknown}")
    for f in families:
        GenConfig(f, 2)
    items = [
        (f, FAMILIES.index(f), n, t, tuple(policies), seed, rho, extra)
        for f in families for n in sizes for t in range(trials)
    ]
    if not policies:
        return [], []
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            chunks = list(ex.map(_run_trial, items))
    else:
        chunks = [_run_trial(it) for it in items]
    records = [r for chunk in chunks for r in chunk]
    return records, aggregate(records)


def records_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, RECORD_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(asdict(r))
    return buf.getvalue()


def aggregates_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, AGGREGATE_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
