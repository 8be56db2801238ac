import csv
import io
import math
import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dctlearn.chordal import is_chordal
from dctlearn.genbench import (
    AGGREGATE_FIELDS,
    RECORD_FIELDS,
    GenConfig,
    _dfs_order,
    aggregates_csv,
    gen_er_moral,
    gen_tree_like,
    generate,
    ic_ratio,
    records_csv,
    run_benchmark,
)
from dctlearn.meek import essential_graph
from dctlearn.mvis import mvis_dct


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig("grid", 5)
    with pytest.raises(ValueError):
        GenConfig("er-moral", 1)
    with pytest.raises(ValueError):
        GenConfig("er-moral", 5, rho=0)
    with pytest.raises(ValueError):
        GenConfig("tree-like", 5, extra="both")
    GenConfig("er-moral", 5, rho=1.0)


def test_n2_is_a_single_arc():
    for seed in range(10):
        d = gen_er_moral(2, seed=seed)
        assert len(d.arcs) == 1
        assert len(gen_tree_like(2, seed).arcs) == 1


def test_tree_like_small_shape():
    # five vertices are the root and its four children
    d = gen_tree_like(5, seed=0)
    assert {(0, c) for c in range(1, 5)} <= d.arcs


def test_tree_like_keeps_tree_arcs():
    d = gen_tree_like(40, seed=3)
    for i in range(40):
        for c in range(4 * i + 1, min(4 * i + 5, 40)):
            assert d.has_arc(i, c)


def test_leaf_extra_edges_join_leaves():
    n = 21
    base = {(i, c) for i in range(n) for c in range(4 * i + 1, min(4 * i + 5, n))}
    leaves = {v for v in range(n) if 4 * v + 1 >= n}
    d = gen_tree_like(n, seed=1, extra="leaf")
    extra = {a for a in d.arcs if a not in base}
    assert extra
    # fill-in may add more, but some extra edge must be leaf to leaf
    assert any(u in leaves and v in leaves for u, v in extra)


def test_dfs_order_is_topological():
    arcs = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]
    order = _dfs_order(5, arcs)
    pos = {v: i for i, v in enumerate(order)}
    assert order[0] == 0 and all(pos[u] < pos[v] for u, v in arcs)


@given(st.sampled_from(["er-moral", "tree-like"]), st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_generators_deterministic_and_valid(family, n, seed):
    cfg = GenConfig(family, n, seed=seed)
    d = generate(cfg)
    assert d == generate(cfg)
    g = d.skeleton()
    assert d.n == n and g.is_connected() and is_chordal(g)[0]
    assert essential_graph(d).arcs == set()


def test_tree_like_mvis_small_at_100():
    sizes = [mvis_dct(gen_tree_like(100, s)).size for s in range(100)]
    assert statistics.median(sizes) < 10


def test_ic_ratio():
    assert ic_ratio(6, 3) == (2.0, False)
    assert ic_ratio(0, 0) == (1.0, True)


def test_empty_policy_list_gives_headers_only():
    recs, aggs = run_benchmark(["er-moral"], [6], [], 3)
    assert recs == [] and aggs == []
    assert records_csv(recs) == ",".join(RECORD_FIELDS) + "\n"
    assert aggregates_csv(aggs) == ",".join(AGGREGATE_FIELDS) + "\n"


def test_unknown_policy_rejected():
    with pytest.raises(ValueError):
        run_benchmark(["er-moral"], [6], ["greedy"], 1)


def test_k_trials_give_k_records_and_one_aggregate():
    recs, aggs = run_benchmark(["tree-like"], [12], ["dct"], 5, seed=9)
    assert len(recs) == 5 and len(aggs) == 1
    assert aggs[0]["trials"] == 5
    assert aggs[0]["max_ic_ratio"] >= aggs[0]["mean_ic_ratio"] >= 1


def _strip_time(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        r.pop("wall_time_ms", None)
        r.pop("mean_time_ms", None)
    return rows


def test_benchmark_deterministic_and_independent_of_jobs():
    args = (["er-moral", "tree-like"], [8, 14], ["dct", "nd-random", "random"], 3)
    a = run_benchmark(*args, seed=4)
    b = run_benchmark(*args, seed=4, jobs=2)
    assert _strip_time(records_csv(a[0])) == _strip_time(records_csv(b[0]))
    assert _strip_time(aggregates_csv(a[1])) == _strip_time(aggregates_csv(b[1]))
    c = run_benchmark(*args, seed=5)
    assert _strip_time(records_csv(a[0])) != _strip_time(records_csv(c[0]))


def test_record_invariants():
    recs, _ = run_benchmark(["er-moral", "tree-like"], [6, 15], ["dct", "nd-random", "random"], 6, seed=1)
    for r in recs:
        assert not r.flag.startswith("error")
        assert r.ic_ratio >= 1 and r.interventions >= r.lower_bound
        assert r.interventions >= r.mvis_size and not math.isnan(r.ic_ratio)
    expected = [
        (f, n, f"{f}-n{n}-t{t}", p)
        for f in ("er-moral", "tree-like") for n in (6, 15) for t in range(6)
        for p in ("dct", "nd-random", "random")
    ]
    assert [(r.family, r.n, r.graph_id, r.policy) for r in recs] == expected


def test_csv_layout():
    recs, aggs = run_benchmark(["er-moral"], [5], ["dct"], 2, seed=0)
    text = records_csv(recs)
    assert text.startswith(",".join(RECORD_FIELDS) + "\n") and "\r" not in text
    assert RECORD_FIELDS[:10] == [
        "graph_id", "family", "n", "policy", "interventions",
        "mvis_size", "lower_bound", "ic_ratio", "seed", "wall_time_ms",
    ]
    assert aggregates_csv(aggs).splitlines()[0] == "family,n,policy,mean_ic_ratio,max_ic_ratio,mean_time_ms,trials"
