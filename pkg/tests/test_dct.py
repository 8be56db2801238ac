import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, settings

from dctlearn.chordal import CliqueTree, clique_tree, maximal_cliques, weighted_clique_graph
from dctlearn.dct import (
    Cdct,
    DirectedCliqueTree,
    NotMoralError,
    arrowhead,
    construct_cdct,
    contract,
    directed_clique_graph,
    directed_clique_tree,
    intersection_comparable,
    moral_components,
    residual_essential_graph,
    residual_sets,
    residuals,
)
from dctlearn.graphs import Dag, GraphError, parse_graph
from dctlearn.meek import meek_closure
from conftest import FIXTURES
from oracles import brute_all_mvis, covered_edges, min_vertex_cover_size, random_chordal_moral_dag
from strategies import moral_dags

PATH = Dag(3, [(0, 1), (1, 2)])
K3 = Dag(3, [(0, 1), (0, 2), (1, 2)])

# DAGs on which plain conflict-free Kruskal split a covered arc across residuals
REGRESSIONS = [
    Dag(5, [(1, 0), (1, 2), (1, 3), (1, 4), (3, 0), (4, 3)]),
    Dag(6, [(2, 0), (2, 1), (2, 3), (2, 4), (2, 5), (3, 4), (5, 3)]),
]


def load(name):
    return parse_graph((FIXTURES / "figures" / f"{name}.txt").read_text()).to_dag()


def connected(d):
    return d.n > 0 and d.skeleton().is_connected()


def all_clique_trees(d, limit=6):
    """Every maximum-weight spanning tree of the clique intersection graph."""
    cs = maximal_cliques(d.skeleton())
    if len(cs) > limit:
        return []
    w = weighted_clique_graph(cs)
    best, out = -1, []
    for tree in itertools.combinations(sorted(w), len(cs) - 1):
        g = nx.Graph(tree)
        g.add_nodes_from(range(len(cs)))
        if not nx.is_tree(g):
            continue
        total = sum(w[e] for e in tree)
        if total > best:
            best, out = total, [tree]
        elif total == best:
            out.append(tree)
    return [CliqueTree(cs, t) for t in out]


def test_path_dct():
    t = directed_clique_tree(PATH)
    assert [sorted(c) for c in t.cliques] == [[0, 1], [1, 2]]
    assert t.kind(0, 1) == "->" and t.kind(1, 0) == "<-"


def test_single_clique():
    t, c = construct_cdct(K3)
    assert t.edges == [] and len(c.components) == 1
    assert residual_sets(c) == [frozenset({0, 1, 2})]
    assert residual_essential_graph(K3, c).arcs == set()


def test_alternate_clique_trees_of_the_example():
    d = load("dct_example")
    trees = all_clique_trees(d)
    assert len(trees) == 2
    kinds = sorted(
        tuple(sorted((e, directed_clique_tree(d, t).kind(*e)) for e in t.edges)) for t in trees
    )
    # one tree joins {2,3,4} and {2,5,6} by a bidirected edge, the other
    # hangs {2,5,6} straight off {1,2,3}
    assert ((1, 2), "<->") in kinds[1] and ((0, 2), "->") in kinds[0]
    assert all(not directed_clique_tree(d, t).undirected_edges for t in trees)


def test_tree_skeleton_cdct_points_away_from_root():
    # rooted tree 0 -> {1, 2}, 1 -> {3, 4}
    d = Dag(5, [(0, 1), (0, 2), (1, 3), (1, 4)])
    t, c = construct_cdct(d)
    # the root's cliques {0,1} and {0,2} meet in {0} and form one node
    assert c.is_tree() and t.bidirected_edges == [(0, 1)]
    roots = [b for b in range(len(c.components)) if not c.parents(b)]
    assert len(roots) == 1 and 0 in c.vertex_sets[roots[0]]
    rs = residual_sets(c)
    assert rs[roots[0]] == c.vertex_sets[roots[0]]
    assert all(len(r) == 1 for b, r in enumerate(rs) if b != roots[0])


def test_naive_tree_can_conflict_and_construction_avoids_it():
    d = load("conflicting_sources")
    trees = [directed_clique_tree(d, t) for t in all_clique_trees(d)]
    conflicted = [t for t in trees if t.conflicting_sources()]
    assert conflicted and len(conflicted) < len(trees)
    assert contract(conflicted[0]).max_in_degree() == 2
    with pytest.raises(GraphError):
        residual_sets(contract(conflicted[0]))
    t, c = construct_cdct(d)
    assert not t.conflicting_sources() and c.is_tree()


def test_contract_degenerate_cases():
    t = directed_clique_tree(PATH)
    c = contract(t)
    assert c.components == (frozenset({0}), frozenset({1})) and c.edges == ((0, 1),)
    # K4 minus an edge: {0,1,2} <-> {0,1,3} when 0, 1 precede 2 and 3
    d = Dag(4, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
    c = contract(directed_clique_tree(d))
    assert len(c.components) == 1 and c.vertex_sets[0] == frozenset(range(4))


def test_path_residuals_and_residual_essential_graph():
    _, c = construct_cdct(PATH)
    rs = residuals(c, PATH)
    assert [sorted(r.vertices) for r in rs] == [[0, 1], [2]]
    assert rs[1].parent == 0 and rs[0].parent is None
    assert rs[0].subdag.arcs == {(0, 1)}
    e = residual_essential_graph(PATH, c)
    assert e.arcs == {(1, 2)} and e.undirected_edges == [(0, 1)]
    assert meek_closure(e) == e


def test_non_moral_input_rejected():
    collider = Dag(3, [(0, 2), (1, 2)])
    for f in (directed_clique_tree, directed_clique_graph, construct_cdct):
        with pytest.raises(NotMoralError):
            f(collider)


def test_disconnected_input_rejected():
    with pytest.raises(GraphError):
        construct_cdct(Dag(4, [(0, 1), (2, 3)]))


def test_dct_rejects_non_tree_edges():
    cs = maximal_cliques(K3.skeleton())
    with pytest.raises(GraphError):
        DirectedCliqueTree(cs, {(0, 1): (False, True)})


def test_residual_sets_reject_non_tree():
    cs = maximal_cliques(PATH.skeleton())
    bad = Cdct(cs, (frozenset({0}), frozenset({1})), (cs[0], cs[1]), ())
    with pytest.raises(GraphError):
        residual_sets(bad)


def test_moral_components_split_chain_components():
    # 0 - 1 undirected, 1 -> 3 <- 2 compelled, 3 - 4 undirected
    d = Dag(5, [(0, 1), (1, 3), (2, 3), (3, 4)])
    comps = moral_components(d)
    assert [vmap for _, vmap in comps] == [[0, 1]]
    d = Dag(6, [(0, 1), (1, 3), (2, 3), (0, 4), (4, 5)])
    assert [vmap for _, vmap in moral_components(d)] == [[0, 1, 4, 5]]


def _marks_valid(d, t):
    for i, j in t.edges:
        ci, cj = t.cliques[i], t.cliques[j]
        assert t.head(i, j) == arrowhead(d, ci, cj)
        assert t.head(j, i) == arrowhead(d, cj, ci)
        assert t.head(i, j) or t.head(j, i)


def _arrow_meets_comparable(t):
    for a, c, b in t.arrow_meets():
        assert intersection_comparable(t.separator(a, c), t.separator(b, c))


@given(moral_dags(min_n=2))
def test_marks_match_predicate_and_never_both_tails(d):
    if not connected(d):
        return
    _marks_valid(d, directed_clique_graph(d))
    t, _ = construct_cdct(d)
    _marks_valid(d, t)


@settings(max_examples=60)
@given(moral_dags(min_n=2, max_n=9))
def test_arrow_meets_are_intersection_comparable_on_every_dct(d):
    if not connected(d):
        return
    for ct in all_clique_trees(d):
        _arrow_meets_comparable(directed_clique_tree(d, ct))
    _arrow_meets_comparable(construct_cdct(d)[0])


@given(moral_dags(min_n=2, max_n=14))
def test_construction_is_a_max_weight_tree_with_tree_contraction(d):
    if not connected(d):
        return
    t, c = construct_cdct(d)
    assert t.as_clique_tree().weight() == clique_tree(d.skeleton()).weight()
    assert not t.conflicting_sources()
    assert c.is_tree() and c.max_in_degree() <= 1
    assert sorted(x for comp in c.components for x in comp) == list(range(len(t.cliques)))


def test_contraction_in_degree_on_many_graphs():
    rng = random.Random(2024)
    for _ in range(1000):
        d = random_chordal_moral_dag(rng.randint(2, 14), rng.random() * 0.5, rng)
        _, c = construct_cdct(d)
        assert c.max_in_degree() <= 1 and c.is_tree()


@given(moral_dags(min_n=2, max_n=12))
def test_residuals_partition_and_residual_eg_is_closed(d):
    if not connected(d):
        return
    _, c = construct_cdct(d)
    rs = residuals(c, d)
    assert sorted(v for r in rs for v in r.vertices) == list(range(d.n))
    for r in rs:
        assert r.subdag == d.induced_subgraph(r.vertices)[0]
        if r.parent is None:
            assert r.vertices == c.vertex_sets[r.component]
    e = residual_essential_graph(d, c)
    assert meek_closure(e) == e
    assert e.arcs <= d.arcs


def _mvis_size_brute(d):
    return len(next(iter(brute_all_mvis(d)))) if d.n else 0


def _sum_over_residuals(d, size):
    _, c = construct_cdct(d)
    return sum(size(r.subdag) for r in residuals(c, d))


@settings(max_examples=60)
@given(moral_dags(min_n=2, max_n=7))
def test_decomposition_matches_brute_force(d):
    if not connected(d):
        return
    assert _mvis_size_brute(d) == _sum_over_residuals(d, _mvis_size_brute)


@given(moral_dags(min_n=2, max_n=12))
def test_decomposition_matches_covered_edge_cover(d):
    # a set verifies a moral DAG iff it covers every covered arc
    if not connected(d):
        return
    size = lambda g: min_vertex_cover_size(covered_edges(g))
    assert size(d) == _sum_over_residuals(d, size)


@pytest.mark.parametrize("d", REGRESSIONS)
def test_decomposition_regressions(d):
    assert _mvis_size_brute(d) == _sum_over_residuals(d, _mvis_size_brute)
    t, c = construct_cdct(d)
    assert c.is_tree()
    # every covered arc stays inside one residual
    where = {v: k for k, r in enumerate(residual_sets(c)) for v in r}
    assert all(where[u] == where[v] for u, v in covered_edges(d))
