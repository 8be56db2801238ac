import itertools

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dctlearn.chordal import (
    CliqueTree,
    NotChordalError,
    central_node,
    ceil_log2,
    clique_graph,
    clique_tree,
    elimination_chordalize,
    is_chordal,
    is_peo,
    maximal_cliques,
    weighted_clique_graph,
)
from dctlearn.graphs import GraphError, UndirectedGraph
from oracles import brute_clique_graph_edges, brute_is_chordal, brute_maximal_cliques
from strategies import moral_dags

C4 = UndirectedGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
DIAMOND = UndirectedGraph(4, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])


def complete(n):
    return UndirectedGraph(n, itertools.combinations(range(n), 2))


def sets(cs):
    return [sorted(c) for c in cs]


def test_is_chordal_examples():
    assert not is_chordal(C4)[0]
    assert is_chordal(UndirectedGraph(5, [(0, 1), (0, 2), (2, 3), (2, 4)]))[0]
    ok, peo = is_chordal(DIAMOND)
    assert ok and is_peo(DIAMOND, peo)


def test_maximal_cliques_examples():
    assert sets(maximal_cliques(UndirectedGraph(3, [(0, 1), (1, 2)]))) == [[0, 1], [1, 2]]
    k5 = maximal_cliques(complete(5))
    assert sets(k5) == [[0, 1, 2, 3, 4]] and k5.omega == 5
    assert sets(maximal_cliques(DIAMOND)) == [[0, 1, 2], [1, 2, 3]]


def test_maximal_cliques_rejects_non_chordal():
    with pytest.raises(NotChordalError):
        maximal_cliques(C4)


def test_clique_tree_examples():
    t = clique_tree(UndirectedGraph(3, [(0, 1), (1, 2)]))
    assert t.edges == ((0, 1),) and t.separator(0, 1) == {1}
    assert clique_tree(complete(3)).edges == ()
    t = clique_tree(DIAMOND)
    assert t.separator(*t.edges[0]) == {1, 2} and t.weight() == 2


def test_clique_tree_rejects_disconnected():
    with pytest.raises(GraphError):
        clique_tree(UndirectedGraph(4, [(0, 1), (2, 3)]))


def test_clique_graph_examples():
    path = UndirectedGraph(3, [(0, 1), (1, 2)])
    assert clique_graph(path).edges == clique_tree(path).edges
    star = UndirectedGraph(4, [(0, 1), (0, 2), (0, 3)])
    assert clique_graph(star).edges == ((0, 1), (0, 2), (1, 2))


def test_central_node_examples():
    c, br = central_node({0: [1], 1: [0, 2], 2: [1, 3], 3: [2, 4], 4: [3]})
    assert c == 2 and br == {1: {0, 1}, 3: {3, 4}}
    assert central_node({"x": []}) == ("x", {})
    hub, br = central_node({0: [1, 2, 3, 4], 1: [0], 2: [0], 3: [0], 4: [0]})
    assert hub == 0 and len(br) == 4
    with pytest.raises(GraphError):
        central_node({})
    with pytest.raises(GraphError):
        central_node({0: [1], 1: [0, 2], 2: [1, 0]})


def test_elimination_examples():
    assert elimination_chordalize(DIAMOND, [0, 3, 1, 2]) == DIAMOND
    assert elimination_chordalize(C4, [0, 1, 2, 3]).edges == [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)]
    empty = UndirectedGraph(3)
    assert elimination_chordalize(empty, [2, 1, 0]) == empty
    with pytest.raises(GraphError):
        elimination_chordalize(C4, [0, 1, 2])


def test_ceil_log2():
    assert [ceil_log2(k) for k in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]


@st.composite
def undirected(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return UndirectedGraph(n, [e for e, k in zip(pairs, keep) if k])


@st.composite
def chordal_graphs(draw, max_n=10):
    g = draw(undirected(max_n))
    order = draw(st.permutations(range(g.n)))
    return elimination_chordalize(g, list(order))


@given(undirected())
def test_is_chordal_matches_brute_force(g):
    ok, peo = is_chordal(g)
    assert ok == brute_is_chordal(g)
    assert ok == nx.is_chordal(nx.Graph(g.edges)) if g.edges else ok
    if ok:
        assert is_peo(g, peo)


@given(chordal_graphs())
def test_maximal_cliques_match_brute_force(g):
    assert set(maximal_cliques(g).cliques) == brute_maximal_cliques(g)


@given(undirected(), st.randoms())
def test_elimination_output_is_chordal_supergraph(g, rnd):
    order = list(range(g.n))
    rnd.shuffle(order)
    h = elimination_chordalize(g, order)
    assert set(g.edges) <= set(h.edges)
    assert is_chordal(h)[0] and is_peo(h, order)


def _connected_chordal(g):
    comps = g.connected_components()
    big = max(comps, key=len)
    return g.induced_subgraph(big)[0]


@given(chordal_graphs())
def test_clique_tree_properties(g):
    g = _connected_chordal(g)
    t = clique_tree(g)
    cs = t.cliques
    adj = t.adjacency()
    assert len(t.edges) == len(cs) - 1
    for v in range(g.n):
        holding = [i for i, c in enumerate(cs) if v in c]
        sub = nx.Graph()
        sub.add_nodes_from(holding)
        sub.add_edges_from(e for e in t.edges if e[0] in holding and e[1] in holding)
        assert nx.is_tree(sub)
    tree = nx.Graph(list(t.edges))
    tree.add_nodes_from(range(len(cs)))
    for a, b in itertools.combinations(range(len(cs)), 2):
        for k in nx.shortest_path(tree, a, b):
            assert cs[a] & cs[b] <= cs[k]
    w = weighted_clique_graph(cs)
    full = nx.Graph()
    full.add_nodes_from(range(len(cs)))
    full.add_weighted_edges_from((i, j, x) for (i, j), x in w.items())
    best = nx.maximum_spanning_tree(full).size(weight="weight")
    assert t.weight() == best
    assert set(adj) == set(range(len(cs)))


@given(chordal_graphs(max_n=9))
def test_clique_graph_matches_exhaustive_union(g):
    g = _connected_chordal(g)
    cg = clique_graph(g)
    if len(cg.cliques) > 6:
        return
    assert set(cg.edges) == brute_clique_graph_edges(cg.cliques)


@given(chordal_graphs())
def test_galinier_bypass(g):
    # C1 - C2 - C3 in a clique tree with C1&C2 <= C2&C3 implies C1 - C3 in the
    # clique graph, with the same separator as C1 - C2
    g = _connected_chordal(g)
    t, cg = clique_tree(g), clique_graph(g)
    edges = set(cg.edges)
    adj = t.adjacency()
    cs = t.cliques
    for c2, nb in adj.items():
        for c1, c3 in itertools.permutations(nb, 2):
            if cs[c1] & cs[c2] <= cs[c2] & cs[c3]:
                assert (min(c1, c3), max(c1, c3)) in edges
                assert cs[c1] & cs[c3] == cs[c1] & cs[c2]


@st.composite
def trees(draw):
    n = draw(st.integers(1, 30))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    adj = {v: [] for v in range(n)}
    for child, p in enumerate(parents, start=1):
        adj[child].append(p)
        adj[p].append(child)
    return adj


@given(trees())
def test_central_node_branch_bound(adj):
    c, branches = central_node(adj)
    n = len(adj)
    assert all(len(b) <= n // 2 for b in branches.values())
    assert sorted(v for b in branches.values() for v in b) == sorted(set(adj) - {c})
    # centroid: smallest largest-branch, smallest id on ties
    g = nx.Graph([(a, b) for a, nb in adj.items() for b in nb])
    g.add_nodes_from(adj)

    def worst(v):
        h = g.copy()
        h.remove_node(v)
        return max((len(k) for k in nx.connected_components(h)), default=0)

    assert c == min(adj, key=lambda v: (worst(v), v))


@given(moral_dags(max_n=12))
def test_clique_count_at_most_n(d):
    cs = maximal_cliques(d.skeleton())
    assert len(cs) <= max(d.n, 1)


def test_clique_tree_accepts_custom_edges():
    cs = maximal_cliques(DIAMOND)
    t = CliqueTree(cs, ((0, 1),))
    assert t.neighbors(0) == {1}
