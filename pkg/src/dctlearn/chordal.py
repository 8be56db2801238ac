"""Chordal graphs: elimination orderings, maximal cliques and clique trees.

Cliques are ``frozenset`` objects of vertex ids. A :class:`CliqueSet` keeps
them sorted by their sorted vertex tuples, which fixes the integer index of
every clique and therefore every lexicographic tie-break downstream.
"""
from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass
from itertools import combinations

from .graphs import GraphError, UndirectedGraph


class NotChordalError(GraphError):
    """Raised when an operation requires a chordal graph."""


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def mcs_order(g: UndirectedGraph) -> list[int]:
    """Maximum cardinality search visit order, smallest id on ties."""
    weight = [0] * g.n
    done = [False] * g.n
    order = []
    for _ in range(g.n):
        best = -1
        for v in range(g.n):
            if not done[v] and (best < 0 or weight[v] > weight[best]):
                best = v
        done[best] = True
        order.append(best)
        for w in g.neighbors(best):
            if not done[w]:
                weight[w] += 1
    return order


def is_peo(g: UndirectedGraph, order: list[int]) -> bool:
    """Whether every vertex's later neighbours in `order` form a clique."""
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [w for w in g.neighbors(v) if pos[w] > pos[v]]
        if len(later) < 2:
            continue
        # only the earliest later neighbour needs checking against the rest
        first = min(later, key=pos.__getitem__)
        nb = g.neighbors(first)
        if any(w != first and w not in nb for w in later):
            return False
    return True


def is_chordal(g: UndirectedGraph) -> tuple[bool, list[int] | None]:
    """Chordality test.

    Returns
    -------
    chordal : bool
    peo : list of int or None
        A perfect elimination ordering when `g` is chordal.

    Examples
    --------
    >>> is_chordal(UndirectedGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]))[0]
    False
    """
    peo = mcs_order(g)[::-1]
    if is_peo(g, peo):
        return True, peo
    return False, None


def _clique_key(c: frozenset) -> tuple:
    return tuple(sorted(c))


@dataclass(frozen=True)
class CliqueSet:
    """Maximal cliques of a chordal graph in canonical order."""

    cliques: tuple[frozenset, ...]

    @property
    def omega(self) -> int:
        return max((len(c) for c in self.cliques), default=0)

    def __len__(self):
        return len(self.cliques)

    def __iter__(self):
        return iter(self.cliques)

    def __getitem__(self, i):
        return self.cliques[i]

    def index(self, c) -> int:
        return self.cliques.index(frozenset(c))


def maximal_cliques(g: UndirectedGraph) -> CliqueSet:
    """All maximal cliques of a chordal graph, from a PEO scan.

    Raises
    ------
    NotChordalError
        If `g` is not chordal.

    Examples
    --------
    >>> [sorted(c) for c in maximal_cliques(UndirectedGraph(3, [(0, 1), (1, 2)]))]
    [[0, 1], [1, 2]]
    """
    ok, peo = is_chordal(g)
    if not ok:
        raise NotChordalError("maximal_cliques requires a chordal graph")
    pos = {v: i for i, v in enumerate(peo)}
    cands = {frozenset([v, *(w for w in g.neighbors(v) if pos[w] > pos[v])]) for v in peo}
    kept: list[frozenset] = []
    for c in sorted(cands, key=len, reverse=True):
        if not any(c < k for k in kept):
            kept.append(c)
    return CliqueSet(tuple(sorted(kept, key=_clique_key)))


def weighted_clique_graph(cs: CliqueSet) -> dict[tuple[int, int], int]:
    """Edges ``(i, j)``, ``i < j``, between cliques that intersect, with weight ``|Ci & Cj|``."""
    out = {}
    for i, j in combinations(range(len(cs)), 2):
        w = len(cs[i] & cs[j])
        if w:
            out[(i, j)] = w
    return out


def _sorted_by_weight(weights: Mapping[tuple[int, int], int]) -> list[tuple[int, int]]:
    return sorted(weights, key=lambda e: (-weights[e], e))


@dataclass(frozen=True)
class CliqueTree:
    """Tree over maximal cliques; separators are clique intersections."""

    cliques: CliqueSet
    edges: tuple[tuple[int, int], ...]

    def separator(self, i: int, j: int) -> frozenset:
        return self.cliques[i] & self.cliques[j]

    def weight(self) -> int:
        return sum(len(self.separator(i, j)) for i, j in self.edges)

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in range(len(self.cliques))}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def neighbors(self, i: int) -> set[int]:
        return {b if a == i else a for a, b in self.edges if i in (a, b)}


@dataclass(frozen=True)
class CliqueGraph(CliqueTree):
    """Union of all clique trees. Same shape as :class:`CliqueTree` but may contain cycles."""


def max_weight_spanning_forest(cs: CliqueSet, edges: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Deterministic Kruskal over the given clique pairs.

    Heavier separators first; equal weights in lexicographic pair order.
    """
    weights = {(min(e), max(e)): len(cs[e[0]] & cs[e[1]]) for e in edges}
    uf = UnionFind(len(cs))
    chosen = []
    for e in _sorted_by_weight(weights):
        if uf.union(*e):
            chosen.append(e)
    return sorted(chosen)


def _cliques_of_connected(g: UndirectedGraph) -> CliqueSet:
    if not g.is_connected():
        raise GraphError("graph must be connected; pass one connected component at a time")
    return maximal_cliques(g)


def clique_tree(g: UndirectedGraph) -> CliqueTree:
    """Maximum-weight spanning tree of the weighted clique graph.

    Raises
    ------
    GraphError
        If `g` is disconnected or not chordal.
    """
    cs = _cliques_of_connected(g)
    return CliqueTree(cs, tuple(max_weight_spanning_forest(cs, weighted_clique_graph(cs))))


def clique_graph(g: UndirectedGraph) -> CliqueGraph:
    """Union of all maximum-weight spanning trees of the weighted clique graph.

    An edge of weight ``w`` lies in some maximum spanning tree iff its
    endpoints are disconnected by the edges strictly heavier than ``w``.
    """
    cs = _cliques_of_connected(g)
    return CliqueGraph(cs, tuple(all_mst_edges(len(cs), weighted_clique_graph(cs))))


def all_mst_edges(k: int, weights: Mapping[tuple[int, int], int]) -> list[tuple[int, int]]:
    """Edges belonging to at least one maximum-weight spanning forest."""
    uf = UnionFind(k)
    by_weight: dict[int, list[tuple[int, int]]] = {}
    for e, w in weights.items():
        by_weight.setdefault(w, []).append(e)
    keep = []
    for w in sorted(by_weight, reverse=True):
        group = by_weight[w]
        keep.extend(e for e in group if uf.find(e[0]) != uf.find(e[1]))
        for a, b in group:
            uf.union(a, b)
    return sorted(keep)


def central_node(tree: Mapping[Hashable, Iterable[Hashable]]):
    """Node minimising its largest branch, smallest node on ties.

    Parameters
    ----------
    tree : mapping node -> neighbours
        Adjacency of a tree. Nodes must be mutually orderable.

    Returns
    -------
    node
        The chosen centre. Every branch has at most ``floor(|V|/2)`` nodes.
    branches : dict
        Maps each neighbour ``w`` of the centre to the node set of the
        component of ``tree - centre`` containing ``w``.

    Examples
    --------
    >>> c, br = central_node({0: [1], 1: [0, 2], 2: [1, 3], 3: [2, 4], 4: [3]})
    >>> c, sorted(map(sorted, br.values()))
    (2, [[0, 1], [3, 4]])
    """
    adj = {v: set(nb) for v, nb in tree.items()}
    if not adj:
        raise GraphError("central_node of an empty tree")
    n = len(adj)
    root = min(adj)
    parent = {root: None}
    order = [root]
    for v in order:
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
    if len(order) != n or sum(len(nb) for nb in adj.values()) != 2 * (n - 1):
        raise GraphError("central_node requires a tree")
    size = dict.fromkeys(adj, 1)
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    best, best_key = None, None
    for v in sorted(adj):
        parts = [size[w] for w in adj[v] if parent.get(w) == v]
        if parent[v] is not None:
            parts.append(n - size[v])
        key = max(parts, default=0)
        if best_key is None or key < best_key:
            best, best_key = v, key
    branches = {}
    for w in adj[best]:
        comp, stack = {w}, [w]
        while stack:
            u = stack.pop()
            for x in adj[u]:
                if x != best and x not in comp:
                    comp.add(x)
                    stack.append(x)
        branches[w] = frozenset(comp)
    return best, branches


def elimination_chordalize(g: UndirectedGraph, order: list[int]) -> UndirectedGraph:
    """Fill-in graph from eliminating vertices in `order`.

    Each eliminated vertex's remaining neighbours become pairwise adjacent,
    so `order` itself is a perfect elimination ordering of the result (every
    vertex's later neighbours form a clique).

    Examples
    --------
    >>> c4 = UndirectedGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    >>> elimination_chordalize(c4, [0, 1, 2, 3]).edges
    [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)]
    """
    if sorted(order) != list(range(g.n)):
        raise GraphError("elimination order must be a permutation of the vertices")
    adj = [set(g.neighbors(v)) for v in range(g.n)]
    gone = [False] * g.n
    for v in order:
        rest = [w for w in adj[v] if not gone[w]]
        for a, b in combinations(rest, 2):
            adj[a].add(b)
            adj[b].add(a)
        gone[v] = True
    return UndirectedGraph(g.n, ((u, v) for u in range(g.n) for v in adj[u] if u < v))


def ceil_log2(k: int) -> int:
    return math.ceil(math.log2(k)) if k > 1 else 0
