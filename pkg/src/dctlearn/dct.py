"""Directed clique trees, their contraction, and residual decomposition.

An edge between cliques ``Ci`` and ``Cj`` carries one mark per endpoint.
The mark at ``Cj`` is an arrowhead when every vertex of the separator
points into every vertex of ``Cj - Ci`` in the DAG, and a tail otherwise.
Marks are stored as ``(head_at_i, head_at_j)`` for the edge key ``(i, j)``
with ``i < j``.
"""
from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

from .chordal import (
    CliqueGraph,
    CliqueSet,
    CliqueTree,
    UnionFind,
    clique_graph,
    clique_tree,
    maximal_cliques,
    weighted_clique_graph,
)
from .graphs import Dag, GraphError, UndirectedGraph
from .meek import OrientationState, essential_graph

Marks = tuple[bool, bool]


class NotMoralError(GraphError):
    """Raised when a construction needs a DAG whose essential graph is fully undirected."""


class CdctConstructionError(RuntimeError):
    """No conflict-free candidate edge was found while building a clique tree."""


def arrowhead(d: Dag, c_from: frozenset, c_to: frozenset) -> bool:
    """Whether the edge ``c_from - c_to`` has an arrowhead at `c_to`."""
    sep = c_from & c_to
    downstream = c_to - c_from
    assert downstream, "maximal cliques never contain each other"
    return all(d.has_arc(s, v) for s in sep for v in downstream)


def edge_marks(d: Dag, ci: frozenset, cj: frozenset) -> Marks:
    return arrowhead(d, cj, ci), arrowhead(d, ci, cj)


def intersection_comparable(sep_a: frozenset, sep_b: frozenset) -> bool:
    return sep_a <= sep_b or sep_b <= sep_a


def _key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class DirectedCliqueGraph:
    """Clique graph whose edges carry endpoint marks.

    Parameters
    ----------
    cliques : CliqueSet
    marks : mapping (i, j) -> (bool, bool)
        Arrowhead flags at ``i`` and at ``j`` for each edge ``i < j``.
    """

    cliques: CliqueSet
    marks: Mapping[tuple[int, int], Marks]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.marks)

    def separator(self, i: int, j: int) -> frozenset:
        return self.cliques[i] & self.cliques[j]

    def head(self, i: int, j: int) -> bool:
        """Arrowhead at `j` on the edge between `i` and `j`."""
        hi, hj = self.marks[_key(i, j)]
        return hj if i < j else hi

    def kind(self, i: int, j: int) -> str:
        """One of ``"->"``, ``"<-"``, ``"<->"`` or ``"--"`` read from `i` to `j`."""
        at_i, at_j = self.head(j, i), self.head(i, j)
        return {(False, True): "->", (True, False): "<-", (True, True): "<->", (False, False): "--"}[(at_i, at_j)]

    def neighbors(self, i: int) -> list[int]:
        return sorted(b if a == i else a for a, b in self.marks if i in (a, b))

    @property
    def directed_edges(self) -> list[tuple[int, int]]:
        out = []
        for (i, j), (hi, hj) in sorted(self.marks.items()):
            if hj and not hi:
                out.append((i, j))
            elif hi and not hj:
                out.append((j, i))
        return sorted(out)

    @property
    def bidirected_edges(self) -> list[tuple[int, int]]:
        return [e for e, (hi, hj) in sorted(self.marks.items()) if hi and hj]

    @property
    def undirected_edges(self) -> list[tuple[int, int]]:
        return [e for e, (hi, hj) in sorted(self.marks.items()) if not hi and not hj]

    def parents(self, i: int) -> list[int]:
        """Cliques ``j`` with ``j -> i``."""
        return [j for j in self.neighbors(i) if self.kind(j, i) == "->"]

    def arrow_meets(self) -> list[tuple[int, int, int]]:
        """Triples ``(a, c, b)``, ``a < b``, where arrowheads from `a` and `b` meet at `c`."""
        out = []
        for c in range(len(self.cliques)):
            into = [a for a in self.neighbors(c) if self.head(a, c)]
            out.extend((a, c, b) for x, a in enumerate(into) for b in into[x + 1:])
        return out

    def bidirected_components(self) -> list[frozenset[int]]:
        uf = UnionFind(len(self.cliques))
        for i, j in self.bidirected_edges:
            uf.union(i, j)
        groups: dict[int, set[int]] = {}
        for c in range(len(self.cliques)):
            groups.setdefault(uf.find(c), set()).add(c)
        return sorted((frozenset(g) for g in groups.values()), key=min)

    def conflicting_sources(self) -> list[frozenset[int]]:
        """Bidirected components entered by two or more directed edges."""
        comps = self.bidirected_components()
        where = {c: k for k, comp in enumerate(comps) for c in comp}
        indeg = [0] * len(comps)
        for a, b in self.directed_edges:
            if where[a] != where[b]:
                indeg[where[b]] += 1
        return [comps[k] for k in range(len(comps)) if indeg[k] > 1]


@dataclass(frozen=True)
class DirectedCliqueTree(DirectedCliqueGraph):
    """A :class:`DirectedCliqueGraph` whose edges form a spanning tree."""

    def __post_init__(self):
        k = len(self.cliques)
        uf = UnionFind(k)
        if len(self.marks) != max(k - 1, 0) or not all(uf.union(i, j) for i, j in self.marks):
            raise GraphError("directed clique tree edges must form a spanning tree")

    def as_clique_tree(self) -> CliqueTree:
        return CliqueTree(self.cliques, tuple(self.edges))


def check_moral(d: Dag) -> None:
    """Raise :class:`NotMoralError` unless the essential graph of `d` is fully undirected."""
    if essential_graph(d).arcs:
        raise NotMoralError("DAG has v-structures or compelled arcs; split it into chain components first")


def directed_clique_graph(d: Dag, g: CliqueGraph | CliqueTree | None = None) -> DirectedCliqueGraph:
    """Mark every edge of a clique graph of ``skeleton(d)`` from the arcs of `d`."""
    check_moral(d)
    if g is None:
        g = clique_graph(d.skeleton())
    marks = {e: edge_marks(d, g.cliques[e[0]], g.cliques[e[1]]) for e in g.edges}
    return DirectedCliqueGraph(g.cliques, marks)


def directed_clique_tree(d: Dag, t: CliqueTree | None = None) -> DirectedCliqueTree:
    """Directed clique tree of a moral DAG over clique tree `t`.

    Examples
    --------
    >>> dct = directed_clique_tree(Dag(3, [(0, 1), (1, 2)]))
    >>> [sorted(c) for c in dct.cliques], dct.directed_edges
    ([[0, 1], [1, 2]], [(0, 1)])
    """
    check_moral(d)
    if t is None:
        t = clique_tree(d.skeleton())
    marks = {e: edge_marks(d, t.cliques[e[0]], t.cliques[e[1]]) for e in t.edges}
    return DirectedCliqueTree(t.cliques, marks)


@dataclass
class _SourceTracker:
    """Bidirected components of a growing forest and their incoming directed edge counts."""

    k: int
    bi: UnionFind = field(init=False)
    indeg: list[int] = field(init=False)

    def __post_init__(self):
        self.bi = UnionFind(self.k)
        self.indeg = [0] * self.k

    def conflicts(self, i: int, j: int, m: Marks) -> bool:
        hi, hj = m
        if hi and hj:
            ri, rj = self.bi.find(i), self.bi.find(j)
            return ri != rj and self.indeg[ri] + self.indeg[rj] > 1
        if hj:
            return self.indeg[self.bi.find(j)] >= 1
        if hi:
            return self.indeg[self.bi.find(i)] >= 1
        raise CdctConstructionError(f"edge {i}-{j} has two tails")

    def add(self, i: int, j: int, m: Marks) -> None:
        hi, hj = m
        if hi and hj:
            ri, rj = self.bi.find(i), self.bi.find(j)
            total = self.indeg[ri] + self.indeg[rj]
            self.bi.union(ri, rj)
            self.indeg[self.bi.find(ri)] = total
        else:
            self.indeg[self.bi.find(j if hj else i)] += 1


def conflict_free_kruskal(
    cliques: CliqueSet,
    weights: Mapping[tuple[int, int], int],
    mark_of: Callable[[int, int], Marks],
) -> DirectedCliqueTree:
    """Maximum-weight spanning tree that never creates conflicting sources.

    At each step the candidates are the heaviest edges joining two different
    trees of the forest. The lexicographically first candidate is taken if it
    adds no second incoming edge to a bidirected component. Otherwise the
    edge is re-attached at the parentless clique found by walking upstream
    from its blocked endpoint, and failing that the remaining candidates are
    scanned in order.

    The accepted edge is then hoisted: while the clique it hangs from has an
    upstream neighbour with the same intersection, the edge moves there.
    Without this step a clique can hang by a bidirected edge below a
    directed one, splitting a covered arc across two residuals.

    Parameters
    ----------
    cliques : CliqueSet
    weights : mapping (i, j) -> int
        Weighted edges, ``i < j``.
    mark_of : callable
        ``mark_of(i, j)`` returns the ``(head_at_i, head_at_j)`` marks.

    Raises
    ------
    CdctConstructionError
        If no candidate is conflict free at some step.
    """
    k = len(cliques)
    order = sorted(weights, key=lambda e: (-weights[e], e))
    forest = UnionFind(k)
    tracker = _SourceTracker(k)
    chosen: dict[tuple[int, int], Marks] = {}
    adj: dict[int, list[int]] = {c: [] for c in range(k)}
    pos = 0
    while len(chosen) < k - 1:
        while pos < len(order) and forest.find(order[pos][0]) == forest.find(order[pos][1]):
            pos += 1
        if pos == len(order):
            raise GraphError("weighted clique graph is disconnected")
        w = weights[order[pos]]
        cands = []
        for e in order[pos:]:
            if weights[e] != w:
                break
            if forest.find(e[0]) != forest.find(e[1]):
                cands.append(e)
        pick = _choose(cands, tracker, chosen, adj, mark_of)
        if pick is None:
            raise CdctConstructionError("no conflict-free maximum-weight edge")
        e, m = _hoist(*pick, cliques, tracker, chosen, adj, mark_of)
        forest.union(*e)
        tracker.add(e[0], e[1], m)
        chosen[e] = m
        adj[e[0]].append(e[1])
        adj[e[1]].append(e[0])
    return DirectedCliqueTree(cliques, chosen)


def _choose(cands, tracker, chosen, adj, mark_of):
    cand_set = set(cands)
    first = cands[0]
    m = mark_of(*first)
    if not tracker.conflicts(first[0], first[1], m):
        return first, m
    hi, hj = m
    blocked = [c for c, h in ((first[1], hj), (first[0], hi)) if h]
    for end in blocked:
        other = first[0] if end == first[1] else first[1]
        for top in _upstream_sources(end, chosen, adj):
            e = _key(other, top)
            if e in cand_set:
                me = mark_of(*e)
                if not tracker.conflicts(e[0], e[1], me):
                    return e, me
    for e in cands[1:]:
        me = mark_of(*e)
        if not tracker.conflicts(e[0], e[1], me):
            return e, me
    return None


def _hoist(e, m, cliques, tracker, chosen, adj, mark_of):
    x, y = e
    sep = cliques[x] & cliques[y]
    tx, ty = _top_holding(x, sep, cliques, chosen, adj), _top_holding(y, sep, cliques, chosen, adj)
    for a, b in ((tx, ty), (tx, y), (x, ty)):
        if (a, b) == (x, y):
            continue
        k = _key(a, b)
        mk = mark_of(*k)
        if not tracker.conflicts(k[0], k[1], mk):
            return k, mk
    return e, m


def _top_holding(start: int, sep: frozenset, cliques, chosen, adj) -> int:
    """Most upstream clique containing `sep` reachable from `start` against arrowheads."""
    seen = {start}
    stack = [start]
    while stack:
        c = stack.pop()
        for z in adj[c]:
            if z not in seen and _marks_from(chosen, z, c)[1] and sep <= cliques[z]:
                seen.add(z)
                stack.append(z)
    # the reachable cliques span a chain of components; pick one in the first
    uf = UnionFind(len(cliques))
    entered = set()
    for c in seen:
        for z in adj[c]:
            if z in seen and _marks_from(chosen, z, c)[1]:
                if _marks_from(chosen, z, c)[0]:
                    uf.union(z, c)
                else:
                    entered.add(c)
    entered = {uf.find(c) for c in entered}
    return min(c for c in seen if uf.find(c) not in entered)


def _marks_from(chosen, a: int, b: int) -> Marks:
    """Marks of the chosen edge between `a` and `b`, as (head at a, head at b)."""
    return chosen[(a, b)] if a < b else chosen[(b, a)][::-1]


def _upstream_sources(start: int, chosen, adj) -> list[int]:
    """Cliques reached from `start` against arrowheads that have nothing pointing into them."""
    seen = {start}
    stack = [start]
    tops = []
    while stack:
        c = stack.pop()
        ups = []
        for x in adj[c]:
            if _marks_from(chosen, x, c)[1] and x not in seen:
                ups.append(x)
        if not ups:
            tops.append(c)
        for x in sorted(ups, reverse=True):
            seen.add(x)
            stack.append(x)
    return tops


@dataclass(frozen=True)
class Cdct:
    """Contracted directed clique tree.

    Attributes
    ----------
    cliques : CliqueSet
    components : tuple of frozenset
        Clique indices of each bidirected component, ordered by smallest index.
    vertex_sets : tuple of frozenset
        Union of the cliques of each component.
    edges : tuple of (int, int)
        Directed edges between component indices.
    """

    cliques: CliqueSet
    components: tuple[frozenset[int], ...]
    vertex_sets: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]

    def parents(self, b: int) -> list[int]:
        return sorted(a for a, c in self.edges if c == b)

    def children(self, b: int) -> list[int]:
        return sorted(c for a, c in self.edges if a == b)

    def max_in_degree(self) -> int:
        return max((len(self.parents(b)) for b in range(len(self.components))), default=0)

    def is_tree(self) -> bool:
        """Connected, one edge fewer than nodes, and every node has at most one parent."""
        k = len(self.components)
        if len(self.edges) != k - 1 or self.max_in_degree() > 1:
            return False
        uf = UnionFind(k)
        return all(uf.union(a, b) for a, b in self.edges)

    def topological_order(self) -> list[int]:
        roots = [b for b in range(len(self.components)) if not self.parents(b)]
        order = []
        stack = sorted(roots, reverse=True)
        while stack:
            b = stack.pop()
            order.append(b)
            stack.extend(sorted(self.children(b), reverse=True))
        return order


def contract(t: DirectedCliqueGraph) -> Cdct:
    """Collapse bidirected components of `t` into single nodes.

    A DCT with conflicting sources contracts to a graph where some node has
    two parents; :meth:`Cdct.max_in_degree` reports it.
    """
    comps = t.bidirected_components()
    where = {c: k for k, comp in enumerate(comps) for c in comp}
    vsets = tuple(frozenset().union(*(t.cliques[c] for c in comp)) for comp in comps)
    edges = sorted({(where[a], where[b]) for a, b in t.directed_edges if where[a] != where[b]})
    return Cdct(t.cliques, tuple(comps), vsets, tuple(edges))


def construct_cdct(d: Dag) -> tuple[DirectedCliqueTree, Cdct]:
    """Directed clique tree of a moral DAG without conflicting sources, and its contraction.

    Examples
    --------
    >>> dct, cdct = construct_cdct(Dag(3, [(0, 1), (1, 2)]))
    >>> cdct.edges
    ((0, 1),)
    """
    check_moral(d)
    g = d.skeleton()
    if not g.is_connected():
        raise GraphError("construct_cdct expects a connected skeleton")
    cs = maximal_cliques(g)
    t = conflict_free_kruskal(cs, weighted_clique_graph(cs), lambda i, j: edge_marks(d, cs[i], cs[j]))
    return t, contract(t)


@dataclass(frozen=True)
class Residual:
    """Vertices of one contracted node minus those of its parent node."""

    component: int
    parent: int | None
    vertices: frozenset[int]
    subdag: Dag
    vmap: list[int]


def residual_sets(c: Cdct) -> list[frozenset[int]]:
    if not c.is_tree():
        raise GraphError("residuals need a tree-shaped contraction with in-degree at most one")
    out = []
    for b in range(len(c.components)):
        pa = c.parents(b)
        out.append(c.vertex_sets[b] - (c.vertex_sets[pa[0]] if pa else frozenset()))
    return out


def residuals(c: Cdct, d: Dag) -> list[Residual]:
    """One residual per node of `c`, with the sub-DAG of `d` it induces.

    Examples
    --------
    >>> _, cdct = construct_cdct(Dag(3, [(0, 1), (1, 2)]))
    >>> [sorted(r.vertices) for r in residuals(cdct, Dag(3, [(0, 1), (1, 2)]))]
    [[0, 1], [2]]
    """
    out = []
    for b, vs in enumerate(residual_sets(c)):
        sub, vmap = d.induced_subgraph(vs)
        pa = c.parents(b)
        out.append(Residual(b, pa[0] if pa else None, vs, sub, vmap))
    return out


def residual_essential_graph(d: Dag, c: Cdct) -> OrientationState:
    """Skeleton of `d` with exactly the arcs that cross between residuals oriented."""
    where = {}
    for k, vs in enumerate(residual_sets(c)):
        for v in vs:
            where[v] = k
    arcs = [(u, v) for u, v in d.arcs if where[u] != where[v]]
    return OrientationState(d.skeleton(), arcs)


def moral_components(d: Dag) -> list[tuple[Dag, list[int]]]:
    """Sub-DAGs induced on the non-trivial chain components of the essential graph of `d`.

    Each sub-DAG is moral with a connected chordal skeleton.
    """
    e = essential_graph(d)
    und = UndirectedGraph(d.n, e.undirected_edges)
    return [d.induced_subgraph(comp) for comp in und.connected_components() if len(comp) > 1]
