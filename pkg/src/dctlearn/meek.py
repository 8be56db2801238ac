"""Orientation propagation, essential graphs and single-node interventions.

:class:`OrientationState` is a partially directed graph over a fixed
skeleton. The public functions here treat it as a value and return new
states; :class:`dctlearn.policy.Oracle` owns one state and mutates it in
place through the underscore helpers for speed.
"""
from __future__ import annotations

from collections.abc import Iterable

from .graphs import DIRECTED, UNDIRECTED, Dag, GraphError, MixedGraph, UndirectedGraph


class InconsistentOrientationError(GraphError):
    """Raised when propagation would orient an edge both ways."""


class OrientationState:
    """Chain graph with a fixed skeleton whose undirected edges may become directed.

    Parameters
    ----------
    skeleton : UndirectedGraph
    arcs : iterable of (int, int)
        Edges of the skeleton already known to be directed.
    """

    __slots__ = ("n", "adj", "pa", "ch", "und")

    def __init__(self, skeleton: UndirectedGraph, arcs: Iterable[tuple[int, int]] = ()):
        n = skeleton.n
        self.n = n
        self.adj = tuple(skeleton.neighbors(v) for v in range(n))
        self.pa: list[set[int]] = [set() for _ in range(n)]
        self.ch: list[set[int]] = [set() for _ in range(n)]
        self.und: list[set[int]] = [set(a) for a in self.adj]
        for u, v in arcs:
            self._orient(u, v)

    @classmethod
    def from_mixed(cls, g: MixedGraph) -> "OrientationState":
        if g.bidirected:
            raise GraphError("orientation states cannot hold bidirected edges")
        return cls(g.skeleton(), g.directed)

    def copy(self) -> "OrientationState":
        new = object.__new__(OrientationState)
        new.n = self.n
        new.adj = self.adj
        new.pa = [set(s) for s in self.pa]
        new.ch = [set(s) for s in self.ch]
        new.und = [set(s) for s in self.und]
        return new

    @property
    def arcs(self) -> set[tuple[int, int]]:
        return {(u, v) for u in range(self.n) for v in self.ch[u]}

    @property
    def undirected_edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in range(self.n) for v in self.und[u] if u < v)

    @property
    def pdag(self) -> MixedGraph:
        edges = [(u, v, DIRECTED) for u, v in self.arcs]
        edges += [(u, v, UNDIRECTED) for u, v in self.undirected_edges]
        return MixedGraph(self.n, edges)

    def skeleton(self) -> UndirectedGraph:
        return UndirectedGraph(self.n, ((u, v) for u in range(self.n) for v in self.adj[u] if u < v))

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.ch[u]

    def is_undirected(self, u: int, v: int) -> bool:
        return v in self.und[u]

    def is_dominated(self, v: int) -> bool:
        """True if `v` has no undirected edge, or a single one to a vertex with several."""
        und = self.und[v]
        if not und:
            return True
        if len(und) == 1:
            (w,) = und
            return len(self.und[w]) > 1
        return False

    def _orient(self, u: int, v: int) -> bool:
        """Set ``u -> v``. Returns True if it was undirected before."""
        if v in self.ch[u]:
            return False
        if u in self.ch[v]:
            raise InconsistentOrientationError(f"edge {v}->{u} already known, cannot set {u}->{v}")
        if v not in self.adj[u]:
            raise GraphError(f"{u} and {v} are not adjacent")
        self.und[u].discard(v)
        self.und[v].discard(u)
        self.ch[u].add(v)
        self.pa[v].add(u)
        return True

    def __eq__(self, other):
        return (
            isinstance(other, OrientationState)
            and self.n == other.n
            and self.adj == other.adj
            and self.ch == other.ch
        )

    def __repr__(self):
        return f"OrientationState(n={self.n}, arcs={sorted(self.arcs)}, undirected={self.undirected_edges})"


def _fires(s: OrientationState, x: int, y: int, all_rules: bool) -> bool:
    """Whether some Meek rule orients the undirected edge ``x - y`` as ``x -> y``."""
    adj_y = s.adj[y]
    # rule 1: p -> x - y with p, y non-adjacent
    for p in s.pa[x]:
        if p not in adj_y:
            return True
    # rule 2: x -> w -> y
    pa_y = s.pa[y]
    if not s.ch[x].isdisjoint(pa_y):
        return True
    if not all_rules:
        return False
    # rule 3: x - k -> y and x - l -> y with k, l non-adjacent
    ks = [k for k in s.und[x] if k in pa_y]
    for i, k in enumerate(ks):
        adj_k = s.adj[k]
        for l in ks[i + 1:]:
            if l not in adj_k:
                return True
    # rule 4: x - k -> l -> y with x adjacent to l and k, y non-adjacent
    adj_x = s.adj[x]
    for k in s.und[x]:
        if k in adj_y:
            continue
        for l in s.ch[k]:
            if l in pa_y and l in adj_x:
                return True
    return False


def _close(
    s: OrientationState, all_rules: bool = True, new_arcs: Iterable[tuple[int, int]] | None = None
) -> list[tuple[int, int]]:
    """Apply Meek rules in place until nothing fires; return the arcs added.

    `new_arcs` limits the initial worklist to edges that those arcs could
    affect. This is only valid when the state was closed before they were set.
    """
    if new_arcs is None:
        work = set(s.undirected_edges)
    else:
        work = set()
        for a, b in new_arcs:
            _touch(s, a, b, all_rules, work)
    added = []
    while work:
        u, v = work.pop()
        if v not in s.und[u]:
            continue
        fwd = _fires(s, u, v, all_rules)
        bwd = _fires(s, v, u, all_rules)
        if fwd and bwd:
            raise InconsistentOrientationError(f"rules orient {u}-{v} both ways")
        if not (fwd or bwd):
            continue
        a, b = (u, v) if fwd else (v, u)
        s._orient(a, b)
        added.append((a, b))
        _touch(s, a, b, all_rules, work)
    return added


def _touch(s: OrientationState, a: int, b: int, all_rules: bool, work: set) -> None:
    # a new arc a -> b can only enable rules on undirected edges at a or b,
    # except rule 4, which also looks at edges around the neighbours of a
    _enqueue(s, a, work)
    _enqueue(s, b, work)
    if all_rules:
        for w in s.adj[a]:
            _enqueue(s, w, work)


def _enqueue(s: OrientationState, v: int, work: set) -> None:
    for w in s.und[v]:
        work.add((v, w) if v < w else (w, v))


def meek_closure(p: OrientationState, assume_no_vstructures: bool = False) -> OrientationState:
    """Close `p` under Meek's orientation rules.

    Parameters
    ----------
    p : OrientationState
    assume_no_vstructures : bool
        Run only the first two rules, which suffice when the underlying
        DAG has no v-structures.

    Returns
    -------
    OrientationState
        A new state; `p` is left untouched.

    Raises
    ------
    InconsistentOrientationError
        If the rules would orient some edge in both directions.

    Examples
    --------
    >>> s = OrientationState(UndirectedGraph(3, [(0, 1), (1, 2)]), [(0, 1)])
    >>> sorted(meek_closure(s).arcs)
    [(0, 1), (1, 2)]
    """
    out = p.copy()
    _close(out, all_rules=not assume_no_vstructures)
    return out


def essential_graph(d: Dag) -> OrientationState:
    """Skeleton of `d` with its v-structures oriented, closed under Meek's rules."""
    arcs = [arc for a, c, b in d.vstructures() for arc in ((a, c), (b, c))]
    s = OrientationState(d.skeleton(), arcs)
    _close(s)
    return s


def _intervene(s: OrientationState, truth: Dag, v: int, all_rules: bool = True) -> list[tuple[int, int]]:
    """In-place intervention on `v`: orient incident edges as in `truth`, then close."""
    added = []
    for w in list(s.und[v]):
        a, b = (v, w) if truth.has_arc(v, w) else (w, v)
        if not truth.has_arc(a, b):
            raise GraphError(f"state and truth skeletons differ at {v}-{w}")
        s._orient(a, b)
        added.append((a, b))
    if added:
        added += _close(s, all_rules, new_arcs=list(added))
    return added


def apply_intervention(state: OrientationState, truth: Dag, v: int, check: bool = False) -> OrientationState:
    """Learn the edges incident to `v` from `truth` and propagate.

    Parameters
    ----------
    state : OrientationState
        Current knowledge; must share the skeleton of `truth`.
    truth : Dag
    v : int
        Intervention target.
    check : bool
        Also verify that the input and output are consistent with `truth`.

    Examples
    --------
    >>> truth = Dag(3, [(0, 1), (1, 2)])
    >>> sorted(apply_intervention(essential_graph(truth), truth, 0).arcs)
    [(0, 1), (1, 2)]
    """
    out = state.copy()
    if check:
        assert_consistent(out, truth)
    _intervene(out, truth, v)
    if check:
        assert_consistent(out, truth)
    return out


def assert_consistent(state: OrientationState, truth: Dag) -> None:
    """Raise if `state` has a different skeleton or an arc not in `truth`."""
    if state.skeleton() != truth.skeleton():
        raise InconsistentOrientationError("state skeleton differs from truth")
    bad = state.arcs - truth.arcs
    if bad:
        raise InconsistentOrientationError(f"arcs contradict truth: {sorted(bad)}")


def interventional_essential_graph(truth: Dag, targets: Iterable[int]) -> OrientationState:
    """Essential graph of `truth` refined by single-node interventions on `targets`."""
    s = essential_graph(truth)
    for v in targets:
        _intervene(s, truth, v)
    return s


def is_fully_oriented(state: OrientationState) -> bool:
    return not any(state.und)


def restricted_fully_oriented(state: OrientationState, vs: Iterable[int]) -> bool:
    """No undirected edge has both endpoints in `vs`."""
    vs = set(vs)
    return all(state.und[v].isdisjoint(vs) for v in vs)
