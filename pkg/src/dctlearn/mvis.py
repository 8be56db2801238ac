"""Verifying intervention sets: verification, minimal sets and the clique lower bound."""
from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from itertools import combinations

from .chordal import NotChordalError, is_chordal, maximal_cliques
from .dct import construct_cdct, moral_components, residuals
from .graphs import Dag, UndirectedGraph
from .meek import OrientationState, _close, essential_graph, is_fully_oriented


@dataclass(frozen=True)
class Vis:
    """An intervention set together with how it was assembled.

    Attributes
    ----------
    targets : frozenset of int
    per_component : list of dict
        One entry per non-trivial chain component, with its vertices and the
        targets chosen inside it.
    """

    targets: frozenset[int]
    per_component: list[dict] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.targets)

    def to_json(self) -> dict:
        return {"size": self.size, "targets": sorted(self.targets), "per_component": self.per_component}


def _orient_from(base: OrientationState, truth: Dag, targets: Iterable[int]) -> OrientationState:
    s = base.copy()
    new = []
    for v in targets:
        for w in list(s.und[v]):
            arc = (v, w) if truth.has_arc(v, w) else (w, v)
            s._orient(*arc)
            new.append(arc)
    if new:
        _close(s, new_arcs=new)
    return s


def verify_vis(d: Dag, s: Iterable[int]) -> bool:
    """Whether intervening on every vertex of `s` fully orients `d`.

    Examples
    --------
    >>> verify_vis(Dag(3, [(0, 1), (1, 2)]), {0})
    True
    >>> verify_vis(Dag(3, [(0, 1), (0, 2), (1, 2)]), {0})
    False
    """
    return is_fully_oriented(_orient_from(essential_graph(d), d, s))


def _clique_witness(d: Dag) -> frozenset[int]:
    # every second vertex of the topological order covers each consecutive pair
    return frozenset(d.topological_order()[1::2])


def _is_complete(d: Dag) -> bool:
    return len(d.arcs) == d.n * (d.n - 1) // 2


def _candidate_sets(d: Dag) -> Iterator[tuple[OrientationState, list[int], int]]:
    base = essential_graph(d)
    # a vertex without undirected edges learns nothing, so minimal sets avoid it
    active = [v for v in range(d.n) if base.und[v]]
    for k in range(len(active) + 1):
        yield base, active, k


def mvis_enumeration(d: Dag) -> Vis:
    """Smallest verifying set by exhaustive search.

    Complete DAGs take the shortcut of every second vertex in topological
    order. Otherwise subsets are tried by size, then in lexicographic order,
    and the first one that verifies is returned.

    Examples
    --------
    >>> k4 = Dag(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    >>> sorted(mvis_enumeration(k4).targets)
    [1, 3]
    """
    if _is_complete(d):
        return Vis(_clique_witness(d))
    for base, active, k in _candidate_sets(d):
        for s in combinations(active, k):
            if is_fully_oriented(_orient_from(base, d, s)):
                return Vis(frozenset(s))
    raise AssertionError("intervening on every vertex always verifies")


def all_mvis(d: Dag) -> list[frozenset[int]]:
    """Every verifying set of minimum size, in lexicographic order."""
    for base, active, k in _candidate_sets(d):
        found = [frozenset(s) for s in combinations(active, k) if is_fully_oriented(_orient_from(base, d, s))]
        if found:
            return found
    raise AssertionError("intervening on every vertex always verifies")


def mvis_dct(d: Dag) -> Vis:
    """Minimum verifying set assembled residual by residual.

    Each non-trivial chain component of the essential graph is split along
    a conflict-free contracted clique tree; the exhaustive search then runs
    on every residual separately and the results are combined.

    Examples
    --------
    >>> sorted(mvis_dct(Dag(3, [(0, 1), (1, 2)])).targets)
    [1]
    """
    targets: set[int] = set()
    per_component = []
    for sub, vmap in moral_components(d):
        _, cdct = construct_cdct(sub)
        chosen: set[int] = set()
        parts = []
        for r in residuals(cdct, sub):
            local = mvis_enumeration(r.subdag).targets
            picked = sorted(vmap[r.vmap[v]] for v in local)
            chosen.update(picked)
            parts.append({"residual": sorted(vmap[v] for v in r.vertices), "targets": picked})
        targets |= chosen
        per_component.append({"vertices": vmap, "targets": sorted(chosen), "residuals": parts})
    return Vis(frozenset(targets), per_component)


def lower_bound(e: OrientationState) -> int:
    """Sum over chain components of half their clique number, rounded down.

    Raises
    ------
    NotChordalError
        If some chain component is not chordal, so `e` is not an essential graph.

    Examples
    --------
    >>> k5 = UndirectedGraph(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    >>> lower_bound(OrientationState(k5))
    2
    """
    und = UndirectedGraph(e.n, e.undirected_edges)
    total = 0
    for comp in und.connected_components():
        if len(comp) < 2:
            continue
        sub, _ = und.induced_subgraph(comp)
        if not is_chordal(sub)[0]:
            raise NotChordalError("chain component is not chordal; input is not an essential graph")
        total += maximal_cliques(sub).omega // 2
    return total
