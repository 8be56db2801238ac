"""Adaptive intervention policies run against a simulated noiseless oracle.

The oracle hides a DAG and answers single-node interventions by revealing
every edge incident to the target, after which Meek propagation runs on
its knowledge. Policies see only that knowledge.

:func:`dct_policy` works per chain component in two phases. Phase one
learns the marks of the directed clique graph with clique- and
edge-interventions placed at central cliques of shrinking spanning trees.
Phase two builds a contracted directed clique tree from those marks and
finishes each residual on its own.
"""
from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np

from .chordal import CliqueSet, all_mst_edges, ceil_log2, central_node, max_weight_spanning_forest, maximal_cliques
from .dct import DirectedCliqueGraph, _key, conflict_free_kruskal, contract, intersection_comparable, residual_sets
from .graphs import Dag, GraphError, UndirectedGraph
from .meek import InconsistentOrientationError, OrientationState, _close, essential_graph, is_fully_oriented

log = logging.getLogger(__name__)


@dataclass
class InterventionLog:
    """Raw intervention sequence of one run.

    Attributes
    ----------
    entries : list of (int, int)
        ``(target, newly oriented edge count)`` in the order performed.
        Repeats are recorded with a count of zero.
    components : list of dict
        Per chain component bookkeeping filled in by :func:`dct_policy`.
    """

    entries: list[tuple[int, int]] = field(default_factory=list)
    components: list[dict] = field(default_factory=list)

    @property
    def targets(self) -> list[int]:
        """Distinct targets in first-use order."""
        return list(dict.fromkeys(v for v, _ in self.entries))

    @property
    def total(self) -> int:
        return len(set(v for v, _ in self.entries))

    def __len__(self):
        return len(self.entries)


class Oracle:
    """Owns the current knowledge about a hidden DAG.

    Parameters
    ----------
    truth : Dag
        The DAG being learned. Policies must not read it.
    state : OrientationState, optional
        Starting knowledge; defaults to the essential graph of `truth`.

    Examples
    --------
    >>> o = Oracle(Dag(3, [(0, 1), (1, 2)]))
    >>> sorted(o.intervene(0)), o.intervene(0)
    ([(0, 1), (1, 2)], [])
    """

    def __init__(self, truth: Dag, state: OrientationState | None = None):
        self._truth = truth
        self.state = essential_graph(truth) if state is None else state.copy()
        self.log = InterventionLog()
        self._done: set[int] = set()

    @property
    def n(self) -> int:
        return self.state.n

    def observe(self, v: int) -> list[tuple[int, int]]:
        """Orientation of every still-undirected edge at `v`."""
        return [(v, w) if self._truth.has_arc(v, w) else (w, v) for w in sorted(self.state.und[v])]

    def intervene(self, v: int) -> list[tuple[int, int]]:
        """Intervene on `v`, propagate, and return the arcs newly learned."""
        if not 0 <= v < self.n:
            raise GraphError(f"vertex {v} out of range")
        if v in self._done:
            self.log.entries.append((v, 0))
            return []
        self._done.add(v)
        s = self.state
        learned = []
        for a, b in self.observe(v):
            if s._orient(a, b):
                learned.append((a, b))
        if learned:
            learned += _close(s, new_arcs=list(learned))
        self.log.entries.append((v, len(learned)))
        log.debug("intervene %d -> %d new arcs", v, len(learned))
        return learned

    def intervened(self, v: int) -> bool:
        return v in self._done

    def matches_truth(self) -> bool:
        return is_fully_oriented(self.state) and self.state.arcs == set(self._truth.arcs)


class ManualOracle(Oracle):
    """Oracle whose answers come from a callback instead of a hidden DAG.

    Parameters
    ----------
    state : OrientationState
        Current knowledge, usually an essential graph.
    ask : callable
        ``ask(v, neighbours)`` returns the subset of `neighbours` that `v`
        points to. The remaining neighbours point into `v`.
    """

    def __init__(self, state: OrientationState, ask: Callable[[int, list[int]], Iterable[int]]):
        self._truth = None
        self.state = state.copy()
        self.log = InterventionLog()
        self._done = set()
        self._ask = ask

    def observe(self, v: int) -> list[tuple[int, int]]:
        nbrs = sorted(self.state.und[v])
        out = set(self._ask(v, nbrs))
        if not out <= set(nbrs):
            raise GraphError(f"{sorted(out - set(nbrs))} are not undirected neighbours of {v}")
        return [(v, w) if w in out else (w, v) for w in nbrs]

    def matches_truth(self) -> bool:
        return is_fully_oriented(self.state)


def oracle_intervene(o: Oracle, v: int) -> list[tuple[int, int]]:
    return o.intervene(v)


# marks per endpoint: True arrowhead, False tail, None unknown
Mark = bool | None


class PolicyDcgState:
    """Partially known directed clique graph over one chain component.

    Parameters
    ----------
    cliques : CliqueSet
        Maximal cliques of the component, in global vertex ids.
    edges : iterable of (int, int)
        Clique graph edges, ``i < j``.
    """

    def __init__(self, cliques: CliqueSet, edges: Iterable[tuple[int, int]]):
        self.cliques = cliques
        self.marks: dict[tuple[int, int], list[Mark]] = {e: [None, None] for e in sorted(edges)}
        self.adj: dict[int, list[int]] = {c: [] for c in range(len(cliques))}
        for i, j in self.marks:
            self.adj[i].append(j)
            self.adj[j].append(i)

    def separator(self, i: int, j: int) -> frozenset:
        return self.cliques[i] & self.cliques[j]

    def head(self, i: int, j: int) -> Mark:
        """Mark at `j` on the edge ``i - j``."""
        m = self.marks[_key(i, j)]
        return m[1] if i < j else m[0]

    def set_head(self, i: int, j: int, value: bool) -> bool:
        """Record the mark at `j`; returns True if it was unknown."""
        m = self.marks[_key(i, j)]
        k = 1 if i < j else 0
        if m[k] is None:
            m[k] = value
            return True
        if m[k] != value:
            raise InconsistentOrientationError(f"mark at clique {j} on edge {i}-{j} contradicts earlier knowledge")
        return False

    def resolved(self, i: int, j: int) -> bool:
        return None not in self.marks[_key(i, j)]

    def unresolved_edges(self) -> list[tuple[int, int]]:
        return [e for e, m in self.marks.items() if None in m]

    def incident_resolved(self, c: int) -> bool:
        return all(self.resolved(c, x) for x in self.adj[c])

    def parents(self, c: int) -> list[int]:
        """Neighbours known to point into `c` with a tail at their end."""
        return [p for p in self.adj[c] if self.head(p, c) is True and self.head(c, p) is False]

    def mark_of(self, i: int, j: int) -> tuple[bool, bool]:
        m = self.marks[_key(i, j)]
        if None in m:
            raise GraphError(f"edge {i}-{j} is not resolved")
        return m[0], m[1]

    def to_dcg(self) -> DirectedCliqueGraph:
        return DirectedCliqueGraph(self.cliques, {e: self.mark_of(*e) for e in self.marks})


def refresh_dcg_marks(p: PolicyDcgState, state: OrientationState) -> PolicyDcgState:
    """Read every unknown endpoint mark off the current orientation knowledge.

    The mark at ``C2`` on ``C1 - C2`` is a tail as soon as one arc from
    ``C2 - C1`` into the separator is known, and an arrowhead once every
    arc from the separator into ``C2 - C1`` is known.
    """
    cs = p.cliques
    for (i, j), m in p.marks.items():
        for k, (a, b) in enumerate(((j, i), (i, j))):
            if m[k] is not None:
                continue
            sep = cs[a] & cs[b]
            down = cs[b] - cs[a]
            tail = False
            every = True
            for x in down:
                if not state.ch[x].isdisjoint(sep):
                    tail = True
                    break
                if every and not sep <= state.pa[x]:
                    every = False
            if tail:
                m[k] = False
            elif every:
                m[k] = True
    return p


def propagate_dcg(p: PolicyDcgState) -> PolicyDcgState:
    """Close the marks under two sound rules.

    An edge never has two tails, so a known tail forces an arrowhead at the
    other end. Arrowheads meeting at a clique come from intersection
    comparable edges, so ``C1 *-> C2`` with ``C2 - C4`` incomparable to it
    forces ``C2 -> C4``.

    Raises
    ------
    InconsistentOrientationError
        If the rules derive a mark that contradicts an existing one.
    """
    cs = p.cliques
    changed = True
    while changed:
        changed = False
        for (i, j), m in p.marks.items():
            if m[0] is False:
                changed |= p.set_head(i, j, True)
            if m[1] is False:
                changed |= p.set_head(j, i, True)
        for c in range(len(cs)):
            into = [a for a in p.adj[c] if p.head(a, c) is True]
            if not into:
                continue
            for x in p.adj[c]:
                if p.head(c, x) is True and p.head(x, c) is False:
                    continue
                sep_x = cs[c] & cs[x]
                if any(a != x and not intersection_comparable(cs[a] & cs[c], sep_x) for a in into):
                    changed |= p.set_head(x, c, False)
                    changed |= p.set_head(c, x, True)
    return p


@dataclass
class _Run:
    """Shared plumbing for one policy run on one oracle."""

    o: Oracle
    rng: np.random.Generator
    counts: dict = field(default_factory=lambda: {"clique": 0, "edge": 0, "nodes": 0})

    def pick(self, cands: list[int]) -> int:
        return cands[int(self.rng.integers(len(cands)))]

    def hit(self, v: int, p: PolicyDcgState | None = None) -> None:
        self.o.intervene(v)
        self.counts["nodes"] += 1
        if p is not None:
            refresh_dcg_marks(p, self.o.state)
            propagate_dcg(p)


def clique_intervention(run: _Run, p: PolicyDcgState, c: int) -> int:
    """Intervene inside clique `c` until every clique graph edge at `c` is resolved.

    Non-dominated members are preferred, picked at random.

    Returns
    -------
    int
        Number of single-node interventions made.
    """
    s = run.o.state
    used = 0
    while not p.incident_resolved(c):
        fresh = sorted(v for v in p.cliques[c] if not run.o.intervened(v))
        if not fresh:
            raise InconsistentOrientationError(f"clique {c} unresolved after intervening on all its members")
        nd = [v for v in fresh if not s.is_dominated(v)]
        run.hit(run.pick(nd or fresh), p)
        used += 1
    return used


def edge_intervention(run: _Run, p: PolicyDcgState, c1: int, c2: int) -> int:
    """Intervene on random separator members until ``c1 - c2`` is resolved."""
    used = 0
    while not p.resolved(c1, c2):
        fresh = sorted(v for v in p.separator(c1, c2) if not run.o.intervened(v))
        if not fresh:
            raise InconsistentOrientationError(f"edge {c1}-{c2} unresolved after intervening on its separator")
        run.hit(run.pick(fresh), p)
        used += 1
    return used


def identify_upstream(run: _Run, p: PolicyDcgState, c: int) -> int | None:
    """Parent of `c` upstream of all its other parents, or None for a source clique.

    Only parents with the smallest separator can be upstream-most; pairs
    of them are resolved with edge-interventions. The answer points into
    every other candidate, with a tail at its own end where possible.
    """
    pa = p.parents(c)
    if len(pa) <= 1:
        return pa[0] if pa else None
    small = min(len(p.separator(x, c)) for x in pa)
    cands = sorted(x for x in pa if len(p.separator(x, c)) == small)
    for x, a in enumerate(cands):
        for b in cands[x + 1:]:
            if _key(a, b) in p.marks and not p.resolved(a, b):
                if edge_intervention(run, p, a, b):
                    run.counts["edge"] += 1

    def points_to_all(a, strict):
        return all(
            _key(a, b) not in p.marks or (p.head(a, b) and (not strict or p.head(b, a) is False))
            for b in cands if b != a
        )

    # parents joined by a bidirected edge are equally far upstream
    for strict in (True, False):
        for a in cands:
            if points_to_all(a, strict):
                return a
    # not reachable when the marks are sound; keep the policy total anyway
    log.warning("no upstream parent found for clique %d; using %d", c, cands[0])
    return cands[0]


def _component_cliques(state: OrientationState, comp: list[int]) -> tuple[CliqueSet, list[tuple[int, int]]]:
    und = UndirectedGraph(state.n, state.undirected_edges)
    sub, vmap = und.induced_subgraph(comp)
    local = maximal_cliques(sub)
    # vmap is increasing, so the canonical clique order survives the relabelling
    cs = CliqueSet(tuple(frozenset(vmap[v] for v in c) for c in local))
    weights = {}
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            w = len(cs[i] & cs[j])
            if w:
                weights[(i, j)] = w
    return cs, all_mst_edges(len(cs), weights)


def find_dcg(run: _Run, cs: CliqueSet, edges: list[tuple[int, int]]) -> PolicyDcgState:
    """Learn every mark of the directed clique graph of one chain component.

    Each round intervenes on a central clique of a spanning tree of the
    current region, finds its upstream branch, and resolves everything
    outside that branch. The region then shrinks to the upstream branch,
    which holds at most half of its cliques.
    """
    p = PolicyDcgState(cs, edges)
    refresh_dcg_marks(p, run.o.state)
    propagate_dcg(p)
    region = set(range(len(cs)))
    while p.unresolved_edges() and region:
        inner = [e for e in p.marks if e[0] in region and e[1] in region]
        tree = max_weight_spanning_forest(cs, inner)
        adj = {c: [] for c in region}
        for i, j in tree:
            adj[i].append(j)
            adj[j].append(i)
        centre, branches = central_node(adj)
        clique_intervention(run, p, centre)
        run.counts["clique"] += 1
        up = identify_upstream(run, p, centre)
        keep = next((b for b in branches.values() if up in b), frozenset())
        while True:
            todo = [e for e in p.unresolved_edges() if e[0] not in keep or e[1] not in keep]
            if not todo:
                break
            i, j = min(todo, key=lambda e: (len(p.separator(*e)), e))
            edge_intervention(run, p, i, j)
            run.counts["edge"] += 1
        region = set(keep)
    left = p.unresolved_edges()
    if left:
        raise InconsistentOrientationError(f"clique graph edges left unresolved: {left}")
    return p


def _finish_residuals(run: _Run, p: PolicyDcgState) -> list[frozenset[int]]:
    cs = p.cliques
    weights = {e: len(p.separator(*e)) for e in p.marks}
    t = conflict_free_kruskal(cs, weights, p.mark_of)
    cdct = contract(t)
    sets = residual_sets(cdct)
    s = run.o.state
    for b in cdct.topological_order():
        r = sets[b]
        while True:
            live = sorted(v for v in r if not s.und[v].isdisjoint(r) and not run.o.intervened(v))
            if not live:
                break
            nd = [v for v in live if not s.is_dominated(v)]
            run.hit(run.pick(nd or live))
    return sets


def _chain_components(state: OrientationState) -> list[list[int]]:
    und = UndirectedGraph(state.n, state.undirected_edges)
    return [c for c in und.connected_components() if len(c) > 1]


def dct_policy(o: Oracle, seed=None) -> InterventionLog:
    """Two-phase directed clique tree policy.

    Parameters
    ----------
    o : Oracle
        Fresh oracle; its knowledge should be the essential graph.
    seed : int, numpy Generator or SeedSequence, optional

    Returns
    -------
    InterventionLog
        ``o.log``, with per component counts in ``components``.

    Examples
    --------
    >>> o = Oracle(Dag(3, [(0, 1), (1, 2)]))
    >>> dct_policy(o, seed=0).total, o.matches_truth()
    (1, True)
    """
    run = _Run(o, np.random.default_rng(seed))
    for comp in _chain_components(o.state):
        cs, edges = _component_cliques(o.state, comp)
        run.counts = {"clique": 0, "edge": 0, "nodes": 0}
        p = find_dcg(run, cs, edges)
        phase1 = dict(run.counts)
        bound = ceil_log2(len(cs))
        if phase1["clique"] > bound:
            raise AssertionError(f"{phase1['clique']} clique-interventions exceed ceil(log2 {len(cs)}) = {bound}")
        sets = _finish_residuals(run, p)
        o.log.components.append({
            "vertices": comp,
            "cliques": len(cs),
            "clique_interventions": phase1["clique"],
            "edge_interventions": phase1["edge"],
            "phase1_nodes": phase1["nodes"],
            "phase2_nodes": run.counts["nodes"] - phase1["nodes"],
            "residuals": [sorted(r) for r in sets],
        })
    if not is_fully_oriented(o.state):
        raise RuntimeError(f"dct_policy finished with undirected edges {o.state.undirected_edges}")
    return o.log


def _random_loop(o: Oracle, seed, non_dominated: bool) -> InterventionLog:
    run = _Run(o, np.random.default_rng(seed))
    s = o.state
    while True:
        live = [v for v in range(s.n) if s.und[v]]
        if not live:
            return o.log
        if non_dominated:
            live = [v for v in live if not s.is_dominated(v)] or live
        run.hit(run.pick(live))


def nd_random_policy(o: Oracle, seed=None) -> InterventionLog:
    """Intervene on uniformly random non-dominated vertices until fully oriented."""
    return _random_loop(o, seed, True)


def random_policy(o: Oracle, seed=None) -> InterventionLog:
    """Intervene on uniformly random vertices with an undirected edge until fully oriented."""
    return _random_loop(o, seed, False)


POLICIES: dict[str, Callable[[Oracle, object], InterventionLog]] = {
    "dct": dct_policy,
    "nd-random": nd_random_policy,
    "random": random_policy,
}
