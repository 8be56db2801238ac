"""Graph containers: undirected graphs, DAGs and mixed graphs.

Vertices are dense integer ids ``0..n-1``. All containers are immutable
after construction; mutable orientation state lives in
:mod:`dctlearn.meek`.
"""
from __future__ import annotations

import heapq
from collections.abc import Iterable, Sequence

DIRECTED = "d"
UNDIRECTED = "u"
BIDIRECTED = "b"
MARKS = (DIRECTED, UNDIRECTED, BIDIRECTED)


class GraphError(ValueError):
    """Raised for structurally invalid graphs."""


class CycleError(GraphError):
    """Raised when a directed graph expected to be acyclic has a cycle."""


class GraphFormatError(GraphError):
    """Raised when graph text cannot be parsed.

    Parameters
    ----------
    lineno : int
        1-based line number of the offending line.
    msg : str
        Description of the problem.
    """

    def __init__(self, lineno: int, msg: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}")


def _check_vertex(n: int, v) -> int:
    if not isinstance(v, (int,)) or isinstance(v, bool) or not 0 <= v < n:
        raise GraphError(f"vertex {v!r} out of range for n={n}")
    return v


def _check_subset(n: int, vs: Iterable[int]) -> list[int]:
    out = sorted(set(vs))
    for v in out:
        _check_vertex(n, v)
    return out


class UndirectedGraph:
    """Simple undirected graph.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : iterable of (int, int)
        Unordered pairs. Repeated pairs collapse to one edge.

    Examples
    --------
    >>> g = UndirectedGraph(3, [(0, 1), (2, 1)])
    >>> g.edges
    [(0, 1), (1, 2)]
    """

    __slots__ = ("n", "_adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            _check_vertex(n, u)
            _check_vertex(n, v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj = tuple(frozenset(a) for a in adj)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in range(self.n) for v in self._adj[u] if u < v)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self._adj) // 2

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def is_complete(self) -> bool:
        return all(len(a) == self.n - 1 for a in self._adj)

    def is_clique(self, vs: Iterable[int]) -> bool:
        vs = list(vs)
        return all(vs[j] in self._adj[vs[i]] for i in range(len(vs)) for j in range(i + 1, len(vs)))

    def induced_subgraph(self, vs: Iterable[int]) -> tuple["UndirectedGraph", list[int]]:
        """Subgraph on `vs`, re-indexed densely.

        Returns
        -------
        sub : UndirectedGraph
        vmap : list of int
            ``vmap[i]`` is the original id of new vertex ``i``.
        """
        vmap = _check_subset(self.n, vs)
        index = {v: i for i, v in enumerate(vmap)}
        edges = [(index[u], index[v]) for u in vmap for v in self._adj[u] if v in index and u < v]
        return UndirectedGraph(len(vmap), edges), vmap

    def connected_components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists, ordered by smallest member."""
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in self._adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.connected_components()) == 1

    def to_mixed(self) -> "MixedGraph":
        return MixedGraph(self.n, [(u, v, UNDIRECTED) for u, v in self.edges])

    def __eq__(self, other):
        return isinstance(other, UndirectedGraph) and self.n == other.n and self._adj == other._adj

    def __hash__(self):
        return hash((self.n, self._adj))

    def __repr__(self):
        return f"UndirectedGraph(n={self.n}, edges={self.edges})"


class Dag:
    """Directed acyclic graph.

    Parameters
    ----------
    n : int
        Number of vertices.
    arcs : iterable of (int, int)
        Ordered pairs ``(u, v)`` meaning ``u -> v``.

    Raises
    ------
    CycleError
        If the arcs contain a directed cycle (including a 2-cycle).
    """

    __slots__ = ("n", "_parents", "_children", "_arcs")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        parents: list[set[int]] = [set() for _ in range(n)]
        children: list[set[int]] = [set() for _ in range(n)]
        for u, v in arcs:
            _check_vertex(n, u)
            _check_vertex(n, v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u in children[v]:
                raise CycleError(f"arcs {u}->{v} and {v}->{u} form a cycle")
            children[u].add(v)
            parents[v].add(u)
        self.n = n
        self._parents = tuple(frozenset(p) for p in parents)
        self._children = tuple(frozenset(c) for c in children)
        self._arcs = frozenset((u, v) for u in range(n) for v in children[u])
        self.topological_order()  # raises on cycles

    @property
    def arcs(self) -> frozenset[tuple[int, int]]:
        return self._arcs

    def parents(self, v: int) -> frozenset[int]:
        return self._parents[v]

    def children(self, v: int) -> frozenset[int]:
        return self._children[v]

    def has_arc(self, u: int, v: int) -> bool:
        return v in self._children[u]

    def adjacent(self, u: int, v: int) -> bool:
        return v in self._children[u] or u in self._children[v]

    def neighbors(self, v: int) -> frozenset[int]:
        return self._parents[v] | self._children[v]

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, always releasing the smallest ready vertex.

        Examples
        --------
        >>> Dag(3, [(2, 0)]).topological_order()
        [1, 2, 0]
        """
        indeg = [len(p) for p in self._parents]
        ready = [v for v in range(self.n) if indeg[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            u = heapq.heappop(ready)
            order.append(u)
            for w in self._children[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, w)
        if len(order) != self.n:
            raise CycleError("directed cycle detected")
        return order

    def skeleton(self) -> UndirectedGraph:
        return UndirectedGraph(self.n, self._arcs)

    def vstructures(self) -> set[tuple[int, int, int]]:
        """Triples ``(a, c, b)`` with ``a -> c <- b``, ``a < b`` and ``a``, ``b`` non-adjacent."""
        out = set()
        for c in range(self.n):
            pa = sorted(self._parents[c])
            for i, a in enumerate(pa):
                for b in pa[i + 1:]:
                    if not self.adjacent(a, b):
                        out.add((a, c, b))
        return out

    def induced_subgraph(self, vs: Iterable[int]) -> tuple["Dag", list[int]]:
        vmap = _check_subset(self.n, vs)
        index = {v: i for i, v in enumerate(vmap)}
        arcs = [(index[u], index[v]) for u in vmap for v in self._children[u] if v in index]
        return Dag(len(vmap), arcs), vmap

    def to_mixed(self) -> "MixedGraph":
        return MixedGraph(self.n, [(u, v, DIRECTED) for u, v in self._arcs])

    def __eq__(self, other):
        return isinstance(other, Dag) and self.n == other.n and self._arcs == other._arcs

    def __hash__(self):
        return hash((self.n, self._arcs))

    def __repr__(self):
        return f"Dag(n={self.n}, arcs={sorted(self._arcs)})"


class MixedGraph:
    """Graph with directed, undirected and bidirected edges.

    At most one edge joins any pair of vertices. Undirected and bidirected
    edges are stored with the smaller endpoint first.

    Parameters
    ----------
    n : int
    edges : iterable of (int, int, str)
        ``(u, v, mark)`` with mark ``"d"`` (u -> v), ``"u"`` or ``"b"``.
    """

    __slots__ = ("n", "_edges")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, str]] = ()):
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        table: dict[tuple[int, int], tuple[int, int, str]] = {}
        for u, v, m in edges:
            _check_vertex(n, u)
            _check_vertex(n, v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if m not in MARKS:
                raise GraphError(f"unknown edge mark {m!r}")
            key = (min(u, v), max(u, v))
            if key in table:
                raise GraphError(f"more than one edge between {key[0]} and {key[1]}")
            table[key] = (u, v, m) if m == DIRECTED else (key[0], key[1], m)
        self.n = n
        self._edges = table

    @property
    def edges(self) -> list[tuple[int, int, str]]:
        """Edges in canonical order (sorted by ``(min, max)`` endpoint)."""
        return [self._edges[k] for k in sorted(self._edges)]

    @property
    def directed(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, v, m in self._edges.values() if m == DIRECTED)

    @property
    def undirected(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, v, m in self._edges.values() if m == UNDIRECTED)

    @property
    def bidirected(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, v, m in self._edges.values() if m == BIDIRECTED)

    def edge(self, u: int, v: int):
        """The edge between `u` and `v` as ``(a, b, mark)``, or None."""
        return self._edges.get((min(u, v), max(u, v)))

    def is_chain_graph(self) -> bool:
        """No bidirected edges and no directed cycle (undirected edges contracted)."""
        if self.bidirected:
            return False
        comp = {}
        for i, c in enumerate(_undirected_components(self)):
            for v in c:
                comp[v] = i
        arcs = {(comp[u], comp[v]) for u, v in self.directed}
        if any(a == b for a, b in arcs):
            return False
        try:
            Dag(len(set(comp.values())), arcs)
        except CycleError:
            return False
        return True

    def is_dag(self) -> bool:
        if len(self.directed) != len(self._edges):
            return False
        try:
            Dag(self.n, self.directed)
        except CycleError:
            return False
        return True

    def to_dag(self) -> Dag:
        """Convert a fully directed graph to a :class:`Dag`."""
        if len(self.directed) != len(self._edges):
            raise GraphError("graph has undirected or bidirected edges; expected a DAG")
        return Dag(self.n, self.directed)

    def skeleton(self) -> UndirectedGraph:
        return UndirectedGraph(self.n, self._edges.keys())

    def induced_subgraph(self, vs: Iterable[int]) -> tuple["MixedGraph", list[int]]:
        vmap = _check_subset(self.n, vs)
        index = {v: i for i, v in enumerate(vmap)}
        edges = [(index[u], index[v], m) for u, v, m in self._edges.values() if u in index and v in index]
        return MixedGraph(len(vmap), edges), vmap

    def __eq__(self, other):
        return isinstance(other, MixedGraph) and self.n == other.n and self._edges == other._edges

    def __hash__(self):
        return hash((self.n, frozenset(self._edges.values())))

    def __repr__(self):
        return f"MixedGraph(n={self.n}, edges={self.edges})"


def _undirected_components(g: MixedGraph) -> list[list[int]]:
    return UndirectedGraph(g.n, g.undirected).connected_components()


def skeleton(g) -> UndirectedGraph:
    """Undirected graph with the same adjacencies as `g`.

    Examples
    --------
    >>> skeleton(Dag(3, [(0, 1), (1, 2)])).edges
    [(0, 1), (1, 2)]
    """
    if isinstance(g, UndirectedGraph):
        return g
    return g.skeleton()


def induced_subgraph(g, vs: Iterable[int]):
    """Induced subgraph of any graph kind plus the map back to original ids."""
    return g.induced_subgraph(vs)


def topological_order(d: Dag) -> list[int]:
    return d.topological_order()


def chain_components(p: MixedGraph) -> list[tuple[UndirectedGraph, list[int]]]:
    """Connected components of `p` after deleting its directed edges.

    Each component is returned with only its undirected edges, re-indexed
    densely, together with the map back to ids of `p`.

    Raises
    ------
    GraphError
        If `p` contains bidirected edges.
    """
    if p.bidirected:
        raise GraphError("chain components are undefined for graphs with bidirected edges")
    und = UndirectedGraph(p.n, p.undirected)
    return [und.induced_subgraph(c) for c in und.connected_components()]


def parse_graph(text: str) -> MixedGraph:
    """Parse the line-oriented graph text format.

    Format: optional ``#`` comment lines, then ``v <n>``, then zero or more
    ``e <u> <v> <m>`` lines with ``m`` in ``{d, u, b}``.

    Examples
    --------
    >>> parse_graph("v 2\\ne 0 1 d\\n").directed
    frozenset({(0, 1)})
    """
    n = None
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "v":
                raise GraphFormatError(lineno, f"expected 'v <n>', got {line!r}")
            n = _parse_int(parts[1], lineno)
            continue
        if len(parts) != 4 or parts[0] != "e":
            raise GraphFormatError(lineno, f"expected 'e <u> <v> <mark>', got {line!r}")
        u, v = _parse_int(parts[1], lineno), _parse_int(parts[2], lineno)
        m = parts[3]
        if m not in MARKS:
            raise GraphFormatError(lineno, f"unknown edge mark {m!r}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(lineno, f"vertex out of range [0, {n})")
        if u == v:
            raise GraphFormatError(lineno, f"self-loop at {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(lineno, f"duplicate edge {key[0]}-{key[1]} (first on line {seen[key]})")
        seen[key] = lineno
        edges.append((u, v, m))
    if n is None:
        raise GraphFormatError(max(1, len(text.splitlines())), "missing 'v <n>' header")
    return MixedGraph(n, edges)


def _parse_int(tok: str, lineno: int) -> int:
    try:
        val = int(tok)
    except ValueError:
        raise GraphFormatError(lineno, f"expected a non-negative integer, got {tok!r}") from None
    if val < 0:
        raise GraphFormatError(lineno, f"expected a non-negative integer, got {tok!r}")
    return val


def serialize_graph(g, comments: Sequence[str] = ()) -> str:
    """Canonical text form of any graph kind.

    Examples
    --------
    >>> serialize_graph(MixedGraph(2, [(1, 0, "b")]))
    'v 2\\ne 0 1 b\\n'
    """
    if isinstance(g, Dag):
        g = g.to_mixed()
    elif isinstance(g, UndirectedGraph):
        g = g.to_mixed()
    lines = [f"# {c}" for c in comments]
    lines.append(f"v {g.n}")
    lines.extend(f"e {u} {v} {m}" for u, v, m in g.edges)
    return "\n".join(lines) + "\n"


def read_graph(path) -> MixedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(path, g, comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_graph(g, comments))
