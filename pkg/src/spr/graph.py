"""Undirected weighted graphs with a canonical unique-shortest-path system.

The canonical path between two vertices is the minimum over all shortest
paths under the order (length, hop count, lexicographic vertex sequence).
This tie-break is deterministic across platforms and yields a consistent
path system: any subpath of a canonical path is itself the canonical path
between its endpoints.  Directed queries matter: ``shortest_path(s, t)``
is canonical for the direction s -> t.

Weights are 64-bit floats.  Integer-valued weights make every distance an
exact integer sum, which the exactness tests rely on.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    CenterNotAllowedError,
    DisconnectedError,
    DuplicateEdgeError,
    GraphError,
    IsTerminalError,
    NonPositiveWeightError,
    SelfLoopError,
)

__all__ = [
    "WeightedGraph",
    "Instance",
    "ShortestPath",
    "build_graph",
    "shortest_path",
    "distance",
    "restricted_ball",
    "nearest_terminal_distance",
]


@dataclass(frozen=True)
class ShortestPath:
    """A canonical shortest path: vertex sequence from source to target."""

    vertices: tuple[int, ...]
    length: float


class _SourceLabels:
    """Single-source results: distances, hop counts, canonical parents."""

    __slots__ = ("dist", "hop", "parent")

    def __init__(self, dist, hop, parent):
        self.dist = dist
        self.hop = hop
        self.parent = parent


class WeightedGraph:
    """Immutable undirected graph with positive edge weights.

    Construct through :func:`build_graph`, which validates the invariants
    (positive finite weights, no self-loops, no duplicate edges, connected).
    Query results are cached per source; the object is safe to share across
    concurrent trials because nothing is mutated after the cache fills.
    """

    __slots__ = ("vertex_count", "edges", "adjacency", "_weight_of", "_labels")

    def __init__(self, vertex_count: int, edges: Sequence[tuple[int, int, float]]):
        self.vertex_count = vertex_count
        self.edges = tuple(
            (u, v, float(w)) if u < v else (v, u, float(w)) for u, v, w in edges
        )
        adj: list[list[tuple[int, float]]] = [[] for _ in range(vertex_count)]
        weight_of: dict[tuple[int, int], float] = {}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
            weight_of[(u, v)] = w
        for lst in adj:
            lst.sort()
        self.adjacency = tuple(tuple(lst) for lst in adj)
        self._weight_of = weight_of
        self._labels: dict[int, _SourceLabels] = {}

    # -- basic queries -------------------------------------------------

    def neighbors(self, v: int) -> tuple[tuple[int, float], ...]:
        return self.adjacency[v]

    def edge_weight(self, u: int, v: int) -> float:
        key = (u, v) if u < v else (v, u)
        return self._weight_of[key]

    def has_edge(self, u: int, v: int) -> bool:
        key = (u, v) if u < v else (v, u)
        return key in self._weight_of

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def is_integer_weighted(self) -> bool:
        return all(w == int(w) for _, _, w in self.edges)

    # -- canonical shortest paths ---------------------------------------

    def _single_source(self, s: int) -> _SourceLabels:
        """Distances plus canonical parents for every target.

        Phase 1 is plain Dijkstra.  Phase 2 walks the shortest-path DAG in
        distance order, minimizing hop count, then picks the parent whose
        canonical sequence is lexicographically smallest.  Sequences are
        never materialized: vertices on the same hop level are ranked by
        (parent rank, vertex id), which orders equal-length sequences
        exactly as direct lexicographic comparison would.
        """
        cached = self._labels.get(s)
        if cached is not None:
            return cached
        n = self.vertex_count
        adjacency = self.adjacency
        inf = math.inf

        dist = [inf] * n
        dist[s] = 0.0
        heap = [(0.0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in adjacency[u]:
                nd = d + w
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))

        order = sorted(range(n), key=lambda v: (dist[v], v))
        hop = [0] * n
        for v in order:
            if v == s:
                continue
            dv = dist[v]
            best = None
            for u, w in adjacency[v]:
                if dist[u] + w == dv:
                    h = hop[u] + 1
                    if best is None or h < best:
                        best = h
            hop[v] = best if best is not None else 0

        # Group by hop level; within a level, (parent's rank, vertex id)
        # orders equal-length canonical sequences lexicographically.
        levels: dict[int, list[int]] = {}
        for v in order:
            if v != s:
                levels.setdefault(hop[v], []).append(v)
        parent = [-1] * n
        rank = [0] * n
        for h in sorted(levels):
            level = levels[h]
            for v in level:
                dv = dist[v]
                best_u = -1
                for u, w in adjacency[v]:
                    if (
                        hop[u] == h - 1
                        and dist[u] + w == dv
                        and (best_u < 0 or (rank[u], u) < (rank[best_u], best_u))
                    ):
                        best_u = u
                parent[v] = best_u
            level = sorted(level, key=lambda v: (rank[parent[v]], v))
            for i, v in enumerate(level):
                rank[v] = i

        labels = _SourceLabels(dist, hop, parent)
        self._labels[s] = labels
        return labels

    def distance(self, s: int, t: int) -> float:
        """Length of the shortest path between s and t."""
        self._check_vertex(s)
        self._check_vertex(t)
        return self._single_source(s).dist[t]

    def shortest_path(self, s: int, t: int) -> ShortestPath:
        """Canonical shortest path from s to t.

        Ties are broken by hop count, then by the lexicographically
        smallest vertex sequence read from s.
        """
        self._check_vertex(s)
        self._check_vertex(t)
        labels = self._single_source(s)
        seq = [t]
        v = t
        while v != s:
            v = labels.parent[v]
            seq.append(v)
        seq.reverse()
        return ShortestPath(tuple(seq), labels.dist[t])

    def eccentricity(self, s: int) -> float:
        return max(self._single_source(s).dist)

    def restricted_ball(self, allowed: Iterable[int], center: int, radius: float) -> set[int]:
        """Vertices within ``radius`` of ``center`` in the induced subgraph.

        Distances are measured inside the subgraph induced by ``allowed``;
        paths may not leave that set.
        """
        allowed_set = allowed if isinstance(allowed, (set, frozenset)) else set(allowed)
        if center not in allowed_set:
            raise CenterNotAllowedError(f"center {center} is not in the allowed set")
        if radius < 0:
            raise GraphError("radius must be nonnegative")
        dist = {center: 0.0}
        heap = [(0.0, center)]
        ball = set()
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            if d > radius:
                break
            ball.add(u)
            for v, w in self.adjacency[u]:
                if v not in allowed_set:
                    continue
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return ball

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise GraphError(f"vertex {v} out of range [0, {self.vertex_count})")


def build_graph(vertex_count: int, edge_list: Sequence[tuple[int, int, float]]) -> WeightedGraph:
    """Validate and build a connected weighted graph.

    Raises on nonpositive/non-finite weights, self-loops, duplicate edges,
    and disconnected inputs.  Adjacency lists come out sorted by neighbor id.
    """
    if vertex_count < 1:
        raise GraphError("vertex count must be positive")
    if not edge_list and vertex_count > 1:
        raise DisconnectedError("empty edge list on more than one vertex")
    seen: set[tuple[int, int]] = set()
    for u, v, w in edge_list:
        if not 0 <= u < vertex_count or not 0 <= v < vertex_count:
            raise GraphError(f"edge ({u}, {v}) has an endpoint out of range")
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}")
        if not (w > 0 and math.isfinite(w)):
            raise NonPositiveWeightError(f"edge ({u}, {v}) has weight {w!r}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {key}")
        seen.add(key)
    graph = WeightedGraph(vertex_count, edge_list)
    _check_connected(graph)
    return graph


def _check_connected(graph: WeightedGraph) -> None:
    n = graph.vertex_count
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for v, _ in graph.adjacency[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    if count != n:
        raise DisconnectedError(f"graph has {n} vertices but only {count} reachable from 0")


class Instance:
    """A connected weighted graph together with an ordered terminal set.

    Terminal order is fixed: index j names the j-th terminal for the whole
    run.  Immutable; shares the graph's distance cache.
    """

    __slots__ = ("graph", "terminals", "_terminal_index", "_nearest")

    def __init__(self, graph: WeightedGraph, terminals: Sequence[int]):
        terminals = tuple(terminals)
        if len(terminals) < 2:
            raise GraphError("an instance needs at least two terminals")
        if len(set(terminals)) != len(terminals):
            raise GraphError("terminals must be distinct")
        for t in terminals:
            if not 0 <= t < graph.vertex_count:
                raise GraphError(f"terminal {t} out of range")
        self.graph = graph
        self.terminals = terminals
        self._terminal_index = {t: j for j, t in enumerate(terminals)}
        self._nearest: tuple[list[float], list[int]] | None = None

    @property
    def k(self) -> int:
        return len(self.terminals)

    def is_terminal(self, v: int) -> bool:
        return v in self._terminal_index

    def terminal_index(self, v: int) -> int:
        return self._terminal_index[v]

    def non_terminals(self) -> list[int]:
        return [v for v in range(self.graph.vertex_count) if v not in self._terminal_index]

    def nearest_terminal_all(self) -> tuple[list[float], list[int]]:
        """Per vertex: distance to the nearest terminal and its index.

        Terminals map to (0.0, own index).  Ties go to the smaller terminal
        index.  Cached.
        """
        if self._nearest is None:
            n = self.graph.vertex_count
            best = [math.inf] * n
            who = [-1] * n
            for j, t in enumerate(self.terminals):
                row = self.graph._single_source(t).dist
                for v in range(n):
                    if row[v] < best[v]:
                        best[v] = row[v]
                        who[v] = j
            for j, t in enumerate(self.terminals):
                best[t] = 0.0
                who[t] = j
            self._nearest = (best, who)
        return self._nearest

    def nearest_terminal_distance(self, v: int) -> tuple[int, float]:
        """(terminal index, distance) for a non-terminal vertex."""
        self.graph._check_vertex(v)
        if self.is_terminal(v):
            raise IsTerminalError(f"vertex {v} is a terminal")
        best, who = self.nearest_terminal_all()
        return who[v], best[v]


# Module-level forms of the core operations, for callers that prefer
# functions over methods.

def shortest_path(g: WeightedGraph, s: int, t: int) -> ShortestPath:
    return g.shortest_path(s, t)


def distance(g: WeightedGraph, s: int, t: int) -> float:
    return g.distance(s, t)


def restricted_ball(g: WeightedGraph, allowed: Iterable[int], center: int, radius: float) -> set[int]:
    return g.restricted_ball(allowed, center, radius)


def nearest_terminal_distance(inst: Instance, v: int) -> tuple[int, float]:
    return inst.nearest_terminal_distance(v)
