"""Terminal-centered partitions and their contracted minors.

A valid partition assigns every vertex to exactly one terminal cell, each
cell containing its terminal and inducing a connected subgraph.  Contracting
the cells gives a graph on the terminals whose edge (i, j) exists exactly
when some input edge crosses the two cells, weighted by the true source
distance between the terminals.  Distortion is the worst ratio of contracted
distance to source distance over all terminal pairs.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

from .errors import InvalidPartitionError, TooLargeError
from .graph import Instance

__all__ = [
    "TerminalPartition",
    "TerminalMinor",
    "Violation",
    "DistortionResult",
    "OracleResult",
    "validate",
    "contract",
    "distortion",
    "oracle_optimal",
    "ORACLE_MAX_NON_TERMINALS",
]

ORACLE_MAX_NON_TERMINALS = 8


@dataclass(frozen=True)
class TerminalPartition:
    """assignment[v] = index of the terminal cell containing vertex v."""

    assignment: tuple[int, ...]

    def __init__(self, assignment):
        object.__setattr__(self, "assignment", tuple(assignment))

    def cell(self, j: int) -> list[int]:
        return [v for v, c in enumerate(self.assignment) if c == j]


@dataclass(frozen=True)
class Violation:
    cell: int
    reason: str


@dataclass(frozen=True)
class TerminalMinor:
    """Contracted graph on the terminals; weights are source distances."""

    terminals: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]  # (i, j, w) with i < j, sorted

    @property
    def k(self) -> int:
        return len(self.terminals)

    def distance(self, i: int, j: int) -> float:
        """Shortest-path distance between terminal indices in the minor."""
        if i == j:
            return 0.0
        adj: dict[int, list[tuple[int, float]]] = {x: [] for x in range(self.k)}
        for a, b, w in self.edges:
            adj[a].append((b, w))
            adj[b].append((a, w))
        dist = {i: 0.0}
        heap = [(0.0, i)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, math.inf):
                continue
            if u == j:
                return d
            for v, w in adj[u]:
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return math.inf

    def all_distances(self) -> dict[tuple[int, int], float]:
        dist = [[math.inf] * self.k for _ in range(self.k)]
        for x in range(self.k):
            dist[x][x] = 0.0
        for a, b, w in self.edges:
            dist[a][b] = min(dist[a][b], w)
            dist[b][a] = dist[a][b]
        for mid in range(self.k):
            dm = dist[mid]
            for a in range(self.k):
                via = dist[a][mid]
                if via == math.inf:
                    continue
                row = dist[a]
                for b in range(self.k):
                    alt = via + dm[b]
                    if alt < row[b]:
                        row[b] = alt
        return {
            (a, b): dist[a][b] for a in range(self.k) for b in range(a + 1, self.k)
        }


def validate(inst: Instance, partition: TerminalPartition) -> list[Violation]:
    """Empty list when both partition invariants hold; violations otherwise."""
    n = inst.graph.vertex_count
    k = inst.k
    assignment = partition.assignment
    violations: list[Violation] = []
    if len(assignment) != n:
        return [Violation(-1, f"assignment covers {len(assignment)} of {n} vertices")]
    for v, c in enumerate(assignment):
        if not 0 <= c < k:
            violations.append(Violation(-1, f"vertex {v} assigned to invalid cell {c}"))
    if violations:
        return violations
    for j, t in enumerate(inst.terminals):
        if assignment[t] != j:
            violations.append(
                Violation(j, f"terminal {t} assigned to cell {assignment[t]}, not {j}")
            )
    # Each cell must induce a connected subgraph containing its terminal.
    for j, t in enumerate(inst.terminals):
        if assignment[t] != j:
            continue
        members = {v for v, c in enumerate(assignment) if c == j}
        seen = {t}
        stack = [t]
        while stack:
            u = stack.pop()
            for v, _ in inst.graph.adjacency[u]:
                if v in members and v not in seen:
                    seen.add(v)
                    stack.append(v)
        if seen != members:
            missing = sorted(members - seen)
            violations.append(
                Violation(j, f"cell {j} disconnected: {missing} unreachable from terminal {t}")
            )
    return violations


def contract(inst: Instance, partition: TerminalPartition) -> TerminalMinor:
    """Contract each cell to its terminal; raises on invalid partitions."""
    violations = validate(inst, partition)
    if violations:
        raise InvalidPartitionError("; ".join(v.reason for v in violations))
    assignment = partition.assignment
    crossing: set[tuple[int, int]] = set()
    for u, v, _ in inst.graph.edges:
        a, b = assignment[u], assignment[v]
        if a != b:
            crossing.add((a, b) if a < b else (b, a))
    edges = tuple(
        (i, j, inst.graph.distance(inst.terminals[i], inst.terminals[j]))
        for i, j in sorted(crossing)
    )
    return TerminalMinor(tuple(inst.terminals), edges)


@dataclass(frozen=True)
class DistortionResult:
    max_ratio: float
    pairs: tuple[tuple[int, int, float, float, float], ...]  # (i, j, source, minor, ratio)


def distortion(inst: Instance, minor: TerminalMinor) -> DistortionResult:
    """Worst and per-pair ratio of minor distance over source distance."""
    k = inst.k
    minor_dist = minor.all_distances()
    rows = []
    worst = 1.0
    for i in range(k):
        for j in range(i + 1, k):
            d0 = inst.graph.distance(inst.terminals[i], inst.terminals[j])
            d1 = minor_dist[(i, j)]
            ratio = d1 / d0
            worst = max(worst, ratio)
            rows.append((i, j, d0, d1, ratio))
    return DistortionResult(worst, tuple(rows))


@dataclass(frozen=True)
class OracleResult:
    distortion: float
    partition: TerminalPartition


def oracle_optimal(inst: Instance) -> OracleResult:
    """Brute-force minimum distortion over all valid partitions.

    Enumerates every assignment of the non-terminals to terminal cells and
    keeps the best valid one (ties resolved toward the lexicographically
    smallest assignment).  Only feasible for tiny instances; the limit is
    ORACLE_MAX_NON_TERMINALS non-terminals.
    """
    free = inst.non_terminals()
    if len(free) > ORACLE_MAX_NON_TERMINALS:
        raise TooLargeError(
            f"{len(free)} non-terminals exceed the enumeration limit "
            f"{ORACLE_MAX_NON_TERMINALS}"
        )
    n = inst.graph.vertex_count
    base = [0] * n
    for j, t in enumerate(inst.terminals):
        base[t] = j

    best: OracleResult | None = None
    for combo in itertools.product(range(inst.k), repeat=len(free)):
        assignment = base[:]
        for v, c in zip(free, combo):
            assignment[v] = c
        candidate = TerminalPartition(assignment)
        if validate(inst, candidate):
            continue
        result = distortion(inst, contract(inst, candidate))
        if best is None or result.max_ratio < best.distortion:
            best = OracleResult(result.max_ratio, candidate)
    assert best is not None  # the nearest-terminal partition is always valid
    return best
