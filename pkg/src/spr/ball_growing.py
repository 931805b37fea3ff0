"""Randomized ball growing: terminal radii grow by exponential increments.

Each round ``l`` draws, for every terminal in index order, an exponential
increment with mean ``D * r**l`` (``r = 1 + delta / log k``), raises that
terminal's radius, and absorbs every unassigned vertex the enlarged ball now
reaches inside the subgraph induced by the cell plus the still-unassigned
vertices.  The loop ends when every vertex is assigned.  Terminal order is
fixed and the unassigned set is refreshed after every single terminal, so a
run is a deterministic function of (instance, seed).

Randomness contract: the increment for (round, terminal) is derived from the
first variate of a Philox stream keyed by ``[seed, round * 2**32 +
terminal]``.  Draws therefore do not depend on evaluation order, and any
single draw can be reproduced from the seed alone.

Round means are computed by repeated multiplication (``mean *= r``), so the
recorded sequence is exactly what the float arithmetic produced.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NoNonTerminalsError, RoundCapExceededError
from .graph import Instance
from .partition import TerminalPartition, validate

__all__ = [
    "GrowthParams",
    "GrowthState",
    "RoundRecord",
    "AssignmentEvent",
    "RunTrace",
    "SubstreamSampler",
    "sample_erv",
    "compute_base_mean",
    "run",
    "replay_trace",
    "trace_to_dict",
]

DELTA_ANALYZED_MAX = 0.5


@dataclass(frozen=True)
class GrowthParams:
    """Knobs for a ball-growing run.

    Defaults follow the analyzed regime: delta = 1/2 and the bad-event
    constants c1 = 5400, c2 = 1/27, c3 = 30.  ``log_base`` controls every
    ``log k`` in the derived quantities (natural log by default).  A
    ``max_rounds`` of None means the safety cap is derived from the
    instance.  ``increment_distribution`` is "exponential" by default;
    "bounded-uniform" (uniform on [0, 2*mean]) is experimental and excluded
    from the certified checks.
    """

    delta: float = 0.5
    log_base: float = math.e
    c1: float = 5400.0
    c2: float = 1.0 / 27.0
    c3: float = 30.0
    max_rounds: int | None = None
    seed: int = 0
    complete_final_round: bool = False
    increment_distribution: str = "exponential"

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.delta > DELTA_ANALYZED_MAX:
            warnings.warn(
                f"delta={self.delta} is outside the analyzed regime (> 1/2)",
                stacklevel=2,
            )
        if self.log_base <= 1.0:
            raise ValueError("log_base must exceed 1")
        if min(self.c1, self.c2, self.c3) <= 0:
            raise ValueError("constants c1, c2, c3 must be positive")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.increment_distribution not in ("exponential", "bounded-uniform"):
            raise ValueError(
                f"unknown increment distribution {self.increment_distribution!r}"
            )

    def log_k(self, k: int) -> float:
        return math.log(k) / math.log(self.log_base)

    def growth_rate(self, k: int) -> float:
        return 1.0 + self.delta / self.log_k(k)


@dataclass
class GrowthState:
    """Mutable run state: radii, cell assignment, and the round clock."""

    radii: list[float]
    assignment: list[int]  # -1 while unassigned
    unassigned: int
    round_index: int = 0
    mean: float = 0.0

    def cells(self) -> list[list[int]]:
        cells: list[list[int]] = [[] for _ in range(len(self.radii))]
        for v, c in enumerate(self.assignment):
            if c >= 0:
                cells[c].append(v)
        return cells


@dataclass(frozen=True)
class RoundRecord:
    index: int
    mean: float
    draws: tuple[tuple[int, float], ...]  # (terminal, increment), index order


@dataclass(frozen=True)
class AssignmentEvent:
    vertex: int
    terminal: int
    round_index: int
    round_mean: float
    radius: float  # the terminal's radius when the ball absorbed the vertex


@dataclass
class RunTrace:
    params: GrowthParams
    base_mean: float | None
    growth_rate: float | None
    round_cap: int
    rounds: list[RoundRecord] = field(default_factory=list)
    events: list[AssignmentEvent] = field(default_factory=list)

    @property
    def total_rounds(self) -> int:
        return len(self.rounds)


class SubstreamSampler:
    """One uniform variate per (round, terminal), order-independent.

    The value for (round, terminal) is the first ``random()`` of a numpy
    Philox generator keyed by ``[seed, round * 2**32 + terminal]``.  A
    single bit generator is re-keyed in place, which is observably identical
    to constructing a fresh Philox per key (covered by a test).
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
        self._gen = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state

    def uniform(self, round_index: int, terminal: int) -> float:
        if not 0 <= terminal < 2**32:
            raise ValueError("terminal index exceeds the key lane")
        st = self._state
        st["state"]["key"][0] = self.seed
        st["state"]["key"][1] = (round_index << 32) | terminal
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4
        self._bitgen.state = st
        return self._gen.random()


class _SubstreamView:
    """Adapter exposing one (round, terminal) substream as an rng."""

    __slots__ = ("_sampler", "_round", "_terminal")

    def __init__(self, sampler: SubstreamSampler, round_index: int, terminal: int):
        self._sampler = sampler
        self._round = round_index
        self._terminal = terminal

    def random(self) -> float:
        return self._sampler.uniform(self._round, self._terminal)


def sample_erv(rng, mean: float) -> float:
    """Exponential variate with the given mean: mean * (-ln U), U in (0, 1]."""
    if mean <= 0:
        raise ValueError("mean must be positive")
    u = 1.0 - rng.random()
    return -mean * math.log(u)


def _sample_bounded_uniform(rng, mean: float) -> float:
    # Experimental alternative increment: uniform on [0, 2*mean].
    return 2.0 * mean * rng.random()


def compute_base_mean(inst: Instance, params: GrowthParams) -> float:
    """Base round mean: (delta / (100 log k)) times the smallest D_v."""
    best, _ = inst.nearest_terminal_all()
    candidates = [
        best[v] for v in range(inst.graph.vertex_count) if not inst.is_terminal(v)
    ]
    if not candidates:
        raise NoNonTerminalsError("every vertex is a terminal")
    return params.delta / (100.0 * params.log_k(inst.k)) * min(candidates)


def _default_round_cap(inst: Instance, base_mean: float, rate: float) -> int:
    # Coarse upper bound on the largest pairwise distance: twice the
    # eccentricity of the first terminal.
    reach = 2.0 * inst.graph.eccentricity(inst.terminals[0])
    n = inst.graph.vertex_count
    cap = 10 * math.ceil(math.log(n * reach / base_mean) / math.log(rate))
    return max(cap, 16)


def _grow(adjacency, assignment, terminal, source, radius):
    """Bounded Dijkstra inside the cell plus unassigned vertices.

    Returns (new members in absorption order, lower bound on the distance of
    the nearest vertex beyond the radius).  The bound stays valid as other
    cells grow, because removing vertices only lengthens distances.
    """
    pop = heapq.heappop
    push = heapq.heappush
    dist = {source: 0.0}
    heap = [(0.0, source)]
    absorbed = []
    frontier = math.inf
    while heap:
        d, u = pop(heap)
        if d > dist[u]:
            continue
        if d > radius:
            frontier = d
            break
        if assignment[u] == -1:
            absorbed.append(u)
            assignment[u] = terminal
        for v, w in adjacency[u]:
            if assignment[v] != -1 and assignment[v] != terminal:
                continue
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                push(heap, (nd, v))
    return absorbed, frontier


def run(inst: Instance, params: GrowthParams) -> tuple[TerminalPartition, RunTrace]:
    """Grow balls until every vertex is assigned; return partition and trace.

    Deterministic in (inst, params.seed).  When coverage completes in the
    middle of a round, the remaining terminals of that round are skipped
    unless ``params.complete_final_round`` is set, in which case their draws
    are still taken and recorded (they cannot absorb anything).
    """
    sampler = SubstreamSampler(params.seed)
    if params.increment_distribution == "exponential":
        draw = sample_erv
    else:
        draw = _sample_bounded_uniform

    def next_increment(round_index: int, terminal: int, mean: float) -> float:
        return draw(_SubstreamView(sampler, round_index, terminal), mean)

    return _run_loop(inst, params, next_increment)


def replay_trace(inst: Instance, trace: RunTrace) -> TerminalPartition:
    """Re-run the growth loop from a trace's recorded draws."""
    recorded = {
        (record.index, terminal): value
        for record in trace.rounds
        for terminal, value in record.draws
    }

    def next_increment(round_index: int, terminal: int, mean: float) -> float:
        return recorded[(round_index, terminal)]

    partition, _ = _run_loop(inst, trace.params, next_increment)
    return partition


def _run_loop(inst, params, next_increment):
    graph = inst.graph
    n = graph.vertex_count
    k = inst.k
    adjacency = graph.adjacency

    assignment = [-1] * n
    for j, t in enumerate(inst.terminals):
        assignment[t] = j
    state = GrowthState(radii=[0.0] * k, assignment=assignment, unassigned=n - k)

    if state.unassigned == 0:
        trace = RunTrace(params, None, None, 0)
        return TerminalPartition(assignment), trace

    base_mean = compute_base_mean(inst, params)
    rate = params.growth_rate(k)
    cap = params.max_rounds
    if cap is None:
        cap = _default_round_cap(inst, base_mean, rate)

    trace = RunTrace(params, base_mean, rate, cap)
    radii = state.radii
    frontier_bound = [0.0] * k
    terminals = inst.terminals
    state.mean = base_mean

    while state.unassigned > 0:
        if state.round_index >= cap:
            raise RoundCapExceededError(
                f"round cap {cap} reached with {state.unassigned} vertices unassigned"
            )
        mean = state.mean
        draws: list[tuple[int, float]] = []
        for j in range(k):
            if state.unassigned == 0 and not params.complete_final_round:
                break
            increment = next_increment(state.round_index, j, mean)
            draws.append((j, increment))
            radii[j] += increment
            if state.unassigned == 0 or radii[j] < frontier_bound[j]:
                continue
            absorbed, frontier = _grow(
                adjacency, state.assignment, j, terminals[j], radii[j]
            )
            frontier_bound[j] = frontier
            if absorbed:
                state.unassigned -= len(absorbed)
                radius = radii[j]
                for v in absorbed:
                    trace.events.append(
                        AssignmentEvent(v, j, state.round_index, mean, radius)
                    )
        trace.rounds.append(RoundRecord(state.round_index, mean, tuple(draws)))
        state.round_index += 1
        state.mean = mean * rate

    result = TerminalPartition(state.assignment)
    violations = validate(inst, result)
    if violations:  # structurally impossible; guards future edits
        raise AssertionError(f"ball growing produced an invalid partition: {violations}")
    return result, trace


def trace_to_dict(trace: RunTrace) -> dict:
    """JSON-ready trace: params echo, per-round draws, per-vertex events."""
    params = trace.params
    return {
        "schema_version": 1,
        "params": {
            "delta": params.delta,
            "log_base": params.log_base,
            "c1": params.c1,
            "c2": params.c2,
            "c3": params.c3,
            "max_rounds": params.max_rounds,
            "seed": params.seed,
            "complete_final_round": params.complete_final_round,
            "increment_distribution": params.increment_distribution,
        },
        "base_mean": trace.base_mean,
        "growth_rate": trace.growth_rate,
        "round_cap": trace.round_cap,
        "total_rounds": trace.total_rounds,
        "rounds": [
            {
                "index": record.index,
                "mean": record.mean,
                "draws": [
                    {"terminal": terminal, "value": value}
                    for terminal, value in record.draws
                ],
            }
            for record in trace.rounds
        ],
        "events": [
            {
                "vertex": event.vertex,
                "terminal": event.terminal,
                "round": event.round_index,
                "mean": event.round_mean,
                "radius": event.radius,
            }
            for event in trace.events
        ],
    }
