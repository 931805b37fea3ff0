"""Per-pair path bookkeeping over run traces.

For each terminal pair the canonical path between them is cut into cells by
a greedy sweep: a cell starts at the first uncovered interior vertex and
extends as far as the anchor's length budget allows.  Replaying a run trace
then records, per cell, which terminals "reach" it: an assignment batch that
hits still-active cell vertices deactivates the whole index range between
its first and last hit and emits a detour through the absorbing terminal.
Chaining the deactivating detours end-to-end (and merging consecutive ones
through the same terminal) yields a witness walk whose length bounds the
contracted distance of the pair from above.

Also here: the bad-event detectors over traces (assigned to a far terminal;
assigned too early relative to the vertex's terminal distance; too many
distinct terminals reaching one cell) and the closed-form distortion bound.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace

from .ball_growing import GrowthParams, RunTrace, run
from .errors import IncompleteCellsError, TraceMismatchError
from .graph import Instance, ShortestPath
from .partition import contract, distortion

__all__ = [
    "PathCell",
    "TerminalDetour",
    "Reach",
    "ReachLog",
    "DetourPath",
    "BadEventReport",
    "path_partition",
    "track_reaches",
    "merge_detours",
    "build_detour_path",
    "detect_bad_events",
    "distortion_bound",
    "distortion_bound_coefficient",
    "TrialResult",
    "ExperimentReport",
    "run_experiment",
]


@dataclass(frozen=True)
class PathCell:
    """A run of consecutive interior path vertices, anchored at its first one.

    ``start`` and ``end`` are inclusive indices into the pair's canonical
    path sequence.  The threshold is the anchor's internal-length budget;
    the final cell of a path is kept even if its external length falls
    short of it.
    """

    pair: tuple[int, int]
    start: int
    end: int
    anchor: int
    internal_length: float
    external_length: float
    threshold: float
    is_final: bool


@dataclass(frozen=True)
class TerminalDetour:
    """Replacement walk for indices [q_min, q_max]: into the terminal and back.

    The walk is inbound (v_{q_min} -> t), outbound (t -> v_{q_max}), then the
    path edge to v_{q_max + 1}.
    """

    q_min: int
    q_max: int
    terminal: int
    inbound: ShortestPath
    outbound: ShortestPath
    exit_vertex: int
    exit_weight: float

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.inbound.vertices + self.outbound.vertices[1:] + (self.exit_vertex,)

    @property
    def length(self) -> float:
        return self.inbound.length + self.outbound.length + self.exit_weight


@dataclass(frozen=True)
class Reach:
    order: int
    terminal: int
    q_min: int
    q_max: int
    detour: TerminalDetour


@dataclass
class ReachLog:
    pair: tuple[int, int]
    path: tuple[int, ...]
    cells: list[PathCell]
    reaches: list[list[Reach]]  # indexed like cells
    cover: dict[int, Reach]  # interior index -> the reach that deactivated it
    fully_deactivated: bool


@dataclass(frozen=True)
class DetourPath:
    vertices: tuple[int, ...]
    length: float
    detours: tuple[TerminalDetour, ...]


def path_partition(
    inst: Instance, i: int, j: int, params: GrowthParams
) -> list[PathCell]:
    """Greedy sweep of the pair's canonical path into anchored cells.

    Each cell starts at the first uncovered interior vertex v_a and extends
    to the largest b with dist(v_a, v_b) <= threshold(v_a), where the
    threshold is c2 * D(v_a) * delta / (5 log k).  Terminal anchors have
    D = 0 and produce singleton cells.
    """
    if i == j:
        raise ValueError("a path partition needs two distinct terminals")
    path = inst.graph.shortest_path(inst.terminals[i], inst.terminals[j]).vertices
    last = len(path) - 1
    if last < 2:
        return []
    prefix = [0.0]
    for x, y in zip(path, path[1:]):
        prefix.append(prefix[-1] + inst.graph.edge_weight(x, y))
    nearest, _ = inst.nearest_terminal_all()
    scale = params.c2 * params.delta / (5.0 * params.log_k(inst.k))

    cells: list[PathCell] = []
    a = 1
    while a <= last - 1:
        anchor = path[a]
        tau = scale * nearest[anchor]
        b = a
        while b + 1 <= last - 1 and prefix[b + 1] - prefix[a] <= tau:
            b += 1
        cells.append(
            PathCell(
                pair=(i, j),
                start=a,
                end=b,
                anchor=anchor,
                internal_length=prefix[b] - prefix[a],
                external_length=prefix[b + 1] - prefix[a - 1],
                threshold=tau,
                is_final=(b == last - 1),
            )
        )
        a = b + 1
    return cells


def _check_trace(inst: Instance, trace: RunTrace) -> None:
    n = inst.graph.vertex_count
    seen: set[int] = set()
    for event in trace.events:
        if not 0 <= event.vertex < n:
            raise TraceMismatchError(f"event vertex {event.vertex} out of range")
        if inst.is_terminal(event.vertex):
            raise TraceMismatchError(f"terminal {event.vertex} has an assignment event")
        if event.vertex in seen:
            raise TraceMismatchError(f"vertex {event.vertex} assigned twice")
        if not 0 <= event.terminal < inst.k:
            raise TraceMismatchError(f"event terminal {event.terminal} out of range")
        seen.add(event.vertex)


def _make_detour(
    inst: Instance, path: tuple[int, ...], q_min: int, q_max: int, terminal: int
) -> TerminalDetour:
    t = inst.terminals[terminal]
    return TerminalDetour(
        q_min=q_min,
        q_max=q_max,
        terminal=terminal,
        inbound=inst.graph.shortest_path(path[q_min], t),
        outbound=inst.graph.shortest_path(t, path[q_max]),
        exit_vertex=path[q_max + 1],
        exit_weight=inst.graph.edge_weight(path[q_max], path[q_max + 1]),
    )


def track_reaches(
    inst: Instance, trace: RunTrace, i: int, j: int, cells: list[PathCell]
) -> ReachLog:
    """Replay the trace against one pair's cells and log every reach.

    Events are processed in run order, batched per (round, terminal) ball
    expansion.  Interior vertices that are themselves terminals count as
    assigned before the first round, so they trigger their own singleton
    reaches up front.  A batch touching only inactive vertices of a cell is
    not a reach.
    """
    _check_trace(inst, trace)
    path = inst.graph.shortest_path(inst.terminals[i], inst.terminals[j]).vertices
    last = len(path) - 1
    log = ReachLog((i, j), path, cells, [[] for _ in cells], {}, True)
    if last < 2:
        return log

    index_of = {path[q]: q for q in range(1, last)}
    active = [False] + [True] * (last - 1)
    cell_at = {}
    for ci, cell in enumerate(cells):
        for q in range(cell.start, cell.end + 1):
            cell_at[q] = ci

    counter = 0

    def process(terminal: int, vertices: list[int]) -> None:
        nonlocal counter
        by_cell: dict[int, list[int]] = {}
        for v in vertices:
            q = index_of.get(v)
            if q is not None and active[q]:
                ci = cell_at.get(q)
                if ci is not None:
                    by_cell.setdefault(ci, []).append(q)
        for ci in sorted(by_cell):
            qs = by_cell[ci]
            q_min, q_max = min(qs), max(qs)
            reach = Reach(
                counter, terminal, q_min, q_max, _make_detour(inst, path, q_min, q_max, terminal)
            )
            counter += 1
            log.reaches[ci].append(reach)
            for q in range(q_min, q_max + 1):
                if active[q]:
                    active[q] = False
                    log.cover[q] = reach

    for h, t in enumerate(inst.terminals):
        if t in index_of:
            process(h, [t])

    batch: list[int] = []
    batch_key: tuple[int, int] | None = None
    for event in trace.events:
        key = (event.round_index, event.terminal)
        if key != batch_key and batch:
            process(batch_key[1], batch)
            batch = []
        batch_key = key
        batch.append(event.vertex)
    if batch:
        process(batch_key[1], batch)

    log.fully_deactivated = not any(active[1:last])
    return log


def merge_detours(detours: list[TerminalDetour]) -> list[TerminalDetour]:
    """Fuse consecutive detours with adjacent ranges and the same terminal.

    Merging replaces the middle excursion with a single pass through the
    shared terminal; it repeats until no adjacent same-terminal pair is
    left.  Detours whose ranges do not abut are never merged.
    """
    merged: list[TerminalDetour] = []
    for detour in detours:
        while (
            merged
            and merged[-1].terminal == detour.terminal
            and merged[-1].q_max + 1 == detour.q_min
        ):
            prev = merged.pop()
            detour = TerminalDetour(
                q_min=prev.q_min,
                q_max=detour.q_max,
                terminal=detour.terminal,
                inbound=prev.inbound,
                outbound=detour.outbound,
                exit_vertex=detour.exit_vertex,
                exit_weight=detour.exit_weight,
            )
        merged.append(detour)
    return merged


def build_detour_path(inst: Instance, i: int, j: int, log: ReachLog) -> DetourPath:
    """Concatenate deactivating detours into a terminal-to-terminal walk.

    Within each cell the chain follows the reach that deactivated the
    current index, which always resumes exactly where the previous detour
    stopped; cells abut, so the chain spans the whole interior.  The walk
    starts with the first path edge and is generally not simple.  Its length
    is an upper bound on the contracted distance of the pair.
    """
    path = log.path
    last = len(path) - 1
    if last < 2:
        w = inst.graph.edge_weight(path[0], path[1])
        return DetourPath((path[0], path[1]), w, ())
    if not log.fully_deactivated:
        raise IncompleteCellsError(f"pair {log.pair} has active cells left")

    chain: list[TerminalDetour] = []
    for cell in log.cells:
        pos = cell.start
        while pos <= cell.end:
            reach = log.cover[pos]
            detour = reach.detour
            if detour.q_min != pos:
                raise AssertionError(
                    "deactivation chain broke; cover ranges must tile each cell"
                )
            chain.append(detour)
            pos = detour.q_max + 1

    detours = tuple(merge_detours(chain))
    vertices = [path[0]]
    total = inst.graph.edge_weight(path[0], path[1])
    for detour in detours:
        vertices.extend(detour.vertices if len(vertices) == 1 else detour.vertices[1:])
        total += detour.length
    return DetourPath(tuple(vertices), total, detours)


@dataclass
class BadEventReport:
    far_events: list[tuple[int, int, float, float]] = field(default_factory=list)
    early_events: list[tuple[int, float, float]] = field(default_factory=list)
    many_events: list[tuple[tuple[int, int], int, int, int, float]] = field(
        default_factory=list
    )
    reach_logs: dict[tuple[int, int], ReachLog] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        return {
            "far": len(self.far_events),
            "early": len(self.early_events),
            "many": len(self.many_events),
        }


def _round_of(trace: RunTrace, z: float) -> int:
    """Index of the first round whose mean reaches z (the Round-z convention).

    Computed from the recorded base mean by the same repeated multiplication
    the run used, and extended past the end of the trace if needed.
    """
    mean = trace.base_mean
    index = 0
    while mean < z:
        mean *= trace.growth_rate
        index += 1
    return index


def detect_bad_events(
    inst: Instance, trace: RunTrace, params: GrowthParams
) -> BadEventReport:
    """Scan a trace for the three bad-event families.

    far: a vertex assigned to a terminal at distance >= c1 * D_v.
    early: a vertex assigned during or before the first round whose mean
    reaches c2 * D_v * delta / log k.
    many: a path cell reached by at least c3 * log k distinct terminals.
    """
    _check_trace(inst, trace)
    report = BadEventReport()
    nearest, _ = inst.nearest_terminal_all()
    log_k = params.log_k(inst.k)

    for event in trace.events:
        dv = nearest[event.vertex]
        far_threshold = params.c1 * dv
        dist = inst.graph.distance(inst.terminals[event.terminal], event.vertex)
        if dist >= far_threshold:
            report.far_events.append((event.vertex, event.terminal, dist, far_threshold))
        z = params.c2 * dv * params.delta / log_k
        if event.round_index <= _round_of(trace, z):
            report.early_events.append((event.vertex, event.round_mean, z))

    many_threshold = params.c3 * log_k
    for i in range(inst.k):
        for j in range(i + 1, inst.k):
            cells = path_partition(inst, i, j, params)
            log = track_reaches(inst, trace, i, j, cells)
            report.reach_logs[(i, j)] = log
            for ci, cell in enumerate(cells):
                distinct = len({reach.terminal for reach in log.reaches[ci]})
                if distinct >= many_threshold:
                    report.many_events.append(
                        ((i, j), cell.start, cell.end, distinct, many_threshold)
                    )
    return report


def distortion_bound_coefficient(params: GrowthParams) -> float:
    return 40.0 * params.c3 * (params.c1 + 1.0) / params.c2


def distortion_bound(params: GrowthParams, k: float) -> float:
    """Closed-form worst-case distortion: 1 + 40 c3 (c1 + 1) / c2 * log^2 k."""
    if k < 2:
        raise ValueError("the bound needs at least two terminals")
    log_k = math.log(k) / math.log(params.log_base)
    return 1.0 + distortion_bound_coefficient(params) * log_k * log_k


# -- experiment harness ------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    distortion: float
    rounds: int
    far: int
    early: int
    many: int
    detour_pairs: int
    detour_violations: int
    min_detour_slack: float


@dataclass
class ExperimentReport:
    seed: int
    trials: list[TrialResult]
    graph_summary: dict
    preprocess_summary: dict | None

    def summary(self) -> dict:
        values = [t.distortion for t in self.trials]
        n = len(self.trials)
        return {
            "trials": n,
            "distortion_median": statistics.median(values),
            "distortion_max": max(values),
            "bad_event_mean_counts": {
                "far": sum(t.far for t in self.trials) / n,
                "early": sum(t.early for t in self.trials) / n,
                "many": sum(t.many for t in self.trials) / n,
            },
            "trials_with_bad_event": sum(
                1 for t in self.trials if t.far or t.early or t.many
            ),
            "detour_violations": sum(t.detour_violations for t in self.trials),
        }


def run_experiment(
    inst: Instance,
    params: GrowthParams,
    trials: int,
    preprocess: bool = True,
) -> ExperimentReport:
    """Repeated runs with derived seeds; per-trial distortion and diagnostics.

    Trial t uses seed (params.seed + t).  When ``preprocess`` is set the
    trials run on the distance-exact reduced instance, which leaves all
    terminal distances (and hence distortion) unchanged.
    """
    from .preprocess import exact_minor

    if trials < 1:
        raise ValueError("need at least one trial")
    pre = exact_minor(inst) if preprocess else None
    work = pre.minor if pre is not None else inst

    results: list[TrialResult] = []
    for index in range(trials):
        trial_params = replace(params, seed=(params.seed + index) % 2**64)
        part, trace = run(work, trial_params)
        minor = contract(work, part)
        dist_result = distortion(work, minor)
        report = detect_bad_events(work, trace, trial_params)

        minor_dist = minor.all_distances()
        pairs = 0
        violations = 0
        slack = math.inf
        for (i, j), log in sorted(report.reach_logs.items()):
            walk = build_detour_path(work, i, j, log)
            pairs += 1
            margin = walk.length - minor_dist[(i, j)]
            slack = min(slack, margin)
            if margin < 0:
                violations += 1

        counts = report.counts()
        results.append(
            TrialResult(
                trial=index,
                seed=trial_params.seed,
                distortion=dist_result.max_ratio,
                rounds=trace.total_rounds,
                far=counts["far"],
                early=counts["early"],
                many=counts["many"],
                detour_pairs=pairs,
                detour_violations=violations,
                min_detour_slack=slack,
            )
        )

    graph_summary = {
        "vertices": inst.graph.vertex_count,
        "edges": inst.graph.edge_count,
        "terminals": inst.k,
    }
    preprocess_summary = None
    if pre is not None:
        preprocess_summary = {
            "minor_vertices": pre.minor.graph.vertex_count,
            "minor_edges": pre.minor.graph.edge_count,
            "non_terminals": pre.non_terminal_count,
            "passes": pre.passes,
        }
    return ExperimentReport(params.seed, results, graph_summary, preprocess_summary)
