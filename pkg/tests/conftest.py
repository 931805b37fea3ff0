"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's own algorithms:
all-pairs distances come from Floyd-Warshall, canonical paths from
exhaustive simple-path enumeration.
"""

from __future__ import annotations

import math
import random

import pytest

from spr import Instance, TerminalPartition, build_graph


def random_connected_instance(seed, n, k, wmax=10, extra_factor=1.0):
    """Random connected graph with integer weights and k random terminals."""
    rng = random.Random(seed)
    edges = []
    used = set()
    for v in range(1, n):
        u = rng.randrange(v)
        edges.append((u, v, float(rng.randint(1, wmax))))
        used.add((u, v))
    for _ in range(int(extra_factor * n)):
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in used:
            continue
        used.add(key)
        edges.append((key[0], key[1], float(rng.randint(1, wmax))))
    terminals = rng.sample(range(n), k)
    return Instance(build_graph(n, edges), terminals)


def floyd_warshall(g):
    """All-pairs distances by a different algorithm than the library's."""
    n = g.vertex_count
    dist = [[math.inf] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = 0.0
    for u, v, w in g.edges:
        if w < dist[u][v]:
            dist[u][v] = w
            dist[v][u] = w
    for mid in range(n):
        row_mid = dist[mid]
        for a in range(n):
            via = dist[a][mid]
            if via == math.inf:
                continue
            row = dist[a]
            for b in range(n):
                alt = via + row_mid[b]
                if alt < row[b]:
                    row[b] = alt
    return dist


def all_simple_paths(g, s, t):
    paths = []
    seq = [s]

    def dfs(u, visited, length):
        if u == t:
            paths.append((tuple(seq), length))
            return
        for v, w in g.adjacency[u]:
            if v not in visited:
                visited.add(v)
                seq.append(v)
                dfs(v, visited, length + w)
                seq.pop()
                visited.discard(v)

    dfs(s, {s}, 0.0)
    return paths


def brute_canonical(g, s, t):
    """Reference canonical path: min over (length, hop count, sequence)."""
    if s == t:
        return (s,), 0.0
    paths = all_simple_paths(g, s, t)
    seq, length = min(paths, key=lambda p: (p[1], len(p[0]), p[0]))
    return seq, length


def subdivide(inst, parts=5):
    """Split each edge into ``parts`` segments of the original weight.

    Distances scale by exactly ``parts``.  New vertex ids are assigned in
    blocks, one block per edge in sorted endpoint order, ascending along the
    lower-to-higher endpoint direction, which keeps the canonical tie-break
    aligned with the original graph's.
    """
    g = inst.graph
    next_id = g.vertex_count
    new_edges = []
    for u, v, w in sorted(g.edges):
        chain = [u] + [next_id + i for i in range(parts - 1)] + [v]
        next_id += parts - 1
        for x, y in zip(chain, chain[1:]):
            new_edges.append((x, y, w))
    return Instance(build_graph(next_id, new_edges), inst.terminals)


def random_valid_partition(inst, rng):
    """Grow cells by absorbing random frontier vertices; always valid."""
    n = inst.graph.vertex_count
    assignment = [-1] * n
    for j, t in enumerate(inst.terminals):
        assignment[t] = j
    unassigned = n - inst.k
    while unassigned:
        candidates = [
            (u, v)
            for u in range(n)
            if assignment[u] >= 0
            for v, _ in inst.graph.adjacency[u]
            if assignment[v] == -1
        ]
        u, v = rng.choice(candidates)
        assignment[v] = assignment[u]
        unassigned -= 1
    return TerminalPartition(assignment)


@pytest.fixture
def path3():
    # t0 - v - t1, unit weights
    return Instance(build_graph(3, [(0, 1, 1.0), (1, 2, 1.0)]), [0, 2])


@pytest.fixture
def path4():
    # t0 - a - b - t1, unit weights
    return Instance(build_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]), [0, 3])


@pytest.fixture
def star3():
    # center vertex 3 with three unit-weight terminal leaves
    return Instance(build_graph(4, [(3, 0, 1.0), (3, 1, 1.0), (3, 2, 1.0)]), [0, 1, 2])
