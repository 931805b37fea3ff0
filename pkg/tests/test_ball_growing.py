import json
import math

import numpy as np
import pytest

from spr import (
    GrowthParams,
    Instance,
    build_graph,
    compute_base_mean,
    contract,
    distortion,
    replay_trace,
    run,
    sample_erv,
    trace_to_dict,
    validate,
)
from spr.ball_growing import SubstreamSampler
from spr.errors import NoNonTerminalsError, RoundCapExceededError

from conftest import random_connected_instance


class FixedUniform:
    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


class TestSampleErv:
    def test_unit_mean_at_one_over_e(self):
        # U = 1/e gives -ln(1/e) = 1; the stub returns 1 - 1/e from random().
        rng = FixedUniform(1.0 - 1.0 / math.e)
        assert sample_erv(rng, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_scaling(self):
        rng = FixedUniform(1.0 - 1.0 / math.e)
        assert sample_erv(rng, 5.0) == pytest.approx(5.0, rel=1e-12)

    def test_empirical_mean_within_two_percent(self):
        rng = np.random.default_rng(1234)
        draws = [sample_erv(rng, 2.0) for _ in range(100_000)]
        assert 1.96 <= sum(draws) / len(draws) <= 2.04

    def test_rejects_bad_mean(self):
        with pytest.raises(ValueError):
            sample_erv(FixedUniform(0.5), 0.0)


class TestSubstreams:
    def test_rekeying_matches_fresh_generators(self):
        sampler = SubstreamSampler(99)
        for round_index in range(8):
            for terminal in range(5):
                key = np.array(
                    [99, (round_index << 32) | terminal], dtype=np.uint64
                )
                fresh = np.random.Generator(np.random.Philox(key=key)).random()
                assert sampler.uniform(round_index, terminal) == fresh

    def test_order_independent(self):
        a = SubstreamSampler(7)
        b = SubstreamSampler(7)
        forward = [(r, j) for r in range(4) for j in range(3)]
        values_fwd = {key: a.uniform(*key) for key in forward}
        values_rev = {key: b.uniform(*key) for key in reversed(forward)}
        assert values_fwd == values_rev


class TestBaseMean:
    def test_k4_unit_min(self):
        # star with 4 terminal leaves and one center: min D_v = 1
        edges = [(4, i, 1.0) for i in range(4)]
        inst = Instance(build_graph(5, edges), [0, 1, 2, 3])
        value = compute_base_mean(inst, GrowthParams())
        assert value == pytest.approx(0.5 / (100 * math.log(4)), rel=1e-12)
        assert value == pytest.approx(0.0036067376022224087, rel=1e-9)

    def test_scales_with_min_distance(self):
        edges = [(4, i, 10.0) for i in range(4)]
        inst = Instance(build_graph(5, edges), [0, 1, 2, 3])
        value = compute_base_mean(inst, GrowthParams())
        assert value == pytest.approx(10 * 0.5 / (100 * math.log(4)), rel=1e-12)

    def test_k2(self, path3):
        value = compute_base_mean(path3, GrowthParams())
        assert value == pytest.approx(0.5 / (100 * math.log(2)), rel=1e-12)
        assert value == pytest.approx(0.0072134752044448166, rel=1e-9)

    def test_all_terminals_rejected(self):
        inst = Instance(build_graph(2, [(0, 1, 1.0)]), [0, 1])
        with pytest.raises(NoNonTerminalsError):
            compute_base_mean(inst, GrowthParams())


class TestRun:
    def test_trivial_when_every_vertex_is_terminal(self):
        inst = Instance(build_graph(2, [(0, 1, 1.0)]), [0, 1])
        part, trace = run(inst, GrowthParams(seed=3))
        assert part.assignment == (0, 1)
        assert trace.total_rounds == 0
        assert trace.events == []

    def test_path_middle_vertex(self, path3):
        for seed in range(10):
            part, trace = run(path3, GrowthParams(seed=seed))
            assert validate(path3, part) == []
            assert part.assignment[1] in (0, 1)
            minor = contract(path3, part)
            assert minor.distance(0, 1) == 2.0
            assert distortion(path3, minor).max_ratio == 1.0

    def test_deterministic_trace_serialization(self, star3):
        first = run(star3, GrowthParams(seed=42))
        second = run(star3, GrowthParams(seed=42))
        assert first[0].assignment == second[0].assignment
        a = json.dumps(trace_to_dict(first[1]), sort_keys=True)
        b = json.dumps(trace_to_dict(second[1]), sort_keys=True)
        assert a == b

    def test_different_seeds_eventually_differ(self, star3):
        outcomes = {
            run(star3, GrowthParams(seed=s))[0].assignment for s in range(30)
        }
        assert len(outcomes) > 1

    def test_validity_over_random_corpus(self):
        for seed in range(15):
            inst = random_connected_instance(seed, n=30, k=2 + seed % 7)
            part, _ = run(inst, GrowthParams(seed=seed * 17 + 1))
            assert validate(inst, part) == []

    def test_round_means_are_repeated_multiplication(self):
        inst = random_connected_instance(5, n=25, k=4)
        _, trace = run(inst, GrowthParams(seed=8))
        mean = trace.base_mean
        for record in trace.rounds:
            assert record.mean == mean
            mean *= trace.growth_rate

    def test_radii_increments_positive_and_radius_monotone(self):
        inst = random_connected_instance(6, n=25, k=4)
        _, trace = run(inst, GrowthParams(seed=11))
        for record in trace.rounds:
            for _, value in record.draws:
                assert value > 0
        # per-terminal radii reconstructed from draws are nondecreasing,
        # and each event's recorded radius matches the reconstruction
        radii = [0.0] * inst.k
        events = iter(trace.events)
        event = next(events, None)
        for record in trace.rounds:
            for terminal, value in record.draws:
                radii[terminal] += value
                while (
                    event is not None
                    and event.round_index == record.index
                    and event.terminal == terminal
                ):
                    assert event.radius == radii[terminal]
                    assert event.round_mean == record.mean
                    event = next(events, None)
        assert event is None

    def test_every_vertex_assigned_exactly_once(self):
        inst = random_connected_instance(9, n=40, k=5)
        part, trace = run(inst, GrowthParams(seed=2))
        assigned = [event.vertex for event in trace.events]
        assert sorted(assigned) == sorted(inst.non_terminals())
        for event in trace.events:
            assert part.assignment[event.vertex] == event.terminal

    def test_replay_reproduces_partition(self):
        for seed in range(8):
            inst = random_connected_instance(seed + 50, n=30, k=4)
            part, trace = run(inst, GrowthParams(seed=seed))
            assert replay_trace(inst, trace).assignment == part.assignment

    def test_complete_final_round_changes_draws_not_partition(self):
        inst = random_connected_instance(12, n=30, k=5)
        early_exit, trace_a = run(inst, GrowthParams(seed=4))
        completed, trace_b = run(inst, GrowthParams(seed=4, complete_final_round=True))
        assert early_exit.assignment == completed.assignment
        assert len(trace_b.rounds[-1].draws) == inst.k
        assert len(trace_a.rounds[-1].draws) <= len(trace_b.rounds[-1].draws)

    def test_round_cap_exceeded(self):
        inst = random_connected_instance(1, n=30, k=3)
        with pytest.raises(RoundCapExceededError):
            run(inst, GrowthParams(seed=1, max_rounds=1))

    def test_termination_within_documented_cap(self):
        for seed in range(6):
            inst = random_connected_instance(seed, n=40, k=4)
            params = GrowthParams(seed=seed)
            _, trace = run(inst, params)
            n = inst.graph.vertex_count
            w_max = max(
                inst.graph.distance(a, b) for a in range(n) for b in range(a + 1, n)
            )
            rate = params.growth_rate(inst.k)
            cap = 10 * math.ceil(
                math.log(n * w_max / trace.base_mean) / math.log(rate)
            )
            assert trace.total_rounds <= cap

    def test_bounded_uniform_variant_still_valid(self):
        inst = random_connected_instance(3, n=25, k=4)
        params = GrowthParams(seed=5, increment_distribution="bounded-uniform")
        part, _ = run(inst, params)
        assert validate(inst, part) == []

    def test_matches_literal_loop(self):
        # Reference implementation: the loop spelled out with restricted_ball
        # per step and no frontier shortcuts.
        def naive_run(inst, params):
            n = inst.graph.vertex_count
            k = inst.k
            assignment = [-1] * n
            cells = [{t} for t in inst.terminals]
            for j, t in enumerate(inst.terminals):
                assignment[t] = j
            unassigned = set(range(n)) - set(inst.terminals)
            base = compute_base_mean(inst, params)
            rate = params.growth_rate(k)
            sampler = SubstreamSampler(params.seed)
            radii = [0.0] * k
            mean = base
            level = 0
            while unassigned:
                for j in range(k):
                    if not unassigned:
                        break
                    u = sampler.uniform(level, j)
                    radii[j] += -mean * math.log(1.0 - u)
                    allowed = unassigned | cells[j]
                    ball = inst.graph.restricted_ball(
                        allowed, inst.terminals[j], radii[j]
                    )
                    for v in sorted(ball - cells[j]):
                        assignment[v] = j
                    cells[j] |= ball
                    unassigned -= ball
                level += 1
                mean *= rate
            return tuple(assignment)

        for seed in range(6):
            inst = random_connected_instance(seed + 70, n=25, k=4)
            params = GrowthParams(seed=seed)
            part, _ = run(inst, params)
            assert part.assignment == naive_run(inst, params)


class TestParams:
    def test_delta_outside_regime_warns(self):
        with pytest.warns(UserWarning):
            GrowthParams(delta=0.75)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            GrowthParams(delta=0.0)
        with pytest.raises(ValueError):
            GrowthParams(log_base=1.0)
        with pytest.raises(ValueError):
            GrowthParams(seed=-1)
        with pytest.raises(ValueError):
            GrowthParams(increment_distribution="pareto")

    def test_growth_rate(self):
        params = GrowthParams()
        assert params.growth_rate(4) == pytest.approx(1 + 0.5 / math.log(4), rel=1e-12)
        base2 = GrowthParams(log_base=2.0)
        assert base2.growth_rate(4) == pytest.approx(1.25, rel=1e-12)
