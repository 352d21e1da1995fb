import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schedgame import (
    Instance,
    Job,
    LimitsExceeded,
    SearchLimits,
    evaluate_schedule,
    gen_random,
    gen_single_stage_worst,
    greedy_schedule,
    opt_lower_bounds,
    optimal_makespan,
    single_stage_optimal,
)
from helpers import brute_force_optimal, brute_force_partition


def appendix_instance():
    return Instance.from_sizes([10, 1], [(1, 1), (2, 5), (1, F(1, 10))])


class TestLowerBounds:
    def test_worst_family_m3(self):
        path, bottleneck = opt_lower_bounds(gen_single_stage_worst(3))
        assert path == 3
        assert bottleneck == F(6 + 3, 3)

    def test_single_job_path_bound_is_tight(self):
        inst = Instance.from_sizes([5], [(1, 1), (1, F(1, 10))])
        path, bottleneck = opt_lower_bounds(inst)
        assert path == 55
        assert optimal_makespan(inst).makespan == 55

    def test_appendix(self):
        path, bottleneck = opt_lower_bounds(appendix_instance())
        assert path == 112
        assert bottleneck == 110

    @given(st.integers(0, 300))
    def test_bounds_never_exceed_optimum(self, seed):
        inst = gen_random(n=1 + seed % 5, k=1 + seed % 3, seed=seed)
        result = optimal_makespan(inst)
        assert result.status == "exact"
        assert max(opt_lower_bounds(inst)) <= result.makespan


class TestSingleStageOptimal:
    def test_small_cases(self):
        assert single_stage_optimal([Job(0, F(1)), Job(1, F(1)), Job(2, F(2))], 2, F(1)).makespan == 2
        assert single_stage_optimal([Job(0, F(3))] * 1 + [Job(1, F(3)), Job(2, F(3))], 3, F(3)).makespan == 1

    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    @pytest.mark.parametrize("s", [F(1), F(1, 2)])
    def test_worst_family_optimum(self, m, s):
        inst = gen_single_stage_worst(m, s)
        result = single_stage_optimal(list(inst.jobs), m, s)
        assert result.status == "exact"
        assert result.makespan == F(m) / s

    def test_needs_search_when_lpt_is_suboptimal(self):
        # LPT packs 3+2+2 vs 3+2 here (makespan 7); the optimum balances at 6
        jobs = [Job(i, F(x)) for i, x in enumerate([3, 3, 2, 2, 2])]
        result = single_stage_optimal(jobs, 2, F(1))
        assert result.status == "exact"
        assert result.makespan == 6
        assert result.makespan == brute_force_partition([F(3), F(3), F(2), F(2), F(2)], 2, F(1))

    def test_exhaustive_against_brute_force(self):
        for m in (2, 3):
            for n in range(1, 6):
                for sizes in itertools.combinations_with_replacement([F(1), F(2), F(3)], n):
                    jobs = [Job(i, x) for i, x in enumerate(sizes)]
                    got = single_stage_optimal(jobs, m, F(1))
                    assert got.status == "exact"
                    assert got.makespan == brute_force_partition(list(sizes), m, F(1))

    def test_witness_reproduces_makespan(self):
        jobs = [Job(i, F(x)) for i, x in enumerate([5, 4, 3, 3, 2, 1])]
        result = single_stage_optimal(jobs, 3, F(2))
        inst = Instance(tuple(jobs), (Instance.from_sizes([1], [(3, 2)]).stages))
        assert evaluate_schedule(inst, result.plan).makespan == result.makespan

    def test_refuses_oversized(self):
        jobs = [Job(i, F(p)) for i, p in enumerate([7, 6, 5, 5, 4, 3, 2, 2, 1])]
        with pytest.raises(LimitsExceeded):
            single_stage_optimal(jobs, 2, F(1), SearchLimits(max_jobs=8))

    def test_budget_exhaustion_reports_bounds(self):
        jobs = [Job(i, F(x)) for i, x in enumerate([3, 3, 2, 2, 2])]
        result = single_stage_optimal(jobs, 2, F(1), SearchLimits(node_budget=1))
        assert result.status == "budget-exhausted"
        assert result.lower_bound <= 6 <= result.makespan


class TestOptimalMakespan:
    def test_single_job(self):
        inst = Instance.from_sizes([3], [(1, 1), (2, F(1, 2)), (1, 3)])
        expected = 3 + 6 + 1
        assert optimal_makespan(inst).makespan == expected

    def test_worst_family_m4(self):
        inst = gen_single_stage_worst(4)
        result = optimal_makespan(inst)
        assert result.status == "exact"
        assert result.makespan == 4

    def test_appendix_brute_force(self):
        inst = appendix_instance()
        result = optimal_makespan(inst)
        assert result.status == "exact"
        assert result.makespan == 113
        assert result.makespan == brute_force_optimal(inst)

    @given(st.integers(0, 200))
    def test_matches_brute_force_on_tiny_instances(self, seed):
        inst = gen_random(n=1 + seed % 3, k=1 + seed % 2, machine_range=(1, 3), seed=seed)
        result = optimal_makespan(inst)
        assert result.status == "exact"
        assert result.makespan == brute_force_optimal(inst)

    @given(st.integers(0, 300))
    def test_witness_replays_exactly(self, seed):
        inst = gen_random(n=1 + seed % 5, k=1 + seed % 3, seed=seed)
        result = optimal_makespan(inst)
        assert evaluate_schedule(inst, result.plan).makespan == result.makespan

    @given(st.integers(0, 300))
    def test_greedy_never_beats_optimal(self, seed):
        inst = gen_random(n=1 + seed % 6, k=1 + seed % 3, seed=seed)
        trace, _ = greedy_schedule(inst)
        assert trace.makespan >= optimal_makespan(inst).makespan

    @given(st.integers(0, 150))
    def test_consistent_with_single_stage_specialization(self, seed):
        # two independent routes: general plan search vs set-partition search
        inst = gen_random(n=1 + seed % 5, k=1, machine_range=(1, 3), seed=seed)
        spec = inst.stages[0]
        general = optimal_makespan(inst)
        partition = single_stage_optimal(list(inst.jobs), spec.machines, spec.speed)
        assert general.status == partition.status == "exact"
        assert general.makespan == partition.makespan

    def test_deterministic_including_witness(self):
        inst = gen_random(n=5, k=3, seed=99)
        assert optimal_makespan(inst) == optimal_makespan(inst)

    def test_refuses_oversized_multistage(self):
        inst = Instance.from_sizes([10, 1, 1, 1, 1, 1, 1], [(1, 1), (2, 5)])
        with pytest.raises(LimitsExceeded):
            optimal_makespan(inst)

    def test_certificate_path_answers_beyond_limits(self):
        # greedy matches the lower bounds here, so no search is needed even
        # though the instance is far beyond the search caps
        inst = Instance.from_sizes([1] * 12, [(3, 1)])
        result = optimal_makespan(inst)
        assert result.status == "exact"
        assert result.makespan == 4

    def test_budget_exhaustion_reports_interval(self):
        inst = Instance.from_sizes([10, 1, 7, 3], [(1, 1), (2, 5), (1, F(1, 3))])
        limited = optimal_makespan(inst, SearchLimits(node_budget=5))
        assert limited.status == "budget-exhausted"
        full = optimal_makespan(inst)
        assert full.status == "exact"
        assert limited.lower_bound <= full.makespan <= limited.makespan
