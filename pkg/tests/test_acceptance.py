"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Criteria 1-4 build deterministic instance sets; criterion 5 regenerates the
same sets so it verifies every greedy trace they produce regardless of test
execution order. All comparisons are exact rational unless a tolerance is
stated inline.
"""

import itertools
import time
from fractions import Fraction as F

from schedgame import (
    ActionModel,
    Instance,
    SplitMix64,
    check_greedy_spne,
    check_multistage_chain,
    gen_appendix_example,
    gen_multistage_worst,
    gen_random,
    gen_single_stage_worst,
    greedy_schedule,
    opt_lower_bounds,
    optimal_makespan,
    price_of_anarchy,
    single_stage_optimal,
    spne_solve,
    validate_trace,
    verify_deviation,
)
from schedgame.model import trace_to_csv, trace_to_json


def _report(num: int, description: str, violations: list, started: float, budget: float) -> None:
    elapsed = time.monotonic() - started
    status = "PASS" if not violations else "FAIL"
    print(f"[criterion {num}] {status} ({elapsed:.2f}s) {description}")
    assert not violations, f"criterion {num}: {violations[:5]} ({len(violations)} total)"
    assert elapsed < budget, f"criterion {num} took {elapsed:.1f}s, budget {budget}s"


def criterion1_instances() -> list[Instance]:
    return [
        gen_single_stage_worst(m, s)
        for m in range(2, 9)
        for s in (F(1), F(1, 2), F(3))
    ]


def criterion3_exhaustive_instances() -> list[Instance]:
    out = []
    for m in (2, 3):
        for n in range(1, 7):
            for sizes in itertools.product((F(1), F(2), F(3)), repeat=n):
                out.append(Instance.from_sizes(list(sizes), [(m, 1)]))
    return out


def criterion3_random_instances() -> list[Instance]:
    out = []
    for seed in range(200):
        n = SplitMix64(10_000 + seed).randint(1, 8)
        out.append(gen_random(n, 1, (2, 3), (F(1, 2), 3, 2), (1, 6, 3), seed=seed))
    return out


def criterion4_instances() -> list[Instance]:
    out = []
    for seed in range(200):
        rng = SplitMix64(seed * 1000 + 17)
        n, k = rng.randint(1, 6), rng.randint(2, 3)
        out.append(gen_random(n, k, (1, 3), (F(1, 2), 3, 2), (1, 6, 3), seed=30_000 + seed))
    return out


def test_criterion_1_worst_case_family_exactness():
    started = time.monotonic()
    violations = []
    for inst in criterion1_instances():
        m = inst.stages[0].machines
        report = price_of_anarchy(inst)
        if report.ratio != 2 - F(1, m) or not report.ratio_is_exact:
            violations.append((inst.family, report.ratio))
    _report(1, "single-stage worst family: ratio exactly 2 - 1/m for m in 2..8", violations, started, 2.0)


def test_criterion_2_appendix_reproduction():
    started = time.monotonic()
    violations = []
    inst = gen_appendix_example()
    trace, _ = greedy_schedule(inst)
    greedy_expected = {0: [F(10), F(12), F(606, 5)], 1: [F(11), F(56, 5), F(106, 5)]}
    for j, expected in greedy_expected.items():
        got = [r.completion for r in trace.records[j]]
        if got != expected:
            violations.append(("greedy", j, got))
    equilibrium = spne_solve(inst, ActionModel(allow_defer=True))
    spne_expected = {0: [F(11), F(13), F(113)], 1: [F(1), F(6, 5), F(56, 5)]}
    for j, expected in spne_expected.items():
        got = [r.completion for r in equilibrium.trace.records[j]]
        if got != expected:
            violations.append(("spne", j, got))
    certificate = check_greedy_spne(inst, ActionModel(allow_defer=True))
    if certificate.greedy_is_spne:
        violations.append("no deviation found")
    else:
        deviation = certificate.deviations[0]
        if (deviation.node.job, deviation.greedy_value, deviation.value) != (0, F(606, 5), F(113)):
            violations.append(("deviation", deviation))
        if not verify_deviation(inst, deviation, ActionModel(allow_defer=True)):
            violations.append("deviation does not replay")
    _report(2, "two-job pipeline: greedy and equilibrium timings exact, deviation 606/5 -> 113", violations, started, 1.0)


def test_criterion_3_single_stage_ceiling():
    started = time.monotonic()
    violations = []
    opt_cache: dict[tuple, F] = {}
    for inst in criterion3_exhaustive_instances():
        m = inst.stages[0].machines
        key = (tuple(sorted(inst.sizes())), m)
        if key not in opt_cache:
            result = single_stage_optimal(list(inst.jobs), m, F(1))
            assert result.status == "exact"
            opt_cache[key] = result.makespan
        trace, _ = greedy_schedule(inst)
        if trace.makespan > (2 - F(1, m)) * opt_cache[key]:
            violations.append((inst.sizes(), m))
    for inst in criterion3_random_instances():
        spec = inst.stages[0]
        result = single_stage_optimal(list(inst.jobs), spec.machines, spec.speed)
        assert result.status == "exact"
        trace, _ = greedy_schedule(inst)
        if trace.makespan > (2 - F(1, spec.machines)) * result.makespan:
            violations.append((inst.family,))
    _report(
        3,
        "single-stage ceiling over 2184 exhaustive orderings + 200 random instances",
        violations,
        started,
        60.0,
    )


def test_criterion_4_multi_stage_ceiling():
    started = time.monotonic()
    violations = []
    for inst in criterion4_instances():
        result = optimal_makespan(inst)
        if result.status != "exact":
            violations.append((inst.family, result.status))
            continue
        trace, _ = greedy_schedule(inst)
        m_max = max(s.machines for s in inst.stages)
        if trace.makespan > (3 - F(1, m_max)) * result.makespan:
            violations.append((inst.family, "ceiling"))
        if max(opt_lower_bounds(inst)) > result.makespan:
            violations.append((inst.family, "lower bound above optimum"))
    _report(4, "multi-stage ceiling and lower bounds over 200 random instances", violations, started, 600.0)


def test_criterion_5_bound_chain_on_all_traces():
    started = time.monotonic()
    violations = []
    instances = (
        criterion1_instances()
        + [gen_appendix_example()]
        + criterion3_exhaustive_instances()
        + criterion3_random_instances()
        + criterion4_instances()
    )
    for inst in instances:
        trace, _ = greedy_schedule(inst)
        report = check_multistage_chain(inst, trace)
        if not report.holds:
            violations.append((inst.family or inst.sizes(), report.failures()[0].label))
    _report(
        5,
        f"stage-chain bounds (both orders) hold on all {len(instances)} greedy traces",
        violations,
        started,
        600.0,
    )


def test_criterion_6_multi_stage_floor_limit():
    started = time.monotonic()
    violations = []
    ladder = (10**2, 10**4, 10**6)
    for m_max in (2, 3, 4, 5):
        ratios = []
        for fast_speed in ladder:
            inst = gen_multistage_worst(3, 1, m_max, (1, 1), fast_speed)
            ratios.append(price_of_anarchy(inst).ratio)
        floor = 2 - F(1, m_max) - F(1, 1000)
        if ratios[-1] < floor:
            violations.append((m_max, "floor", ratios[-1]))
        if not (ratios[0] <= ratios[1] <= ratios[2]):
            violations.append((m_max, "not monotone", ratios))
    _report(6, "fast-stage family: ratio within 1e-3 of 2 - 1/m_max and monotone in speed", violations, started, 30.0)


def test_criterion_7_single_stage_greedy_is_spne():
    started = time.monotonic()
    violations = []
    model = ActionModel(allow_defer=False)
    for m in (1, 2, 3):
        for n in range(1, 5):
            for sizes in itertools.product((F(1), F(2), F(3)), repeat=n):
                inst = Instance.from_sizes(list(sizes), [(m, 1)])
                certificate = check_greedy_spne(inst, model)
                if not certificate.greedy_is_spne:
                    deviation = certificate.deviations[0]
                    replayable = verify_deviation(inst, deviation, model)
                    violations.append((sizes, m, deviation, f"replayable={replayable}"))
    _report(7, "no profitable deviation in any single-stage game (n<=4, m<=3)", violations, started, 120.0)


def test_criterion_8_determinism_and_validity():
    started = time.monotonic()
    violations = []
    samples = [
        gen_appendix_example(),
        gen_single_stage_worst(3),
        gen_random(4, 2, seed=1),
        gen_random(5, 3, seed=2),
        gen_random(6, 1, seed=3),
    ]
    for inst in samples:
        if gen_random(4, 2, seed=1) != gen_random(4, 2, seed=1):
            violations.append("generator nondeterministic")
        first_trace, first_events = greedy_schedule(inst)
        second_trace, second_events = greedy_schedule(inst)
        if (first_trace, first_events) != (second_trace, second_events):
            violations.append((inst.family, "greedy"))
        if validate_trace(inst, first_trace):
            violations.append((inst.family, "greedy trace invalid"))
        if trace_to_csv(first_trace) != trace_to_csv(second_trace):
            violations.append((inst.family, "csv"))
        if trace_to_json(first_trace) != trace_to_json(second_trace):
            violations.append((inst.family, "json"))
        if optimal_makespan(inst) != optimal_makespan(inst):
            violations.append((inst.family, "optimal"))
        if price_of_anarchy(inst) != price_of_anarchy(inst):
            violations.append((inst.family, "poa"))
        if check_multistage_chain(inst, first_trace) != check_multistage_chain(inst, first_trace):
            violations.append((inst.family, "chain"))
    for inst in samples[:3]:
        for allow_defer in (False, True):
            model = ActionModel(allow_defer=allow_defer)
            first = spne_solve(inst, model)
            if first != spne_solve(inst, model):
                violations.append((inst.family, "spne"))
            if validate_trace(inst, first.trace):
                violations.append((inst.family, "spne trace invalid"))
            if check_greedy_spne(inst, model) != check_greedy_spne(inst, model):
                violations.append((inst.family, "spne certificate"))
        witness = optimal_makespan(inst)
        from schedgame import evaluate_schedule

        opt_trace = evaluate_schedule(inst, witness.plan)
        if validate_trace(inst, opt_trace):
            violations.append((inst.family, "witness trace invalid"))
    _report(8, "repeat runs bit-identical; every produced trace validates clean", violations, started, 120.0)
