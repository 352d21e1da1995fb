"""Independent oracles the tests check the package against.

Everything here is deliberately naive: full enumeration and textbook list
scheduling, written without touching the package's solvers so the two routes
stay independent.
"""

import itertools
from fractions import Fraction

from schedgame import Instance


def all_stage_plans(n: int, m: int):
    """Every (machine, queue order) arrangement of n jobs on m labeled machines."""
    for assign in itertools.product(range(m), repeat=n):
        buckets: dict[int, list[int]] = {}
        for j, a in enumerate(assign):
            buckets.setdefault(a, []).append(j)
        machines = list(buckets.keys())
        for orders in itertools.product(*(itertools.permutations(b) for b in buckets.values())):
            yield dict(zip(machines, orders))


def brute_force_optimal(instance: Instance) -> Fraction:
    """Minimum makespan by enumerating every plan of every stage."""
    n, k = instance.n, instance.k
    best: Fraction | None = None

    def recurse(stage: int, releases: list[Fraction]) -> None:
        nonlocal best
        if stage == k:
            makespan = max(releases)
            if best is None or makespan < best:
                best = makespan
            return
        spec = instance.stages[stage]
        for plan in all_stage_plans(n, spec.machines):
            completions = [Fraction(0)] * n
            for _, order in plan.items():
                tail = Fraction(0)
                for j in order:
                    tail = max(tail, releases[j]) + instance.jobs[j].size / spec.speed
                    completions[j] = tail
            recurse(stage + 1, completions)

    recurse(0, [Fraction(0)] * n)
    assert best is not None
    return best


def brute_force_partition(sizes: list[Fraction], m: int, s: Fraction) -> Fraction:
    """Minimum single-stage makespan: best max machine workload over speed."""
    best: Fraction | None = None
    for assign in itertools.product(range(m), repeat=len(sizes)):
        loads = [Fraction(0)] * m
        for j, a in enumerate(assign):
            loads[a] += sizes[j]
        worst = max(loads)
        if best is None or worst < best:
            best = worst
    assert best is not None
    return best / s


def list_schedule(sizes: list[Fraction], m: int, s: Fraction):
    """Textbook list scheduling: an idle machine takes the next listed job.

    With all jobs available at time zero the machine that frees up first (ties
    to the lowest index) takes the next job. Returns (machine per job,
    makespan).
    """
    avail = [Fraction(0)] * m
    machine_of = []
    for size in sizes:
        alpha = min(range(m), key=lambda a: (avail[a], a))
        machine_of.append(alpha)
        avail[alpha] += size / s
    return machine_of, max(avail)
