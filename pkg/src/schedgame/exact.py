"""Exact optimal makespan via exhaustive search, plus certified lower bounds.

The solver explores every plan (per-stage machine assignment and per-machine
queue order) with branch-and-bound pruning, machine-symmetry breaking, and
dominance filtering on stage completion vectors. It either certifies the exact
optimum or refuses; it never silently approximates.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass
from fractions import Fraction

from .greedy import greedy_schedule
from .model import Instance, Job, Plan, Scalar, ScheduleTrace

__all__ = [
    "SearchLimits",
    "DEFAULT_LIMITS",
    "LimitsExceeded",
    "OptResult",
    "opt_lower_bounds",
    "optimal_makespan",
    "single_stage_optimal",
]


@dataclass(frozen=True)
class SearchLimits:
    """Hard caps for the exhaustive solvers.

    An instance beyond the caps is refused rather than approximated, except
    when a heuristic plan already matches the certified lower bound, in which
    case the optimum is known without searching. Multi-stage instances face
    the tighter `max_jobs_multistage` cap because their plan space also
    enumerates queue orders.
    """

    max_jobs: int = 8
    max_jobs_multistage: int = 6
    max_stages: int = 3
    max_machines: int = 3
    node_budget: int = 5_000_000
    time_budget: float = 120.0


DEFAULT_LIMITS = SearchLimits()


class LimitsExceeded(Exception):
    """The instance is outside the solver's configured limits."""


class _Budget(Exception):
    pass


class _Done(Exception):
    pass


@dataclass(frozen=True)
class OptResult:
    """Outcome of an exact search.

    status "exact" certifies that no plan beats `makespan`; the witness plan
    reproduces it through `evaluate_schedule`. status "budget-exhausted"
    reports the best plan found (`makespan` is an upper bound) together with
    the best certified `lower_bound`.
    """

    makespan: Scalar
    plan: Plan | None
    status: str
    lower_bound: Scalar
    nodes: int = 0


def opt_lower_bounds(instance: Instance) -> tuple[Scalar, Scalar]:
    """Two certified lower bounds on the optimal makespan.

    path bound: the largest job must still traverse every stage, so no plan
    beats sum_i p_max/s_i. bottleneck bound: all work must pass the stage with
    the smallest processing rate m_i*s_i, so no plan beats total size divided
    by that rate.
    """
    p_max = max(job.size for job in instance.jobs)
    total = sum((job.size for job in instance.jobs), Fraction(0))
    path = sum((p_max / s.speed for s in instance.stages), Fraction(0))
    rate = min(s.machines * s.speed for s in instance.stages)
    return path, total / rate


def _frac_ceil(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def _plan_from_trace(trace: ScheduleTrace) -> Plan:
    """Recover the (machine, position) plan realized by a trace."""
    stages = []
    for i in range(trace.k):
        per_machine: dict[int, list[tuple[Scalar, int]]] = {}
        for j in range(trace.n):
            rec = trace.records[j][i]
            per_machine.setdefault(rec.machine, []).append((rec.start, j))
        entry: list[tuple[int, int]] = [(0, 0)] * trace.n
        for machine, queue in per_machine.items():
            for position, (_, j) in enumerate(sorted(queue)):
                entry[j] = (machine, position)
        stages.append(tuple(entry))
    return tuple(stages)


def _heuristic_plan(instance: Instance) -> tuple[Scalar, Plan]:
    """Best of a few greedy passes (priority order, sizes descending/ascending).

    Plans are order-free, so a plan extracted from a reordered instance's
    greedy trace evaluates identically on the original instance.
    """
    n = instance.n
    best: tuple[Scalar, Plan] | None = None
    orders = [
        list(range(n)),
        sorted(range(n), key=lambda j: (-instance.jobs[j].size, j)),
        sorted(range(n), key=lambda j: (instance.jobs[j].size, j)),
    ]
    for order in orders:
        jobs = tuple(Job(pos, instance.jobs[j].size) for pos, j in enumerate(order))
        trace, _ = greedy_schedule(Instance(jobs, instance.stages))
        reordered = _plan_from_trace(trace)
        position_of = {j: pos for pos, j in enumerate(order)}
        plan = tuple(
            tuple(stage[position_of[j]] for j in range(n)) for stage in reordered
        )
        if best is None or trace.makespan < best[0]:
            best = (trace.makespan, plan)
    assert best is not None
    return best


def optimal_makespan(instance: Instance, limits: SearchLimits | None = None) -> OptResult:
    """Exact minimum makespan over every machine assignment and queue order.

    Certifies immediately when a heuristic plan meets the analytic lower
    bound; otherwise refuses instances beyond `limits` and runs the full
    branch-and-bound search. The central plan is not bound by arrival order,
    so queues may place a later-released job first.
    """
    limits = limits or DEFAULT_LIMITS
    path, bottleneck = opt_lower_bounds(instance)
    analytic_lb = max(path, bottleneck)
    ub, ub_plan = _heuristic_plan(instance)
    if ub == analytic_lb:
        return OptResult(ub, ub_plan, "exact", ub, 0)
    n, k = instance.n, instance.k
    job_cap = limits.max_jobs if k == 1 else min(limits.max_jobs, limits.max_jobs_multistage)
    if n > job_cap:
        raise LimitsExceeded(f"{n} jobs exceeds the solver cap of {job_cap} for k={k}")
    if k > limits.max_stages:
        raise LimitsExceeded(f"{k} stages exceeds the solver cap of {limits.max_stages}")
    worst_m = max(s.machines for s in instance.stages)
    if worst_m > limits.max_machines:
        raise LimitsExceeded(f"{worst_m} machines in a stage exceeds the cap of {limits.max_machines}")
    return _PlanSearch(instance, limits, ub, ub_plan, analytic_lb).run()


def _dominated(vec: tuple[int, ...], archive: list[tuple[int, ...]]) -> bool:
    for prev in archive:
        if all(a <= b for a, b in zip(prev, vec)):
            return True
    return False


class _PlanSearch:
    """Depth-first search over stage plans on an exact integer time grid.

    All execution times are rescaled by the lcm of their denominators so the
    entire search runs on Python ints; every reachable trace time lives on
    that grid, so the rescaling is exact, not a rounding.
    """

    def __init__(
        self,
        instance: Instance,
        limits: SearchLimits,
        ub: Scalar,
        ub_plan: Plan,
        analytic_lb: Scalar,
    ) -> None:
        self.instance = instance
        self.n = instance.n
        self.k = instance.k
        self.machines = tuple(s.machines for s in instance.stages)
        exec_frac = [[job.size / s.speed for s in instance.stages] for job in instance.jobs]
        scale = 1
        for row in exec_frac:
            for v in row:
                scale = math.lcm(scale, v.denominator)
        self.scale = scale
        self.exec_int = [[int(v * scale) for v in row] for row in exec_frac]
        # rempath[j][i] = total execution still ahead of job j from stage i on
        self.rempath = [[0] * (self.k + 1) for _ in range(self.n)]
        for j in range(self.n):
            for i in range(self.k - 1, -1, -1):
                self.rempath[j][i] = self.rempath[j][i + 1] + self.exec_int[j][i]
        self.stage_total = [sum(self.exec_int[j][i] for j in range(self.n)) for i in range(self.k)]
        ub_scaled = ub * scale
        assert ub_scaled.denominator == 1, "heuristic plan off the exact time grid"
        self.best = int(ub_scaled)
        self.best_seqs = self._plan_to_seqs(ub_plan)
        self.analytic_lb = analytic_lb
        self.target = _frac_ceil(analytic_lb * scale)
        # equal-size jobs are interchangeable; canonicalize their stage-0 slots
        self.equal_pred_mask = [0] * self.n
        for j in range(self.n):
            for j2 in range(j):
                if instance.jobs[j2].size == instance.jobs[j].size:
                    self.equal_pred_mask[j] |= 1 << j2
        self.archives: list[list[tuple[int, ...]]] = [[] for _ in range(self.k)]
        self.nodes = 0
        self.node_budget = limits.node_budget
        self.deadline = _time.monotonic() + limits.time_budget

    def run(self) -> OptResult:
        status = "exact"
        if self.best > self.target:
            try:
                self._expand(0, (0,) * self.n, [])
            except _Done:
                pass
            except _Budget:
                status = "budget-exhausted"
        makespan = Fraction(self.best, self.scale)
        lower = makespan if status == "exact" else self.analytic_lb
        plan = self._seqs_to_plan(self.best_seqs)
        return OptResult(makespan, plan, status, lower, self.nodes)

    def _plan_to_seqs(self, plan: Plan) -> tuple[tuple[tuple[int, ...], ...], ...]:
        out = []
        for i, stage in enumerate(plan):
            queues: list[list[tuple[int, int]]] = [[] for _ in range(self.machines[i])]
            for j, (machine, position) in enumerate(stage):
                queues[machine].append((position, j))
            out.append(tuple(tuple(j for _, j in sorted(q)) for q in queues))
        return tuple(out)

    def _seqs_to_plan(self, seqs: tuple[tuple[tuple[int, ...], ...], ...]) -> Plan:
        out = []
        for stage in seqs:
            entry: list[tuple[int, int]] = [(0, 0)] * self.n
            for machine, queue in enumerate(stage):
                for position, j in enumerate(queue):
                    entry[j] = (machine, position)
            out.append(tuple(entry))
        return tuple(out)

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise _Budget
        if (self.nodes & 0xFFF) == 0 and _time.monotonic() > self.deadline:
            raise _Budget

    def _vector_lb(self, boundary: int, comps: tuple[int, ...]) -> int:
        """Lower bound on the final makespan given releases into `boundary`."""
        best = 0
        for j in range(self.n):
            v = comps[j] + self.rempath[j][boundary]
            if v > best:
                best = v
        for stage in range(boundary, self.k):
            arrive = min(
                comps[j] + self.rempath[j][boundary] - self.rempath[j][stage] for j in range(self.n)
            )
            need = arrive + -(-self.stage_total[stage] // self.machines[stage])
            if need > best:
                best = need
        return best

    def _expand(self, stage_i: int, releases: tuple[int, ...], prefix: list) -> None:
        if stage_i == self.k - 1:
            self._final_stage(releases, prefix)
            return
        archive = self.archives[stage_i]
        for comps, seqs in self._stage_plans(stage_i, releases):
            if self._vector_lb(stage_i + 1, comps) >= self.best:
                continue
            if _dominated(comps, archive):
                continue
            archive.append(comps)
            self._expand(stage_i + 1, comps, prefix + [seqs])

    def _stage_plans(self, stage_i: int, releases: tuple[int, ...]):
        """All canonical stage plans as (completion vector, machine sequences).

        Machine symmetry is broken by requiring each machine's queue to contain
        the smallest job id unused when it was opened, empties trailing. The
        result is deduplicated and dominance-filtered (same parent state, so a
        componentwise-smaller completion vector always continues at least as
        well) and sorted most promising first.
        """
        m = self.machines[stage_i]
        execs = [self.exec_int[j][stage_i] for j in range(self.n)]
        rempath_next = [self.rempath[j][stage_i + 1] for j in range(self.n)]
        canonical_jobs = stage_i == 0
        full_mask = (1 << self.n) - 1
        out: dict[tuple[int, ...], tuple] = {}
        comps = [0] * self.n
        seqs: list[list[int]] = [[]]

        def extend(machine_idx: int, avail: int, used: int, required: int) -> None:
            for j in range(self.n):
                bit = 1 << j
                if used & bit:
                    continue
                if canonical_jobs and (used & self.equal_pred_mask[j]) != self.equal_pred_mask[j]:
                    continue
                self._tick()
                r = releases[j]
                start = r if r > avail else avail
                c = start + execs[j]
                if c + rempath_next[j] >= self.best:
                    continue
                comps[j] = c
                seqs[machine_idx].append(j)
                new_used = used | bit
                new_required = -1 if j == required else required
                if new_used == full_mask:
                    out.setdefault(tuple(comps), tuple(tuple(s) for s in seqs))
                else:
                    extend(machine_idx, c, new_used, new_required)
                    if new_required == -1 and machine_idx + 1 < m:
                        remaining = (~new_used) & full_mask
                        next_required = (remaining & -remaining).bit_length() - 1
                        seqs.append([])
                        extend(machine_idx + 1, 0, new_used, next_required)
                        seqs.pop()
                seqs[machine_idx].pop()
                comps[j] = 0

        extend(0, 0, 0, 0)
        items = sorted(out.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        kept: list[tuple[tuple[int, ...], tuple]] = []
        for vec, plan_seqs in items:
            if not _dominated(vec, [v for v, _ in kept]):
                kept.append((vec, plan_seqs))
        kept.sort(key=lambda kv: (max(kv[0]), kv[0]))
        return kept

    def _final_stage(self, releases: tuple[int, ...], prefix: list) -> None:
        """Last stage: only the maximum completion matters, so track the min."""
        m = self.machines[self.k - 1]
        execs = [self.exec_int[j][self.k - 1] for j in range(self.n)]
        canonical_jobs = self.k == 1
        full_mask = (1 << self.n) - 1
        seqs: list[list[int]] = [[]]

        def extend(machine_idx: int, avail: int, used: int, required: int, cur_max: int) -> None:
            for j in range(self.n):
                bit = 1 << j
                if used & bit:
                    continue
                if canonical_jobs and (used & self.equal_pred_mask[j]) != self.equal_pred_mask[j]:
                    continue
                self._tick()
                r = releases[j]
                start = r if r > avail else avail
                c = start + execs[j]
                if c >= self.best:
                    continue
                new_max = c if c > cur_max else cur_max
                seqs[machine_idx].append(j)
                new_used = used | bit
                new_required = -1 if j == required else required
                if new_used == full_mask:
                    if new_max < self.best:
                        self.best = new_max
                        self.best_seqs = tuple(prefix) + (tuple(tuple(s) for s in seqs),)
                        if self.best <= self.target:
                            seqs[machine_idx].pop()
                            raise _Done
                else:
                    extend(machine_idx, c, new_used, new_required, new_max)
                    if new_required == -1 and machine_idx + 1 < m:
                        remaining = (~new_used) & full_mask
                        next_required = (remaining & -remaining).bit_length() - 1
                        seqs.append([])
                        extend(machine_idx + 1, 0, new_used, next_required, new_max)
                        seqs.pop()
                seqs[machine_idx].pop()

        extend(0, 0, 0, 0, 0)


def single_stage_optimal(
    jobs: list[Job] | tuple[Job, ...],
    m: int,
    s: Scalar,
    limits: SearchLimits | None = None,
) -> OptResult:
    """Exact single-stage optimum: minimize the largest machine workload.

    With one stage and all releases at zero, queue order is irrelevant and the
    problem reduces to an m-way partition of the sizes. Branch-and-bound with
    identical-load symmetry breaking; certifies without search when a largest-
    first heuristic matches the lower bound.
    """
    limits = limits or DEFAULT_LIMITS
    if not jobs:
        raise LimitsExceeded("no jobs")
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"machine count must be an int >= 1, got {m!r}")
    if s <= 0:
        raise ValueError("speed must be positive")
    n = len(jobs)
    sizes = [job.size for job in jobs]
    total = sum(sizes, Fraction(0))
    p_max = max(sizes)
    lb_load = max(p_max, total / m)
    order = sorted(range(n), key=lambda j: (-sizes[j], j))
    loads: list[Fraction] = [Fraction(0)] * m
    assign = [0] * n
    for j in order:
        alpha = min(range(m), key=lambda a: (loads[a], a))
        assign[j] = alpha
        loads[alpha] += sizes[j]
    ub_load = max(loads)
    if ub_load == lb_load:
        return OptResult(ub_load / s, _partition_plan(assign, n), "exact", ub_load / s, 0)
    if n > limits.max_jobs:
        raise LimitsExceeded(f"{n} jobs exceeds the solver cap of {limits.max_jobs}")

    scale = 1
    for v in sizes:
        scale = math.lcm(scale, v.denominator)
    int_sizes = [int(sizes[j] * scale) for j in range(n)]
    ordered_sizes = [int_sizes[j] for j in order]
    target = _frac_ceil(lb_load * scale)
    best = int(ub_load * scale)
    best_assign = list(assign)
    node_budget = limits.node_budget
    deadline = _time.monotonic() + limits.time_budget
    nodes = 0
    cur: list[int] = [0] * m
    cur_assign = [0] * n
    status = "exact"

    def dfs(idx: int, cur_max: int) -> None:
        nonlocal best, best_assign, nodes
        nodes += 1
        if nodes > node_budget or ((nodes & 0xFFF) == 0 and _time.monotonic() > deadline):
            raise _Budget
        if idx == n:
            best = cur_max
            for pos, j in enumerate(order):
                best_assign[j] = cur_assign[pos]
            if best <= target:
                raise _Done
            return
        size = ordered_sizes[idx]
        seen: set[int] = set()
        for alpha in range(m):
            load = cur[alpha]
            if load in seen:
                continue
            seen.add(load)
            new_load = load + size
            if new_load >= best:
                continue
            cur[alpha] = new_load
            cur_assign[idx] = alpha
            dfs(idx + 1, new_load if new_load > cur_max else cur_max)
            cur[alpha] = load

    try:
        dfs(0, 0)
    except _Done:
        pass
    except _Budget:
        status = "budget-exhausted"
    makespan = Fraction(best, scale) / s
    lower = makespan if status == "exact" else lb_load / s
    return OptResult(makespan, _partition_plan(best_assign, n), status, lower, nodes)


def _partition_plan(assign: list[int], n: int) -> Plan:
    """Single-stage plan from a machine assignment, machines renumbered so the
    one holding the smallest job id comes first; queue order by job id."""
    groups: dict[int, list[int]] = {}
    for j in range(n):
        groups.setdefault(assign[j], []).append(j)
    ordered = sorted(groups.values(), key=lambda g: g[0])
    entry: list[tuple[int, int]] = [(0, 0)] * n
    for machine, group in enumerate(ordered):
        for position, j in enumerate(group):
            entry[j] = (machine, position)
    return (tuple(entry),)
