"""Domain types, exact time arithmetic, and the schedule evaluation kernel.

Every size, speed, and time is an exact rational (`fractions.Fraction`).
Ties between machine loads are semantically load-bearing, so nothing in the
core ever rounds; decimal strings are parsed to exact fractions on the way in
and rendered back to decimals only at the output boundary.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Scalar = Fraction

ZERO = Fraction(0)


class ModelError(ValueError):
    """Base class for structured validation failures."""


class InstanceError(ModelError):
    """The instance description is malformed."""


class PlanError(ModelError):
    """A schedule plan does not cover the instance correctly."""

    def __init__(self, problems: Iterable[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def parse_scalar(value: str | int) -> Scalar:
    """Parse an exact rational from "a/b", a decimal string, or an int.

    Scientific notation ("1e6", "2.5e-3") is accepted. Floats are rejected:
    they carry binary rounding, which would silently break exactness.
    """
    if isinstance(value, bool):
        raise ModelError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ModelError(
            f"numeric fields must be strings or ints, got {type(value).__name__}: "
            f"{value!r} (floats lose exactness)"
        )
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"not a rational number: {value!r}") from exc


def format_scalar(value: Scalar) -> str:
    """Render an exact rational as "a/b", or just "a" for integers."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Scalar, precision: int = 6) -> str:
    """Correctly rounded decimal rendering of an exact rational.

    Rounds to `precision` fractional digits (ties away from zero) and trims
    trailing zeros, so 606/5 renders as "121.2" rather than "121.200000".
    """
    if precision < 0:
        raise ModelError("precision must be >= 0")
    sign = "-" if value < 0 else ""
    num, den = abs(value).numerator, abs(value).denominator
    quot, rem = divmod(num * 10**precision, den)
    if 2 * rem >= den:
        quot += 1
    digits = str(quot).rjust(precision + 1, "0")
    split = len(digits) - precision
    whole, frac = digits[:split], digits[split:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


@dataclass(frozen=True)
class Job:
    """One job: `id` is its position in the instance priority order."""

    id: int
    size: Scalar

    def __post_init__(self) -> None:
        if not isinstance(self.id, int) or self.id < 0:
            raise InstanceError(f"job id must be a non-negative int, got {self.id!r}")
        if not isinstance(self.size, Fraction) or self.size <= 0:
            raise InstanceError(f"job {self.id}: size must be a positive rational")


@dataclass(frozen=True)
class StageSpec:
    """One stage: `machines` identical machines, all running at `speed`."""

    machines: int
    speed: Scalar

    def __post_init__(self) -> None:
        if not isinstance(self.machines, int) or isinstance(self.machines, bool) or self.machines < 1:
            raise InstanceError(f"stage machine count must be an int >= 1, got {self.machines!r}")
        if not isinstance(self.speed, Fraction) or self.speed <= 0:
            raise InstanceError("stage speed must be a positive rational")


@dataclass(frozen=True)
class Instance:
    """An ordered job list plus the stage pipeline they all traverse.

    Job order doubles as the time-zero priority order: when several jobs are
    tied for a decision, lower position goes first.
    """

    jobs: tuple[Job, ...]
    stages: tuple[StageSpec, ...]
    family: str | None = None

    def __post_init__(self) -> None:
        if not self.jobs:
            raise InstanceError("instance needs at least one job")
        if not self.stages:
            raise InstanceError("instance needs at least one stage")
        ids = [job.id for job in self.jobs]
        if ids != list(range(len(self.jobs))):
            raise InstanceError(f"job ids must be 0..n-1 in order, got {ids}")

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def k(self) -> int:
        return len(self.stages)

    def sizes(self) -> tuple[Scalar, ...]:
        return tuple(job.size for job in self.jobs)

    @staticmethod
    def from_sizes(
        sizes: Sequence[Scalar | str | int],
        stages: Sequence[tuple[int, Scalar | str | int]],
        family: str | None = None,
    ) -> "Instance":
        jobs = tuple(Job(i, parse_scalar(s) if not isinstance(s, Fraction) else s) for i, s in enumerate(sizes))
        specs = tuple(
            StageSpec(m, parse_scalar(s) if not isinstance(s, Fraction) else s) for m, s in stages
        )
        return Instance(jobs, specs, family)

    def to_json(self) -> dict:
        data: dict = {
            "stages": [{"machines": s.machines, "speed": format_scalar(s.speed)} for s in self.stages],
            "jobs": [{"size": format_scalar(j.size)} for j in self.jobs],
        }
        if self.family is not None:
            data["family"] = self.family
        return data

    @staticmethod
    def from_json(data: object) -> "Instance":
        if not isinstance(data, dict):
            raise InstanceError("instance JSON must be an object")
        stages_raw = data.get("stages")
        jobs_raw = data.get("jobs")
        if not isinstance(stages_raw, list) or not isinstance(jobs_raw, list):
            raise InstanceError('instance JSON needs "stages" and "jobs" arrays')
        stages = []
        for idx, entry in enumerate(stages_raw):
            if not isinstance(entry, dict) or "machines" not in entry or "speed" not in entry:
                raise InstanceError(f'stage {idx}: expected {{"machines": int, "speed": str}}')
            machines = entry["machines"]
            if not isinstance(machines, int) or isinstance(machines, bool):
                raise InstanceError(f"stage {idx}: machine count must be an integer")
            stages.append(StageSpec(machines, parse_scalar(entry["speed"])))
        jobs = []
        for idx, entry in enumerate(jobs_raw):
            if not isinstance(entry, dict) or "size" not in entry:
                raise InstanceError(f'job {idx}: expected {{"size": str}}')
            jobs.append(Job(idx, parse_scalar(entry["size"])))
        family = data.get("family")
        if family is not None and not isinstance(family, str):
            raise InstanceError("family must be a string when present")
        return Instance(tuple(jobs), tuple(stages), family)


def execution_time(job: Job, stage: StageSpec) -> Scalar:
    """Time `job` occupies one machine of `stage`: size divided by speed."""
    return job.size / stage.speed


@dataclass
class MachineState:
    """Tail state of one machine's queue: when its last enqueued job finishes.

    The machine's load at any moment is speed times this value, whether or not
    the machine is currently idle.
    """

    available_at: Scalar = ZERO

    def load(self, speed: Scalar) -> Scalar:
        return speed * self.available_at

    def enqueue(self, release: Scalar, exec_time: Scalar) -> tuple[Scalar, Scalar]:
        start = release if release > self.available_at else self.available_at
        completion = start + exec_time
        self.available_at = completion
        return start, completion


@dataclass(frozen=True)
class StageRecord:
    """Timing of one job at one stage: where it ran and when."""

    stage: int
    machine: int
    release: Scalar
    start: Scalar
    completion: Scalar


@dataclass(frozen=True)
class ScheduleTrace:
    """Full timing of an instance: `records[job][stage]` plus the makespan."""

    records: tuple[tuple[StageRecord, ...], ...]
    makespan: Scalar

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def k(self) -> int:
        return len(self.records[0])

    def releases(self, stage: int) -> tuple[Scalar, ...]:
        return tuple(self.records[j][stage].release for j in range(self.n))

    def completions(self, stage: int) -> tuple[Scalar, ...]:
        return tuple(self.records[j][stage].completion for j in range(self.n))

    def final_completions(self) -> tuple[Scalar, ...]:
        return self.completions(self.k - 1)


# A plan fixes, for every stage, each job's machine and queue position:
# plan[stage][job] = (machine, position). Queue order is authoritative.
Plan = tuple[tuple[tuple[int, int], ...], ...]


def as_plan(obj: Sequence[Sequence[Sequence[int]]]) -> Plan:
    """Normalize nested sequences into the canonical tuple-of-tuples plan."""
    try:
        plan = tuple(tuple((int(e[0]), int(e[1])) for e in stage) for stage in obj)
    except (TypeError, ValueError, IndexError) as exc:
        raise PlanError([f"plan entries must be (machine, position) pairs: {exc}"]) from exc
    return plan


def plan_to_json(plan: Plan) -> list:
    return [[[m, p] for m, p in stage] for stage in plan]


def plan_from_json(data: object) -> Plan:
    if not isinstance(data, list):
        raise PlanError(["plan JSON must be a list of stages"])
    return as_plan(data)


def _plan_problems(instance: Instance, plan: Plan) -> list[str]:
    problems: list[str] = []
    if len(plan) != instance.k:
        return [f"plan has {len(plan)} stages, instance has {instance.k}"]
    for i, stage_plan in enumerate(plan):
        spec = instance.stages[i]
        if len(stage_plan) != instance.n:
            problems.append(f"stage {i}: plan covers {len(stage_plan)} jobs, instance has {instance.n}")
            continue
        per_machine: dict[int, list[int]] = {}
        for j, (machine, position) in enumerate(stage_plan):
            if not 0 <= machine < spec.machines:
                problems.append(f"stage {i}, job {j}: machine {machine} out of range [0, {spec.machines})")
                continue
            per_machine.setdefault(machine, []).append(position)
        for machine, positions in sorted(per_machine.items()):
            if sorted(positions) != list(range(len(positions))):
                problems.append(
                    f"stage {i}, machine {machine}: positions {sorted(positions)} are not 0..{len(positions) - 1}"
                )
    return problems


def evaluate_schedule(instance: Instance, plan: Plan | Sequence) -> ScheduleTrace:
    """Realize a fully specified plan into a timed trace.

    Machines serve their queues strictly in plan position order, idling for a
    job's release if needed, even when a later position holds an
    earlier-released job. Releases chain: a job enters stage i+1 the moment it
    completes stage i.
    """
    plan = as_plan(plan)
    problems = _plan_problems(instance, plan)
    if problems:
        raise PlanError(problems)
    n = instance.n
    releases: list[Scalar] = [ZERO] * n
    rows: list[list[StageRecord]] = [[] for _ in range(n)]
    for i, spec in enumerate(instance.stages):
        queues: dict[int, list[tuple[int, int]]] = {}
        for j, (machine, position) in enumerate(plan[i]):
            queues.setdefault(machine, []).append((position, j))
        next_releases: list[Scalar] = [ZERO] * n
        for machine, queue in queues.items():
            state = MachineState()
            for _, j in sorted(queue):
                start, completion = state.enqueue(releases[j], instance.jobs[j].size / spec.speed)
                rows[j].append(StageRecord(i, machine, releases[j], start, completion))
                next_releases[j] = completion
        releases = next_releases
    makespan = max(releases)
    return ScheduleTrace(tuple(tuple(r) for r in rows), makespan)


def validate_trace(instance: Instance, trace: ScheduleTrace) -> list[str]:
    """Check every trace invariant; returns violations as data, never raises.

    Verified per record: completion = start + size/speed, start >= release,
    stage-0 release = 0, and release chaining between stages. Verified per
    machine: service intervals are disjoint in start order and each start
    equals max(release, previous completion) — no unexplained idle time.
    """
    violations: list[str] = []
    if len(trace.records) != instance.n:
        return [f"trace covers {len(trace.records)} jobs, instance has {instance.n}"]
    for j, row in enumerate(trace.records):
        if len(row) != instance.k:
            return [f"job {j}: trace covers {len(row)} stages, instance has {instance.k}"]
    busy: dict[tuple[int, int], list[StageRecord]] = {}
    for j, row in enumerate(trace.records):
        prev_completion: Scalar | None = None
        for i, rec in enumerate(row):
            spec = instance.stages[i]
            if rec.stage != i:
                violations.append(f"job {j}, stage {i}: record tagged stage {rec.stage}")
            if not 0 <= rec.machine < spec.machines:
                violations.append(f"job {j}, stage {i}: machine {rec.machine} out of range")
                continue
            if i == 0 and rec.release != 0:
                violations.append(f"job {j}: stage-0 release is {rec.release}, expected 0")
            if i > 0 and rec.release != prev_completion:
                violations.append(
                    f"job {j}, stage {i}: release {rec.release} != previous completion {prev_completion}"
                )
            if rec.start < rec.release:
                violations.append(f"job {j}, stage {i}: start {rec.start} before release {rec.release}")
            if rec.completion - rec.start != instance.jobs[j].size / spec.speed:
                violations.append(
                    f"job {j}, stage {i}: completion - start != size/speed "
                    f"({rec.completion} - {rec.start} != {instance.jobs[j].size / spec.speed})"
                )
            busy.setdefault((i, rec.machine), []).append(rec)
            prev_completion = rec.completion
    for (i, machine), recs in sorted(busy.items()):
        recs.sort(key=lambda r: (r.start, r.completion))
        prev: Scalar = ZERO
        for rec in recs:
            if rec.start < prev:
                violations.append(
                    f"stage {i}, machine {machine}: interval [{rec.start}, {rec.completion}) "
                    f"overlaps previous job ending {prev}"
                )
            expected = rec.release if rec.release > prev else prev
            if rec.start != expected:
                violations.append(
                    f"stage {i}, machine {machine}: start {rec.start} != max(release {rec.release}, "
                    f"previous completion {prev})"
                )
            prev = rec.completion
    final = max(row[-1].completion for row in trace.records)
    if trace.makespan != final:
        violations.append(f"makespan {trace.makespan} != max final completion {final}")
    return violations


TRACE_CSV_FIELDS = (
    "job",
    "stage",
    "machine",
    "release",
    "start",
    "completion",
    "release_decimal",
    "start_decimal",
    "completion_decimal",
)


def trace_rows(trace: ScheduleTrace, precision: int = 6) -> list[dict[str, str | int]]:
    rows: list[dict[str, str | int]] = []
    for j in range(trace.n):
        for rec in trace.records[j]:
            rows.append(
                {
                    "job": j,
                    "stage": rec.stage,
                    "machine": rec.machine,
                    "release": format_scalar(rec.release),
                    "start": format_scalar(rec.start),
                    "completion": format_scalar(rec.completion),
                    "release_decimal": format_decimal(rec.release, precision),
                    "start_decimal": format_decimal(rec.start, precision),
                    "completion_decimal": format_decimal(rec.completion, precision),
                }
            )
    return rows


def trace_to_csv(trace: ScheduleTrace, precision: int = 6) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRACE_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(trace_rows(trace, precision))
    return buf.getvalue()


def trace_to_json(trace: ScheduleTrace, precision: int = 6) -> dict:
    return {
        "makespan": format_scalar(trace.makespan),
        "makespan_decimal": format_decimal(trace.makespan, precision),
        "records": trace_rows(trace, precision),
    }
