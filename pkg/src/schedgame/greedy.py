"""Greedy least-loaded machine choice with first-come-first-serve queues."""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ZERO,
    Instance,
    MachineState,
    Scalar,
    ScheduleTrace,
    StageRecord,
    format_decimal,
    format_scalar,
)


@dataclass(frozen=True)
class GreedyEvent:
    """One machine-choice decision: the load snapshot and the pick made."""

    time: Scalar
    job: int
    stage: int
    loads: tuple[Scalar, ...]
    machine: int


def greedy_schedule(instance: Instance) -> tuple[ScheduleTrace, list[GreedyEvent]]:
    """Simulate every job joining the least-loaded machine as it is released.

    Stage-0 decisions happen at t = 0 in instance order. At later stages jobs
    decide in ascending release order, ties by job id; within a batch of equal
    releases an earlier decider's enqueue is visible to later deciders. Machine
    ties go to the lowest index. Returns the trace plus the decision log.
    """
    n = instance.n
    releases: list[Scalar] = [ZERO] * n
    rows: list[list[StageRecord]] = [[] for _ in range(n)]
    events: list[GreedyEvent] = []
    for i, spec in enumerate(instance.stages):
        machines = [MachineState() for _ in range(spec.machines)]
        next_releases: list[Scalar] = [ZERO] * n
        for j in sorted(range(n), key=lambda j: (releases[j], j)):
            loads = tuple(m.load(spec.speed) for m in machines)
            chosen = min(range(spec.machines), key=lambda a: (loads[a], a))
            start, completion = machines[chosen].enqueue(
                releases[j], instance.jobs[j].size / spec.speed
            )
            events.append(GreedyEvent(releases[j], j, i, loads, chosen))
            rows[j].append(StageRecord(i, chosen, releases[j], start, completion))
            next_releases[j] = completion
        releases = next_releases
    trace = ScheduleTrace(tuple(tuple(r) for r in rows), max(releases))
    return trace, events


def release_order(trace: ScheduleTrace, stage: int) -> list[int]:
    """Job ids sorted by (release time at `stage`, job id).

    This is the order in which the stage saw its arrivals; at stage 0 it is
    simply the priority order since all releases are zero.
    """
    if not 0 <= stage < trace.k:
        raise ValueError(f"stage {stage} out of range [0, {trace.k})")
    return sorted(range(trace.n), key=lambda j: (trace.records[j][stage].release, j))


def events_to_json(events: list[GreedyEvent], precision: int = 6) -> list[dict]:
    return [
        {
            "time": format_scalar(e.time),
            "time_decimal": format_decimal(e.time, precision),
            "job": e.job,
            "stage": e.stage,
            "loads": [format_scalar(x) for x in e.loads],
            "machine": e.machine,
        }
        for e in events
    ]
