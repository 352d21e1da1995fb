"""Backward-induction solving of the sequential machine-choice game.

Jobs decide in chronological release order (ties by job id) and each picks the
action minimizing its own final completion time given optimal play downstream.
Besides choosing a machine, a job tied with others for the same stage may
"defer": yield its decision slot to the next tied job and re-enter the queue
right behind it. The defer action is our reconstruction of priority-yielding
between simultaneous arrivals, which plain machine choice cannot express when
a stage has a single machine; outputs label it explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import DEFAULT_LIMITS, LimitsExceeded, SearchLimits
from .greedy import greedy_schedule
from .model import Instance, Plan, Scalar, ScheduleTrace, evaluate_schedule

__all__ = [
    "DEFER",
    "ActionModel",
    "GameNode",
    "Deviation",
    "SpneCertificate",
    "EquilibriumResult",
    "spne_solve",
    "check_greedy_spne",
    "verify_deviation",
]

DEFER = "defer"

Action = int | str


@dataclass(frozen=True)
class ActionModel:
    """What a deciding job may do besides picking a machine.

    max_defers_per_batch caps one job's defers within a batch of tied
    decisions; None applies the structural cap of batch size - 1, which
    already guarantees termination.
    """

    allow_defer: bool = True
    max_defers_per_batch: int | None = None


@dataclass(frozen=True)
class GameNode:
    """A decision point: who decides, where, and what actions are available."""

    job: int
    stage: int
    release: Scalar
    batch: tuple[int, ...]
    actions: tuple[Action, ...]


@dataclass(frozen=True)
class Deviation:
    """A profitable one-shot deviation from greedy play at one decision node."""

    decision_index: int
    node: GameNode
    greedy_action: int
    greedy_value: Scalar
    action: Action
    value: Scalar

    @property
    def improvement(self) -> Scalar:
        return self.greedy_value - self.value


@dataclass(frozen=True)
class SpneCertificate:
    greedy_is_spne: bool
    deviations: tuple[Deviation, ...]
    decisions_checked: int


@dataclass(frozen=True)
class EquilibriumResult:
    """Equilibrium-path trace and how it compares with greedy play per job."""

    trace: ScheduleTrace
    final_completions: tuple[Scalar, ...]
    greedy_trace: ScheduleTrace
    greedy_final_completions: tuple[Scalar, ...]
    deltas: tuple[Scalar, ...]
    greedy_is_spne_outcome: bool


# Solver state, all hashable:
#   machines: per stage, tuple of each machine's available-at time
#   jobs:     per job, ("p", next_stage, release) while pending or ("d", final)
#   batch:    decision queue of the current tied group (job ids, front decides)
#   defers:   defer counts aligned with batch
_State = tuple[tuple[tuple[Scalar, ...], ...], tuple[tuple, ...], tuple[int, ...], tuple[int, ...]]


class _GameSolver:
    def __init__(self, instance: Instance, model: ActionModel, limits: SearchLimits):
        self.instance = instance
        self.model = model
        self.k = instance.k
        self.exec = [
            [job.size / s.speed for s in instance.stages] for job in instance.jobs
        ]
        self.memo: dict[_State, tuple[tuple[Scalar, ...], Action]] = {}
        self.nodes = 0
        self.node_budget = limits.node_budget

    def initial_state(self) -> _State:
        machines = tuple(tuple(Fraction(0) for _ in range(s.machines)) for s in self.instance.stages)
        jobs = tuple(("p", 0, Fraction(0)) for _ in range(self.instance.n))
        return (machines, jobs, (), ())

    def with_batch(self, state: _State) -> _State:
        """Materialize the next decision batch when the current one is spent.

        A batch is the maximal group of pending decisions sharing the earliest
        (release, stage); it is ordered by job id and tracked explicitly so
        defers can permute it.
        """
        machines, jobs, batch, defers = state
        if batch:
            return state
        pending = [(entry[2], entry[1], j) for j, entry in enumerate(jobs) if entry[0] == "p"]
        if not pending:
            return state
        release, stage, _ = min(pending)
        group = tuple(j for r, st, j in sorted(pending) if r == release and st == stage)
        return (machines, jobs, group, (0,) * len(group))

    def actions(self, state: _State) -> tuple[Action, ...]:
        machines, jobs, batch, defers = state
        j = batch[0]
        stage = jobs[j][1]
        acts: list[Action] = list(range(len(machines[stage])))
        if self.model.allow_defer and len(batch) >= 2:
            cap = len(batch) - 1
            if self.model.max_defers_per_batch is not None:
                cap = min(cap, self.model.max_defers_per_batch)
            if defers[0] < cap:
                acts.append(DEFER)
        return tuple(acts)

    def apply(self, state: _State, action: Action) -> _State:
        machines, jobs, batch, defers = state
        j = batch[0]
        _, stage, release = jobs[j]
        if action == DEFER:
            new_batch = (batch[1], batch[0]) + batch[2:]
            new_defers = (defers[1], defers[0] + 1) + defers[2:]
            return (machines, jobs, new_batch, new_defers)
        avail = machines[stage][action]
        start = release if release > avail else avail
        completion = start + self.exec[j][stage]
        stage_machines = list(machines[stage])
        stage_machines[action] = completion
        new_machines = machines[:stage] + (tuple(stage_machines),) + machines[stage + 1 :]
        if stage + 1 == self.k:
            entry: tuple = ("d", completion)
        else:
            entry = ("p", stage + 1, completion)
        new_jobs = jobs[:j] + (entry,) + jobs[j + 1 :]
        return (new_machines, new_jobs, batch[1:], defers[1:])

    def value(self, state: _State) -> tuple[Scalar, ...]:
        """Final completion vector under optimal play from `state` on.

        The decider minimizes its own final completion; ties prefer machine
        actions in index order, defer last.
        """
        state = self.with_batch(state)
        machines, jobs, batch, defers = state
        if not batch:
            return tuple(entry[1] for entry in jobs)
        hit = self.memo.get(state)
        if hit is not None:
            return hit[0]
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise LimitsExceeded(f"game tree exceeded the node budget of {self.node_budget}")
        j = batch[0]
        best_vec: tuple[Scalar, ...] | None = None
        best_action: Action = 0
        for action in self.actions(state):
            vec = self.value(self.apply(state, action))
            if best_vec is None or vec[j] < best_vec[j]:
                best_vec = vec
                best_action = action
        assert best_vec is not None
        self.memo[state] = (best_vec, best_action)
        return best_vec

    def chosen_action(self, state: _State) -> Action:
        state = self.with_batch(state)
        if state not in self.memo:
            self.value(state)
        return self.memo[state][1]

    def greedy_action(self, state: _State) -> int:
        """The least-loaded, lowest-index machine for the current decider."""
        machines, jobs, batch, _ = state
        j = batch[0]
        stage = jobs[j][1]
        speed = self.instance.stages[stage].speed
        loads = [speed * avail for avail in machines[stage]]
        return min(range(len(loads)), key=lambda a: (loads[a], a))

    def node_view(self, state: _State) -> GameNode:
        machines, jobs, batch, _ = state
        j = batch[0]
        _, stage, release = jobs[j]
        return GameNode(j, stage, release, batch, self.actions(state))


def _check_limits(instance: Instance, limits: SearchLimits) -> None:
    if instance.n > limits.max_jobs:
        raise LimitsExceeded(f"{instance.n} jobs exceeds the game-solver cap of {limits.max_jobs}")
    if instance.k > limits.max_stages:
        raise LimitsExceeded(f"{instance.k} stages exceeds the cap of {limits.max_stages}")
    worst = max(s.machines for s in instance.stages)
    if worst > limits.max_machines:
        raise LimitsExceeded(f"{worst} machines in a stage exceeds the cap of {limits.max_machines}")


def _equilibrium_plan(solver: _GameSolver) -> Plan:
    """Replay the solved equilibrium path into an evaluable plan."""
    instance = solver.instance
    positions = [[0] * s.machines for s in instance.stages]
    entries: list[list[tuple[int, int] | None]] = [[None] * instance.n for _ in range(instance.k)]
    state = solver.with_batch(solver.initial_state())
    while state[2]:
        action = solver.chosen_action(state)
        if action != DEFER:
            j = state[2][0]
            stage = state[1][j][1]
            entries[stage][j] = (action, positions[stage][action])
            positions[stage][action] += 1
        state = solver.with_batch(solver.apply(state, action))
    return tuple(tuple(stage) for stage in entries)  # type: ignore[arg-type]


def spne_solve(
    instance: Instance,
    model: ActionModel | None = None,
    limits: SearchLimits | None = None,
) -> EquilibriumResult:
    """Solve the game by exhaustive backward induction and report the outcome.

    Payoff is each job's own final completion time. The returned trace is the
    equilibrium path replayed through the schedule kernel; deltas are
    equilibrium minus greedy, per job.
    """
    model = model or ActionModel()
    limits = limits or DEFAULT_LIMITS
    _check_limits(instance, limits)
    solver = _GameSolver(instance, model, limits)
    finals = solver.value(solver.initial_state())
    plan = _equilibrium_plan(solver)
    trace = evaluate_schedule(instance, plan)
    greedy_trace, _ = greedy_schedule(instance)
    greedy_finals = greedy_trace.final_completions()
    deltas = tuple(a - b for a, b in zip(finals, greedy_finals))
    return EquilibriumResult(
        trace=trace,
        final_completions=finals,
        greedy_trace=greedy_trace,
        greedy_final_completions=greedy_finals,
        deltas=deltas,
        greedy_is_spne_outcome=trace == greedy_trace,
    )


def check_greedy_spne(
    instance: Instance,
    model: ActionModel | None = None,
    limits: SearchLimits | None = None,
) -> SpneCertificate:
    """Walk the greedy path and test every decision against optimal play.

    At each node the greedy action's value (under optimal continuation) is
    compared with every alternative action's value for the same decider. A
    strictly better alternative is returned as a concrete deviation; greedy
    play continues regardless so all nodes get checked.
    """
    model = model or ActionModel()
    limits = limits or DEFAULT_LIMITS
    _check_limits(instance, limits)
    solver = _GameSolver(instance, model, limits)
    deviations: list[Deviation] = []
    state = solver.with_batch(solver.initial_state())
    index = 0
    while state[2]:
        greedy_act = solver.greedy_action(state)
        j = state[2][0]
        greedy_value = solver.value(solver.apply(state, greedy_act))[j]
        best_alt: tuple[Scalar, Action] | None = None
        for action in solver.actions(state):
            if action == greedy_act:
                continue
            value = solver.value(solver.apply(state, action))[j]
            if best_alt is None or value < best_alt[0]:
                best_alt = (value, action)
        if best_alt is not None and best_alt[0] < greedy_value:
            deviations.append(
                Deviation(index, solver.node_view(state), greedy_act, greedy_value, best_alt[1], best_alt[0])
            )
        state = solver.with_batch(solver.apply(state, greedy_act))
        index += 1
    return SpneCertificate(not deviations, tuple(deviations), index)


def verify_deviation(
    instance: Instance,
    deviation: Deviation,
    model: ActionModel | None = None,
    limits: SearchLimits | None = None,
) -> bool:
    """Replay greedy up to the deviation node, apply the deviating action, and
    solve the subgame; True iff the claimed value and improvement reproduce."""
    model = model or ActionModel()
    limits = limits or DEFAULT_LIMITS
    _check_limits(instance, limits)
    solver = _GameSolver(instance, model, limits)
    state = solver.with_batch(solver.initial_state())
    for _ in range(deviation.decision_index):
        if not state[2]:
            return False
        state = solver.with_batch(solver.apply(state, solver.greedy_action(state)))
    if not state[2] or state[2][0] != deviation.node.job:
        return False
    greedy_value = solver.value(solver.apply(state, solver.greedy_action(state)))[deviation.node.job]
    value = solver.value(solver.apply(state, deviation.action))[deviation.node.job]
    return value == deviation.value and greedy_value == deviation.greedy_value and value < greedy_value
