"""UAV-AGV interaction tasks compiled into chained planning episodes.

Both built-in tasks stage a rendezvous: the ground vehicle drives to a
meeting point while the UAV parks a fixed number of cells straight above it,
both holding for a few ticks. Afterwards the cargo either continues on the
ground (inventory scan) or flies off to an elevated drop point (aerial
transfer). Episodes are independent planning problems solved in order, each
starting from the previous final configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InvariantViolation, NoSolutionError, ResourceLimitError, TaskError
from .mapf import AGV, UAV, validate_agents
from .sim import RunMetrics, Simulator, collect_metrics
from .solvers import SolverConfig

INVENTORY_SCAN = "inventory_scan"
AERIAL_TRANSFER = "aerial_transfer"
TASK_KINDS = (INVENTORY_SCAN, AERIAL_TRANSFER)

DEFAULT_HOVER_OFFSET = 2
DEFAULT_HOLD_STEPS = 3


@dataclass(frozen=True)
class TaskScript:
    kind: str
    agv_id: int
    uav_id: int
    point_a: tuple[int, int, int]
    point_b: tuple[int, int, int]
    hover_offset: int = DEFAULT_HOVER_OFFSET
    hold_steps: int = DEFAULT_HOLD_STEPS

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        object.__setattr__(self, "point_a", tuple(int(v) for v in self.point_a))
        object.__setattr__(self, "point_b", tuple(int(v) for v in self.point_b))
        if self.hover_offset < 1:
            raise ValueError("hover_offset must be >= 1")
        if self.hold_steps < 1:
            raise ValueError("hold_steps must be >= 1")

    @property
    def hover_cell(self) -> tuple[int, int, int]:
        a = self.point_a
        return (a[0], a[1], a[2] + self.hover_offset)


@dataclass(frozen=True)
class Episode:
    """Start/goal assignment for every agent plus end-of-episode holds."""

    starts: dict
    goals: dict
    holds: tuple  # (agent_id, cell, duration)


@dataclass(frozen=True)
class TaskReport:
    episodes: tuple  # RunMetrics per episode, in order
    rendezvous_ok: bool
    success: bool
    failed_episode: int | None = None
    reason: str = ""


def compile_task(grid, script: TaskScript, agents) -> list[Episode]:
    """Expand a task script into its episode sequence.

    Episode 1 sends the pair to the rendezvous (AGV at point A, UAV hovering
    above it) while everyone else heads for their own goal; episode 2
    releases the pair toward the task's destination. Episode n+1 starts where
    episode n ended, which for a successful run is episode n's goals.
    """
    by_id = {a.id: a for a in agents}
    agv = by_id.get(script.agv_id)
    uav = by_id.get(script.uav_id)
    if agv is None or uav is None:
        raise TaskError(f"task references unknown agent ids {script.agv_id}/{script.uav_id}")
    if agv.kind != AGV:
        raise TaskError(f"agv_id {script.agv_id} names a {agv.kind}, expected an AGV")
    if uav.kind != UAV:
        raise TaskError(f"uav_id {script.uav_id} names a {uav.kind}, expected a UAV")
    if script.point_a[2] != 0:
        raise TaskError(f"point A {script.point_a} must sit on the ground layer")
    if script.kind == INVENTORY_SCAN and script.point_b[2] != 0:
        raise TaskError(f"point B {script.point_b} must sit on the ground layer for an inventory scan")
    hover = script.hover_cell
    if not grid.in_bounds(*hover):
        raise TaskError(f"hover cell {hover} is out of bounds")
    if grid.is_occupied(*hover):
        raise TaskError(f"hover cell {hover} is occupied")

    roster = sorted(agents, key=lambda a: a.id)
    e1_goals = {a.id: a.goal for a in roster}
    e1_goals[agv.id] = script.point_a
    e1_goals[uav.id] = hover
    e2_goals = dict(e1_goals)
    if script.kind == INVENTORY_SCAN:
        e2_goals[agv.id] = script.point_b
        e2_goals[uav.id] = uav.goal
    else:
        e2_goals[uav.id] = script.point_b
        e2_goals[agv.id] = agv.goal

    episodes = [
        Episode(
            starts={a.id: a.start for a in roster},
            goals=e1_goals,
            holds=((agv.id, script.point_a, script.hold_steps), (uav.id, hover, script.hold_steps)),
        ),
        Episode(starts=dict(e1_goals), goals=e2_goals, holds=()),
    ]
    for n, ep in enumerate(episodes, start=1):
        instance = [replace(a, start=ep.starts[a.id], goal=ep.goals[a.id]) for a in roster]
        problems = validate_agents(grid, instance)
        if problems:
            raise TaskError(f"episode {n} is not a valid instance:\n  " + "\n  ".join(problems))
    return episodes


def hover_streak(states, uav_id: int, agv_id: int, hover_offset: int) -> int:
    """Consecutive ticks at the end of a log with the UAV right above the AGV."""
    streak = 0
    for state in reversed(states):
        u = state.cells[uav_id]
        g = state.cells[agv_id]
        if u == (g[0], g[1], g[2] + hover_offset):
            streak += 1
        else:
            break
    return streak


def run_task(grid, agents, script: TaskScript, config: SolverConfig | None = None) -> TaskReport:
    """Solve and simulate each episode in order, then verify the rendezvous.

    The rendezvous predicate is checked from the recorded tick logs, not
    from solver output. Episode 1's log is extended by hold_steps parked
    ticks before episode 2 begins.
    """
    config = config or SolverConfig()
    episodes = compile_task(grid, script, agents)
    roster = sorted(agents, key=lambda a: a.id)
    cells = {a.id: a.start for a in roster}
    metrics: list[RunMetrics] = []
    rendezvous_ok = False

    for n, ep in enumerate(episodes, start=1):
        if cells != ep.starts:
            raise InvariantViolation(f"episode {n} does not start where episode {n - 1} ended")
        instance = tuple(replace(a, start=ep.starts[a.id], goal=ep.goals[a.id]) for a in roster)
        sim = Simulator()
        try:
            sim._init_core(grid, instance, config)
        except (NoSolutionError, ResourceLimitError) as exc:
            return TaskReport(
                episodes=tuple(metrics),
                rendezvous_ok=False,
                success=False,
                failed_episode=n,
                reason=f"episode {n}: {exc}",
            )
        record = sim.run()
        m = collect_metrics(record)
        metrics.append(m)
        if m.success_rate < 1.0:
            return TaskReport(
                episodes=tuple(metrics),
                rendezvous_ok=False,
                success=False,
                failed_episode=n,
                reason=f"episode {n}: only {m.success_rate:.3f} of agents reached their goals",
            )
        states = list(record.states)
        hold = max((d for _, _, d in ep.holds), default=0)
        final = states[-1]
        for extra in range(1, hold + 1):
            states.append(replace(final, tick=final.tick + extra))
        if n == 1:
            rendezvous_ok = (
                hover_streak(states, script.uav_id, script.agv_id, script.hover_offset)
                >= script.hold_steps
            )
        cells = dict(states[-1].cells)

    success = rendezvous_ok
    reason = "" if success else "rendezvous hold was never observed in the tick log"
    return TaskReport(
        episodes=tuple(metrics),
        rendezvous_ok=rendezvous_ok,
        success=success,
        failed_episode=None,
        reason=reason,
    )
