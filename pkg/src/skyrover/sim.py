"""Simulation wrapper (init/step/reset), plan execution, and run metrics.

One Simulator instance drives one scenario, either replaying a precomputed
solution or querying an online policy every tick. Steps preserve
conflict-freedom by construction and re-check it defensively; a violation
here means a solver or shield bug and raises instead of passing silently.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass

from .errors import (
    InvariantViolation,
    NoSolutionError,
    ParseError,
    ResourceLimitError,
    ScenarioError,
)
from .mapf import (
    Solution,
    detect_conflicts,
    make_solution,
    path_cost,
    validate_agents,
    validate_solution,
)
from .policy import WorldView, get_policy, online_policy_step
from .solvers import NO_SOLUTION, ONLINE, SolverConfig, solve

EN_ROUTE = "en-route"
AT_GOAL = "at-goal"
FAILED = "failed"

PRECOMPUTED_MODE = "precomputed-plan"
ONLINE_MODE = "online-policy"

DEFAULT_CELL_DURATION = 1.0  # seconds per step: 1 m cells at 1 m/s, presentational only


@dataclass(frozen=True)
class SimState:
    tick: int
    cells: dict
    status: dict
    mode: str

    @property
    def all_at_goal(self) -> bool:
        return all(s == AT_GOAL for s in self.status.values())


@dataclass(frozen=True)
class RunRecord:
    """Everything a finished (or budget-exhausted) run left behind."""

    grid: object
    agents: tuple
    mode: str
    computation_time: float
    states: tuple
    solution: Solution | None
    budget: int


@dataclass(frozen=True)
class RunMetrics:
    computation_time: float
    success_rate: float
    makespan: int
    sum_of_costs: int
    path_lengths: dict


def grid_diameter(grid) -> int:
    nx, ny, nz = grid.dims
    return (nx - 1) + (ny - 1) + (nz - 1)


class Simulator:
    """Unified stepping interface over precomputed plans and online policies."""

    def __init__(self):
        self._grid = None
        self._grid_key = None
        self._scenario = None
        self._config = None
        self._agents = ()
        self._solution = None
        self._policy = None
        self._computation_time = 0.0
        self._states = []

    # -- lifecycle ---------------------------------------------------------

    def init(self, scenario, config: SolverConfig | None = None, solution: Solution | None = None) -> SimState:
        """Load the scenario, run the solver (timed) or the policy loader, tick 0.

        An externally supplied ``solution`` (a replayed plan file) skips the
        solver but is still validated before it is trusted.
        """
        config = config or scenario.solver or SolverConfig()
        grid_key = (scenario.grid if isinstance(scenario.grid, str) else json.dumps(scenario.grid, sort_keys=True), scenario.base_dir)
        if self._grid is None or grid_key != self._grid_key:
            self._grid = scenario.materialize_grid()
            self._grid_key = grid_key
        self._scenario = scenario
        problems = validate_agents(self._grid, scenario.agents)
        if problems:
            raise ScenarioError("invalid scenario:\n  " + "\n  ".join(problems))
        return self._init_core(self._grid, tuple(scenario.agents), config, solution=solution)

    def _init_core(self, grid, agents, config, solution=None, external=None) -> SimState:
        external = solution is not None if external is None else external
        self._config = config
        self._agents = tuple(sorted(agents, key=lambda a: a.id))
        self._solution = None
        self._policy = None
        if config.algorithm == ONLINE:
            t0 = time.perf_counter()
            self._policy = get_policy(config.online_policy)
            self._computation_time = time.perf_counter() - t0
            mode = ONLINE_MODE
        else:
            if solution is None:
                t0 = time.perf_counter()
                result = solve(grid, self._agents, config)
                self._computation_time = time.perf_counter() - t0
                if not result.ok:
                    err = NoSolutionError if result.status == NO_SOLUTION else ResourceLimitError
                    raise err(f"{config.algorithm}: {result.reason}")
                solution = result.solution
            else:
                self._computation_time = 0.0
            violations = validate_solution(grid, self._agents, solution.paths)
            if violations:
                detail = "; ".join(v.detail for v in violations[:5])
                if external:
                    raise ScenarioError(f"supplied plan fails validation: {detail}")
                raise InvariantViolation(f"solver produced an invalid solution: {detail}")
            self._solution = solution
            mode = PRECOMPUTED_MODE
        self._grid = grid
        cells = {a.id: a.start for a in self._agents}
        state = SimState(0, cells, self._statuses(cells, 0, mode), mode)
        self._states = [state]
        return state

    def _statuses(self, cells, tick, mode) -> dict:
        status = {}
        for a in self._agents:
            if mode == PRECOMPUTED_MODE:
                arrived = tick >= path_cost(self._solution.paths[a.id])
            else:
                arrived = cells[a.id] == a.goal
            status[a.id] = AT_GOAL if arrived else EN_ROUTE
        return status

    @property
    def state(self) -> SimState:
        return self._states[-1]

    @property
    def grid(self):
        return self._grid

    @property
    def computation_time(self) -> float:
        return self._computation_time

    def step(self) -> SimState:
        """Advance one tick; a state with everyone at goal is a fixpoint no-op."""
        cur = self.state
        if cur.all_at_goal:
            return cur
        if cur.mode == PRECOMPUTED_MODE:
            nxt = {
                a.id: _path_cell(self._solution.paths[a.id], cur.tick + 1) for a in self._agents
            }
        else:
            view = WorldView(self._grid, self._agents, cur.cells)
            nxt = online_policy_step(self._policy, view)
        _check_step(cur.cells, nxt)
        state = SimState(cur.tick + 1, nxt, self._statuses(nxt, cur.tick + 1, cur.mode), cur.mode)
        self._states.append(state)
        return state

    def reset(self, scenario=None, config: SolverConfig | None = None) -> SimState:
        """Fresh state as from init, reusing the loaded grid when unchanged."""
        scenario = scenario if scenario is not None else self._scenario
        if scenario is None:
            raise ScenarioError("reset before init: no scenario to rebuild from")
        return self.init(scenario, config=config or self._config)

    def run(self, max_ticks: int | None = None) -> RunRecord:
        """Step to completion (precomputed) or until the tick budget runs out."""
        if self.state.mode == PRECOMPUTED_MODE:
            budget = self._solution.makespan if max_ticks is None else max_ticks
        else:
            budget = (4 * grid_diameter(self._grid)) if max_ticks is None else max_ticks
        while not self.state.all_at_goal and self.state.tick < budget:
            self.step()
        if not self.state.all_at_goal:
            final = self.state
            status = {aid: (s if s == AT_GOAL else FAILED) for aid, s in final.status.items()}
            self._states[-1] = SimState(final.tick, final.cells, status, final.mode)
        return RunRecord(
            grid=self._grid,
            agents=self._agents,
            mode=self.state.mode,
            computation_time=self._computation_time,
            states=tuple(self._states),
            solution=self._solution,
            budget=budget,
        )


def _path_cell(cells, t: int):
    return cells[t] if t < len(cells) else cells[-1]


def _check_step(cur: dict, nxt: dict) -> None:
    targets = {}
    for aid in sorted(nxt):
        cell = nxt[aid]
        if cell in targets:
            raise InvariantViolation(f"agents {targets[cell]} and {aid} collide in cell {cell}")
        targets[cell] = aid
    ids = sorted(nxt)
    for x in range(len(ids)):
        for y in range(x + 1, len(ids)):
            a, b = ids[x], ids[y]
            if nxt[a] == cur[b] and nxt[b] == cur[a] and cur[a] != cur[b]:
                raise InvariantViolation(f"agents {a} and {b} swap cells")


# -- metrics -------------------------------------------------------------


def collect_metrics(record: RunRecord) -> RunMetrics:
    """The four headline numbers, recomputed from the record, never trusted.

    Success needs conflict-freedom for the whole run plus arrival within the
    tick budget; for precomputed runs the stored solution is re-validated as
    the authoritative check.
    """
    agents = record.agents
    trajectories = {a.id: tuple(s.cells[a.id] for s in record.states) for a in agents}
    flagged = set()
    if record.mode == PRECOMPUTED_MODE:
        for v in validate_solution(record.grid, agents, record.solution.paths):
            if v.agent is not None:
                flagged.add(v.agent)
    for c in detect_conflicts(trajectories):
        flagged.update(c.agents)

    arrivals = {}
    for a in agents:
        traj = trajectories[a.id]
        arrivals[a.id] = path_cost(traj) if traj[-1] == a.goal else None

    successes = sum(1 for a in agents if arrivals[a.id] is not None and a.id not in flagged)
    costs = {
        aid: (len(trajectories[aid]) - 1 if t is None else t) for aid, t in arrivals.items()
    }
    if record.mode == PRECOMPUTED_MODE:
        lengths = {aid: len(cells) - 1 for aid, cells in record.solution.paths.items()}
    else:
        lengths = {aid: len(traj) - 1 for aid, traj in trajectories.items()}
    return RunMetrics(
        computation_time=record.computation_time,
        success_rate=successes / len(agents) if agents else 1.0,
        makespan=max(costs.values(), default=0),
        sum_of_costs=sum(costs.values()),
        path_lengths=lengths,
    )


# -- plan execution ------------------------------------------------------


@dataclass(frozen=True)
class WaypointCommand:
    agent_id: int
    timestamp: float
    position: tuple[float, float, float]
    hold: bool


def execute_plan(solution: Solution, cell_duration: float, resolution: float, origin) -> tuple:
    """Lower a discrete solution to a merged, timestamped waypoint stream.

    One command per agent per path index: timestamp = index * cell_duration,
    position at the cell center, hold set when the cell repeats the previous
    one. The stream is ordered by (timestamp, agent id).
    """
    if cell_duration <= 0:
        raise ValueError("cell_duration must be positive")
    ox, oy, oz = (float(v) for v in origin)
    out = []
    for aid in sorted(solution.paths):
        cells = solution.paths[aid]
        for t, (i, j, k) in enumerate(cells):
            pos = (
                ox + (i + 0.5) * resolution,
                oy + (j + 0.5) * resolution,
                oz + (k + 0.5) * resolution,
            )
            hold = t > 0 and cells[t] == cells[t - 1]
            out.append(WaypointCommand(aid, t * cell_duration, pos, hold))
    out.sort(key=lambda c: (c.timestamp, c.agent_id))
    return tuple(out)


_WAYPOINT_HEADER = "agent_id,timestamp_s,x,y,z,hold"


def waypoints_to_bytes(commands) -> bytes:
    lines = [_WAYPOINT_HEADER]
    for c in commands:
        x, y, z = c.position
        lines.append(f"{c.agent_id},{c.timestamp!r},{x!r},{y!r},{z!r},{'true' if c.hold else 'false'}")
    return ("\n".join(lines) + "\n").encode("ascii")


def waypoints_from_bytes(data: bytes) -> tuple:
    text = data.decode("ascii")
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or ",".join(rows[0]) != _WAYPOINT_HEADER:
        raise ParseError(f"waypoint CSV must start with header {_WAYPOINT_HEADER!r}")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != 6:
            raise ParseError(f"waypoint row {n} has {len(row)} columns, expected 6")
        if row[5] not in ("true", "false"):
            raise ParseError(f"waypoint row {n} hold flag must be true or false")
        out.append(
            WaypointCommand(
                agent_id=int(row[0]),
                timestamp=float(row[1]),
                position=(float(row[2]), float(row[3]), float(row[4])),
                hold=row[5] == "true",
            )
        )
    return tuple(out)


# -- plan files ----------------------------------------------------------


@dataclass(frozen=True)
class PlanFile:
    paths: dict
    kinds: dict
    sum_of_costs: int
    makespan: int
    computation_time_s: float

    @property
    def solution(self) -> Solution:
        return make_solution(self.paths)


def plan_to_bytes(solution: Solution, agents, computation_time: float) -> bytes:
    kinds = {a.id: a.kind for a in agents}
    payload = {
        "agents": [
            {"id": aid, "kind": kinds[aid], "path": [list(c) for c in solution.paths[aid]]}
            for aid in sorted(solution.paths)
        ],
        "sum_of_costs": solution.sum_of_costs,
        "makespan": solution.makespan,
        "computation_time_s": computation_time,
    }
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("ascii")


def plan_from_bytes(data: bytes) -> PlanFile:
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"plan is not valid JSON: {exc}") from None
    expected = {"agents", "sum_of_costs", "makespan", "computation_time_s"}
    if not isinstance(payload, dict) or set(payload) != expected:
        raise ParseError(f"plan must have exactly the keys {sorted(expected)}")
    paths = {}
    kinds = {}
    for entry in payload["agents"]:
        if set(entry) != {"id", "kind", "path"}:
            raise ParseError("plan agent entries must have exactly id, kind, path")
        aid = int(entry["id"])
        paths[aid] = tuple(tuple(int(v) for v in c) for c in entry["path"])
        kinds[aid] = entry["kind"]
    return PlanFile(
        paths=paths,
        kinds=kinds,
        sum_of_costs=int(payload["sum_of_costs"]),
        makespan=int(payload["makespan"]),
        computation_time_s=float(payload["computation_time_s"]),
    )


def write_plan(path, solution: Solution, agents, computation_time: float) -> None:
    with open(path, "wb") as fh:
        fh.write(plan_to_bytes(solution, agents, computation_time))


def read_plan(path) -> PlanFile:
    with open(path, "rb") as fh:
        return plan_from_bytes(fh.read())
