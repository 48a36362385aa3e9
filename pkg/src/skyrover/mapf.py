"""Problem model shared by every solver: agents, motion, conflicts, solutions.

Cells are (i, j, k) integer tuples. A path is a cell sequence indexed by
timestep; once a path ends the agent keeps occupying its final cell forever
(stay-at-goal). UAVs move with 6-connectivity plus wait, AGVs with planar
4-connectivity plus wait on the ground layer k = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

UAV = "uav"
AGV = "agv"
KINDS = (UAV, AGV)

VERTEX = "vertex"
EDGE = "edge"

WAIT = (0, 0, 0)
MOVES = {
    UAV: ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1), WAIT),
    AGV: ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), WAIT),
}
# Move legality in validation is checked against the 6-connected superset;
# the planar restriction for AGVs surfaces as a "kinematic" violation.
_LEGAL_DELTAS = frozenset(MOVES[UAV])


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) + abs(a[2] - b[2])


@dataclass(frozen=True)
class Agent:
    id: int
    kind: str
    start: tuple[int, int, int]
    goal: tuple[int, int, int]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")
        object.__setattr__(self, "start", tuple(int(v) for v in self.start))
        object.__setattr__(self, "goal", tuple(int(v) for v in self.goal))
        if len(self.start) != 3 or len(self.goal) != 3:
            raise ValueError("start and goal must be (i, j, k) cells")


def validate_agents(grid, agents) -> list[str]:
    """Instance-level checks; returns human-readable problems, empty when fine."""
    problems = []
    seen_ids = set()
    starts = {}
    goals = {}
    for a in agents:
        if a.id in seen_ids:
            problems.append(f"duplicate agent id {a.id}")
        seen_ids.add(a.id)
        for label, cell in (("start", a.start), ("goal", a.goal)):
            if not grid.in_bounds(*cell):
                problems.append(f"agent {a.id} {label} {cell} is out of bounds")
            elif grid.is_occupied(*cell):
                problems.append(f"agent {a.id} {label} {cell} is inside an obstacle")
            if a.kind == AGV and cell[2] != 0:
                problems.append(f"ground agent {a.id} {label} {cell} is above the ground layer")
        if a.start in starts:
            problems.append(f"agents {starts[a.start]} and {a.id} share start {a.start}")
        starts[a.start] = a.id
        if a.goal in goals:
            problems.append(f"agents {goals[a.goal]} and {a.id} share goal {a.goal}")
        goals[a.goal] = a.id
    return problems


def path_cost(cells) -> int:
    """Arrival timestep: first index of the maximal trailing run of the final cell.

    Trailing waits at the destination are free; any earlier step, including
    waits away from (or before finally settling on) the final cell, costs 1
    per timestep.
    """
    t = len(cells) - 1
    last = cells[-1]
    while t > 0 and cells[t - 1] == last:
        t -= 1
    return t


@dataclass(frozen=True)
class Conflict:
    """A vertex or edge collision between two agents, canonically ordered.

    ``agents`` is (a, b) with a < b. For edge conflicts ``cells`` is agent
    a's (from, to) transition into timestep ``time``.
    """

    kind: str
    agents: tuple[int, int]
    time: int
    cells: tuple

    @property
    def sort_key(self):
        return (self.time, self.agents[0], 0 if self.kind == VERTEX else 1, self.agents[1], self.cells)


@dataclass(frozen=True)
class Constraint:
    """Forbids one (agent, cell-or-transition, timestep) triple."""

    agent_id: int
    kind: str
    time: int
    cells: tuple


def constraints_from_conflict(conflict: Conflict) -> tuple[Constraint, Constraint]:
    """The two branch constraints resolving a conflict, lower agent first."""
    a, b = conflict.agents
    if conflict.kind == VERTEX:
        cells = conflict.cells
        return (
            Constraint(a, VERTEX, conflict.time, cells),
            Constraint(b, VERTEX, conflict.time, cells),
        )
    u, v = conflict.cells
    return (
        Constraint(a, EDGE, conflict.time, (u, v)),
        Constraint(b, EDGE, conflict.time, (v, u)),
    )


def _cell_at(cells, t: int):
    return cells[t] if t < len(cells) else cells[-1]


def detect_conflicts(paths: dict, horizon: int | None = None) -> list[Conflict]:
    """Every vertex and edge conflict among the paths, canonically ordered.

    Paths are a mapping agent id -> cell sequence. Agents whose path has
    ended are treated as parked on their final cell. The scan runs through
    the longest path (or ``horizon`` when given); output is sorted by
    (time, lower agent id, vertex before edge).
    """
    ids = sorted(paths)
    if len(ids) < 2:
        return []
    t_end = max(len(paths[a]) - 1 for a in ids) if horizon is None else horizon
    out = []
    prev = {a: paths[a][0] for a in ids}
    for t in range(t_end + 1):
        cur = {a: _cell_at(paths[a], t) for a in ids}
        by_cell = {}
        for a in ids:
            by_cell.setdefault(cur[a], []).append(a)
        for cell, group in by_cell.items():
            if len(group) > 1:
                for a, b in combinations(group, 2):
                    out.append(Conflict(VERTEX, (a, b), t, (cell,)))
        if t >= 1:
            seen = {}
            for a in ids:
                u, v = prev[a], cur[a]
                if u == v:
                    continue
                b = seen.get((v, u))
                if b is not None:
                    out.append(Conflict(EDGE, (b, a), t, (prev[b], cur[b])))
                seen[(u, v)] = a
        prev = cur
    out.sort(key=lambda c: c.sort_key)
    return out


@dataclass(frozen=True)
class Violation:
    kind: str
    agent: int | None
    time: int | None
    detail: str


def validate_solution(grid, agents, paths: dict) -> list[Violation]:
    """Check every path invariant plus conflict-freedom.

    The returned list is the single source of truth for benchmark success:
    a solution is valid exactly when it is empty.
    """
    out = []
    by_id = {a.id: a for a in agents}
    for a in agents:
        if a.id not in paths:
            out.append(Violation("missing-path", a.id, None, f"agent {a.id} has no path"))
    for aid in sorted(paths):
        agent = by_id.get(aid)
        if agent is None:
            out.append(Violation("unknown-agent", aid, None, f"path for unknown agent {aid}"))
            continue
        cells = paths[aid]
        if not cells:
            out.append(Violation("empty-path", aid, None, f"agent {aid} path is empty"))
            continue
        if tuple(cells[0]) != agent.start:
            out.append(Violation("start-mismatch", aid, 0, f"path starts at {cells[0]}, agent starts at {agent.start}"))
        if tuple(cells[-1]) != agent.goal:
            out.append(Violation("goal-mismatch", aid, len(cells) - 1, f"path ends at {cells[-1]}, goal is {agent.goal}"))
        for t, cell in enumerate(cells):
            if not grid.in_bounds(*cell):
                out.append(Violation("out-of-bounds", aid, t, f"cell {cell} at t={t} is out of bounds"))
                continue
            if grid.is_occupied(*cell):
                out.append(Violation("occupied-cell", aid, t, f"cell {cell} at t={t} is an obstacle"))
            if agent.kind == AGV and cell[2] != 0:
                out.append(Violation("kinematic", aid, t, f"ground agent at {cell} above layer 0 at t={t}"))
        for t in range(1, len(cells)):
            u, v = tuple(cells[t - 1]), tuple(cells[t])
            delta = (v[0] - u[0], v[1] - u[1], v[2] - u[2])
            if delta not in _LEGAL_DELTAS:
                out.append(Violation("illegal-move", aid, t, f"move {u} -> {v} at t={t} is not a unit step"))
    for c in detect_conflicts(paths):
        out.append(
            Violation(
                f"{c.kind}-conflict",
                c.agents[0],
                c.time,
                f"agents {c.agents[0]} and {c.agents[1]} collide at t={c.time} on {c.cells}",
            )
        )
    return out


@dataclass(frozen=True)
class Solution:
    """One path per agent plus the two standard objectives."""

    paths: dict
    sum_of_costs: int
    makespan: int


def make_solution(paths: dict) -> Solution:
    paths = {aid: tuple(tuple(c) for c in cells) for aid, cells in paths.items()}
    costs = {aid: path_cost(cells) for aid, cells in paths.items()}
    return Solution(
        paths=paths,
        sum_of_costs=sum(costs.values()),
        makespan=max(costs.values(), default=0),
    )
