"""Space-time A* in the time-expanded grid, plus the reservation table.

States are (cell, timestep). All steps cost 1, including waits; resting at
the destination after final arrival is free, which the search realizes by
only accepting the goal once no later constraint or reservation can touch
it. Ties on f are broken by lower heuristic, then lexicographic cell order,
so identical inputs always return the identical path.
"""

from __future__ import annotations

import time
from heapq import heappop, heappush

from .errors import SearchLimitExceeded
from .mapf import AGV, MOVES, VERTEX


class Budget:
    """Shared expansion/wall-clock budget for one solver invocation."""

    __slots__ = ("remaining", "deadline", "used")

    def __init__(self, max_expansions: int | None = None, time_limit: float | None = None):
        self.remaining = max_expansions
        self.deadline = None if time_limit is None else time.perf_counter() + time_limit
        self.used = 0

    def charge(self, n: int = 1) -> None:
        self.used += n
        if self.remaining is not None:
            self.remaining -= n
            if self.remaining < 0:
                raise SearchLimitExceeded(f"expansion limit hit after {self.used} nodes")
        if self.deadline is not None and self.used & 0x3F == 0:
            self.check_time()

    def check_time(self) -> None:
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise SearchLimitExceeded("time limit exceeded")


class ReservationTable:
    """Space-time occupancy of committed paths, stay-at-goal included."""

    def __init__(self):
        self._vertex = set()  # (cell, t)
        self._edge = set()  # (u, v, t): a path moved u -> v arriving at t
        self._terminal = {}  # cell -> time from which it is parked forever
        self._last_vertex = {}  # cell -> latest finite reservation time
        self.max_time = 0

    def reserve_path(self, cells, start_time: int = 0) -> None:
        prev = None
        for s, cell in enumerate(cells):
            t = start_time + s
            self._vertex.add((cell, t))
            if self._last_vertex.get(cell, -1) < t:
                self._last_vertex[cell] = t
            if prev is not None:
                self._edge.add((prev, cell, t))
            prev = cell
        end = start_time + len(cells) - 1
        goal = cells[-1]
        if goal not in self._terminal or self._terminal[goal] > end:
            self._terminal[goal] = end
        if end > self.max_time:
            self.max_time = end

    def vertex_free(self, cell, t: int) -> bool:
        if (cell, t) in self._vertex:
            return False
        parked = self._terminal.get(cell)
        return parked is None or t < parked

    def move_free(self, u, v, t: int) -> bool:
        return self.vertex_free(v, t) and (v, u, t) not in self._edge

    def terminal_time(self, cell) -> int | None:
        return self._terminal.get(cell)

    def last_vertex_time(self, cell) -> int:
        return self._last_vertex.get(cell, -1)


def spacetime_astar(
    grid,
    kind: str,
    start,
    goal,
    constraints=(),
    reservations: ReservationTable | None = None,
    start_time: int = 0,
    budget: Budget | None = None,
    avoid: ReservationTable | None = None,
):
    """Minimum-arrival-time path from start to goal, or None when there is none.

    The returned tuple of cells is indexed by timestep, first entry at
    ``start_time``. The search refuses to finish on the goal while any later
    vertex constraint or reservation still touches it, and is cut off at an
    absolute horizon of free-cell-count + last-constrained-timestep + 1,
    which guarantees termination.

    ``avoid`` is a soft conflict-avoidance table: it never blocks a move and
    never changes the returned cost, but among equal-cost paths the one
    touching it least wins. High-level solvers pass the other agents' current
    paths here so replans sidestep them instead of enumerating equally cheap
    collisions.

    Raises SearchLimitExceeded when the budget runs out first.
    """
    nx, ny, nz = grid.dims
    occ = grid.occ_bytes
    start = tuple(start)
    goal = tuple(goal)
    if grid.is_occupied(*start) or grid.is_occupied(*goal):
        raise ValueError("start and goal must be free cells")
    if kind == AGV and not (start[2] == 0 == goal[2]):
        raise ValueError("ground agents must start and end on layer 0")
    moves = MOVES[kind]

    vertex_cons = set()
    edge_cons = set()
    last_dynamic = start_time
    goal_blocked_until = start_time - 1
    for c in constraints:
        if c.time > last_dynamic:
            last_dynamic = c.time
        if c.kind == VERTEX:
            vertex_cons.add((c.cells[0], c.time))
            if c.cells[0] == goal and c.time > goal_blocked_until:
                goal_blocked_until = c.time
        else:
            edge_cons.add((c.cells[0], c.cells[1], c.time))
    res = reservations
    if res is not None:
        if res.terminal_time(goal) is not None:
            return None  # someone parks on the goal forever
        goal_blocked_until = max(goal_blocked_until, res.last_vertex_time(goal))
        last_dynamic = max(last_dynamic, res.max_time)
    min_arrival = max(start_time, goal_blocked_until + 1)
    horizon = last_dynamic + grid.free_cell_count + 1

    if (start, start_time) in vertex_cons:
        return None
    if res is not None and not res.vertex_free(start, start_time):
        return None

    gx, gy, gz = goal
    h0 = abs(start[0] - gx) + abs(start[1] - gy) + abs(start[2] - gz)
    # every step costs 1, so a state's g equals its elapsed time; only the
    # soft-collision count can differ between two visits of the same state
    heap = [(h0, 0, h0, start[0], start[1], start[2], start_time)]
    coll_best = {(start, start_time): 0}
    parent = {}
    closed = set()

    while heap:
        f, coll, h, i, j, k, t = heappop(heap)
        cell = (i, j, k)
        state = (cell, t)
        if state in closed:
            continue
        closed.add(state)
        if budget is not None:
            budget.charge()
        if cell == goal and t >= min_arrival:
            out = [cell]
            while state in parent:
                state = parent[state]
                out.append(state[0])
            out.reverse()
            return tuple(out)
        if t >= horizon:
            continue
        g1 = f - h + 1
        t1 = t + 1
        for dx, dy, dz in moves:
            ci = i + dx
            cj = j + dy
            ck = k + dz
            if not (0 <= ci < nx and 0 <= cj < ny and 0 <= ck < nz):
                continue
            if occ[ci + nx * (cj + ny * ck)]:
                continue
            ncell = (ci, cj, ck)
            if (ncell, t1) in vertex_cons:
                continue
            if (cell, ncell, t1) in edge_cons:
                continue
            if res is not None and not res.move_free(cell, ncell, t1):
                continue
            ncoll = coll
            if avoid is not None and not avoid.move_free(cell, ncell, t1):
                ncoll += 1
            nstate = (ncell, t1)
            old = coll_best.get(nstate)
            if old is not None and old <= ncoll:
                continue
            coll_best[nstate] = ncoll
            parent[nstate] = state
            nh = abs(ci - gx) + abs(cj - gy) + abs(ck - gz)
            heappush(heap, (g1 + nh, ncoll, nh, ci, cj, ck, t1))
    return None
