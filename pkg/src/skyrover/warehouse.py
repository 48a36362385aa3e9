"""Procedural warehouse worlds and seeded agent rosters.

The layout is synthetic: rows of shelf blocks with aisles between and a free
perimeter ring, sized so a mixed UAV/AGV fleet can route cleanly. Agent
starts and goals are sampled per seed, kept mutually distinct, and checked
for static reachability before the scenario is emitted.
"""

from __future__ import annotations

import random
import re
from collections import deque

import numpy as np

from .errors import PlacementError
from .mapf import AGV, MOVES, UAV, Agent
from .voxelgrid import OccupancyGrid3D

DEFAULT_DIMS = (80, 60, 10)
DEFAULT_SHELF_ROWS = 12
DEFAULT_SHELF_HEIGHT = 4
DEFAULT_ROSTER = "6uav+16agv"

# Dense shelving with aisles about two cells wide: narrow corridors keep the
# set of equal-cost ground routes small, which optimal conflict resolution
# needs to stay tractable on instances with crossing traffic.
_MARGIN = 2
_SHELF_DEPTH = 2
_SEGMENT = 10
_GAP = 2


def warehouse_grid(
    dims=DEFAULT_DIMS,
    shelf_rows: int = DEFAULT_SHELF_ROWS,
    shelf_height: int = DEFAULT_SHELF_HEIGHT,
) -> OccupancyGrid3D:
    """Deterministic shelf layout; the seed only affects agent sampling."""
    nx, ny, nz = (int(v) for v in dims)
    if min(nx, ny) < 2 * _MARGIN + _SHELF_DEPTH + 2 or nz < 1:
        raise PlacementError(f"dims {dims} are too small for a warehouse layout")
    if shelf_rows < 1:
        raise PlacementError("shelf_rows must be >= 1")
    region = ny - 2 * _MARGIN
    pitch = region // shelf_rows
    if pitch < _SHELF_DEPTH + 2:
        raise PlacementError(f"{shelf_rows} shelf rows do not fit {ny} cells of depth")
    height = max(1, min(shelf_height, nz))

    arr = np.zeros((nz, ny, nx), dtype=np.uint8)  # arr[k, j, i]
    for r in range(shelf_rows):
        y0 = _MARGIN + r * pitch + (pitch - _SHELF_DEPTH) // 2
        for j in range(y0, y0 + _SHELF_DEPTH):
            for i in range(_MARGIN, nx - _MARGIN):
                if (i - _MARGIN) % (_SEGMENT + _GAP) < _SEGMENT:
                    arr[:height, j, i] = 1
    return OccupancyGrid3D((0.0, 0.0, 0.0), 1.0, (nx, ny, nz), arr.reshape(-1))


def parse_roster(spec: str) -> list[tuple[int, str]]:
    """Parse roster strings like "6uav+16agv" into (count, kind) groups."""
    groups = []
    for part in spec.split("+"):
        m = re.fullmatch(r"(\d+)(uav|agv)", part.strip().lower())
        if not m:
            raise ValueError(f"bad roster component {part!r}; expected like '6uav' or '16agv'")
        groups.append((int(m.group(1)), m.group(2)))
    if not groups or sum(c for c, _ in groups) < 1:
        raise ValueError("roster must contain at least one agent")
    return groups


def _component_labels(grid: OccupancyGrid3D, kind: str) -> dict:
    """Connected-component id per free cell under the kind's move set."""
    nx, ny, nz = grid.dims
    occ = grid.occ_bytes
    if kind == AGV:
        cells = [(i, j, 0) for j in range(ny) for i in range(nx) if not occ[i + nx * j]]
    else:
        cells = [
            (i, j, k)
            for k in range(nz)
            for j in range(ny)
            for i in range(nx)
            if not occ[i + nx * (j + ny * k)]
        ]
    moves = [m for m in MOVES[kind] if m != (0, 0, 0)]
    labels = {}
    comp = 0
    for seed_cell in cells:
        if seed_cell in labels:
            continue
        labels[seed_cell] = comp
        queue = deque([seed_cell])
        while queue:
            i, j, k = queue.popleft()
            for dx, dy, dz in moves:
                n = (i + dx, j + dy, k + dz)
                if n in labels or not grid.in_bounds(*n) or grid.is_occupied(*n):
                    continue
                labels[n] = comp
                queue.append(n)
        comp += 1
    return labels


def sample_agents(grid: OccupancyGrid3D, roster, seed: int, max_attempts: int = 2000):
    """Seeded roster placement: free, mutually distinct, reachable start/goal."""
    rng = random.Random(seed)
    labels = {AGV: _component_labels(grid, AGV), UAV: _component_labels(grid, UAV)}
    pools = {kind: sorted(labels[kind]) for kind in (UAV, AGV)}
    used = set()
    agents = []
    aid = 0
    for count, kind in roster:
        pool = pools[kind]
        comp = labels[kind]
        for _ in range(count):
            if len(pool) - len(used) < 2:
                raise PlacementError(
                    f"grid has too few free {kind} cells for {sum(c for c, _ in roster)} agents"
                )
            for _ in range(max_attempts):
                start = pool[rng.randrange(len(pool))]
                if start in used:
                    continue
                goal = pool[rng.randrange(len(pool))]
                if goal in used or goal == start or comp[start] != comp[goal]:
                    continue
                break
            else:
                raise PlacementError(f"could not place agent {aid} after {max_attempts} attempts")
            used.add(start)
            used.add(goal)
            agents.append(Agent(aid, kind, start, goal))
            aid += 1
    return tuple(agents)


def generate_warehouse(
    dims=DEFAULT_DIMS,
    shelf_rows: int = DEFAULT_SHELF_ROWS,
    roster: str = DEFAULT_ROSTER,
    seed: int = 1,
    shelf_height: int = DEFAULT_SHELF_HEIGHT,
):
    """Grid plus sampled roster; the standard benchmark instance family."""
    grid = warehouse_grid(dims, shelf_rows, shelf_height)
    agents = sample_agents(grid, parse_roster(roster), seed)
    return grid, agents
