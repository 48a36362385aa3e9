"""Independent reference implementations used to cross-check production code.

Everything here is deliberately written with different algorithms and data
layouts than the package: plain BFS over static grids, a triple-loop
pairwise conflict scan, uniform-cost search over joint configurations with
explicit "finished" flags, and brute-force path enumeration. Slow is fine;
these define the expected answers.
"""

from __future__ import annotations

import random
import struct
from collections import deque
from heapq import heappop, heappush
from itertools import combinations, count, product

import numpy as np

from skyrover import AGV, UAV, Agent, OccupancyGrid3D
from skyrover.mapf import MOVES, VERTEX


def static_bfs_cost(grid, kind, start, goal):
    """Shortest static path length under the kind's moves, or None."""
    if start == goal:
        return 0
    moves = [m for m in MOVES[kind] if m != (0, 0, 0)]
    seen = {tuple(start)}
    queue = deque([(tuple(start), 0)])
    while queue:
        (i, j, k), d = queue.popleft()
        for dx, dy, dz in moves:
            n = (i + dx, j + dy, k + dz)
            if n in seen or not grid.in_bounds(*n) or grid.is_occupied(*n):
                continue
            if n == tuple(goal):
                return d + 1
            seen.add(n)
            queue.append((n, d + 1))
    return None


def brute_force_conflicts(paths, horizon=None):
    """All vertex/edge conflicts by pairwise scan; canonical tuples.

    Returns (time, a, b, kind, cells) tuples sorted the same way the
    production detector sorts its output.
    """

    def at(cells, t):
        return tuple(cells[t]) if t < len(cells) else tuple(cells[-1])

    ids = sorted(paths)
    t_end = max(len(paths[a]) - 1 for a in ids) if horizon is None else horizon
    found = []
    for a, b in combinations(ids, 2):
        for t in range(t_end + 1):
            pa, pb = at(paths[a], t), at(paths[b], t)
            if pa == pb:
                found.append((t, a, b, "vertex", (pa,)))
            if t >= 1:
                qa, qb = at(paths[a], t - 1), at(paths[b], t - 1)
                if qa == pb and qb == pa and qa != pa:
                    found.append((t, a, b, "edge", (qa, pa)))
    found.sort(key=lambda c: (c[0], c[1], 0 if c[3] == "vertex" else 1, c[2], c[4]))
    return found


def _goal_distance_maps(grid, agents):
    """Per-agent true distance-to-goal over free cells (admissible heuristic)."""
    maps = []
    for agent in agents:
        moves = [m for m in MOVES[agent.kind] if m != (0, 0, 0)]
        dist = {agent.goal: 0}
        queue = deque([agent.goal])
        while queue:
            cell = queue.popleft()
            d = dist[cell]
            for dx, dy, dz in moves:
                n = (cell[0] + dx, cell[1] + dy, cell[2] + dz)
                if n in dist or not grid.in_bounds(*n) or grid.is_occupied(*n):
                    continue
                dist[n] = d + 1
                queue.append(n)
        maps.append(dist)
    return maps


def joint_optimal_cost(grid, agents, max_expansions=2_000_000):
    """Optimal sum of arrival costs by search over joint configurations.

    States carry an explicit finished flag per agent: an agent may declare
    itself finished only while standing on its goal, stops moving, keeps
    blocking its cell, and stops paying. Unfinished agents pay 1 per step,
    waits included, which realizes arrival-time costs exactly (goal waits
    before a later departure are charged). Returns None when unsolvable.
    """
    agents = sorted(agents, key=lambda a: a.id)
    n = len(agents)
    dist_maps = _goal_distance_maps(grid, agents)
    starts = tuple(a.start for a in agents)
    goals = tuple(a.goal for a in agents)
    if any(starts[i] not in dist_maps[i] for i in range(n)):
        return None
    move_sets = [MOVES[a.kind] for a in agents]

    def heuristic(cells, done):
        return sum(dist_maps[i][cells[i]] for i in range(n) if not done[i])

    start_state = (starts, tuple(False for _ in agents))
    h0 = heuristic(*start_state)
    tick = count()
    heap = [(h0, next(tick), 0, start_state)]
    best = {start_state: 0}
    expanded = 0
    while heap:
        f, _, g, state = heappop(heap)
        if best.get(state, -1) != g:
            continue
        cells, done = state
        if all(done):
            return g
        expanded += 1
        if expanded > max_expansions:
            raise RuntimeError("joint search exceeded its expansion cap")

        options = []
        for i in range(n):
            if done[i]:
                options.append(((cells[i], True, 0),))
                continue
            opts = []
            if cells[i] == goals[i]:
                opts.append((cells[i], True, 0))
            for dx, dy, dz in move_sets[i]:
                c = (cells[i][0] + dx, cells[i][1] + dy, cells[i][2] + dz)
                if grid.in_bounds(*c) and not grid.is_occupied(*c):
                    opts.append((c, False, 1))
            options.append(tuple(opts))

        for joint in product(*options):
            nxt = tuple(o[0] for o in joint)
            if len(set(nxt)) != n:
                continue
            if any(
                nxt[i] == cells[j] and nxt[j] == cells[i] and cells[i] != cells[j]
                for i in range(n)
                for j in range(i + 1, n)
            ):
                continue
            ndone = tuple(o[1] for o in joint)
            ng = g + sum(o[2] for o in joint)
            nstate = (nxt, ndone)
            if best.get(nstate, ng + 1) <= ng:
                continue
            best[nstate] = ng
            heappush(heap, (ng + heuristic(nxt, ndone), next(tick), ng, nstate))
    return None


def enumerate_best_constrained_cost(grid, kind, start, goal, constraints, max_len):
    """Cheapest constraint-respecting path by enumerating all move sequences.

    Costs follow the arrival rule (trailing goal waits free). Only usable on
    tiny instances; that is the point.
    """
    vertex = {(c.cells[0], c.time) for c in constraints if c.kind == VERTEX}
    edges = {(c.cells[0], c.cells[1], c.time) for c in constraints if c.kind != VERTEX}
    last_con = max((c.time for c in constraints), default=-1)
    if (start, 0) in vertex:
        return None
    best = None
    frontier = [(start,)]
    for _ in range(max_len + 1):
        nxt_frontier = []
        for path in frontier:
            t = len(path) - 1
            if path[-1] == goal:
                arrival = t
                while arrival > 0 and path[arrival - 1] == goal:
                    arrival -= 1
                # resting at the goal beyond the path end must stay legal
                rest_ok = all((goal, tau) not in vertex for tau in range(t + 1, last_con + 1))
                if rest_ok and (best is None or arrival < best):
                    best = arrival
            if t >= max_len:
                continue
            cell = path[-1]
            for dx, dy, dz in MOVES[kind]:
                c = (cell[0] + dx, cell[1] + dy, cell[2] + dz)
                if not grid.in_bounds(*c) or grid.is_occupied(*c):
                    continue
                if (c, t + 1) in vertex or (cell, c, t + 1) in edges:
                    continue
                nxt_frontier.append(path + (c,))
        frontier = nxt_frontier
    return best


# -- fixture builders ------------------------------------------------------


def pcd_ascii_bytes(points, extra_field=False, points_override=None, header_extras=()):
    n = points_override if points_override is not None else len(points)
    fields = "x y z" + (" intensity" if extra_field else "")
    size = "4 4 4" + (" 4" if extra_field else "")
    typ = "F F F" + (" F" if extra_field else "")
    cnt = "1 1 1" + (" 1" if extra_field else "")
    lines = [
        "# .PCD v0.7 - Point Cloud Data file format",
        "VERSION 0.7",
        f"FIELDS {fields}",
        f"SIZE {size}",
        f"TYPE {typ}",
        f"COUNT {cnt}",
        f"WIDTH {n}",
        "HEIGHT 1",
        "VIEWPOINT 0 0 0 1 0 0 0",
        f"POINTS {n}",
        *header_extras,
        "DATA ascii",
    ]
    for p in points:
        row = f"{p[0]} {p[1]} {p[2]}"
        if extra_field:
            row += " 0.25"
        lines.append(row)
    return ("\n".join(lines) + "\n").encode("ascii")


def pcd_binary_bytes(points, extra_field=False, truncate=0):
    n = len(points)
    fields = "x y z" + (" rgb" if extra_field else "")
    size = "4 4 4" + (" 4" if extra_field else "")
    typ = "F F F" + (" U" if extra_field else "")
    cnt = "1 1 1" + (" 1" if extra_field else "")
    header = (
        "VERSION 0.7\n"
        f"FIELDS {fields}\n"
        f"SIZE {size}\n"
        f"TYPE {typ}\n"
        f"COUNT {cnt}\n"
        f"WIDTH {n}\nHEIGHT 1\nPOINTS {n}\nDATA binary\n"
    ).encode("ascii")
    body = bytearray()
    for p in points:
        body += struct.pack("<fff", float(p[0]), float(p[1]), float(p[2]))
        if extra_field:
            body += struct.pack("<I", 0xFF00FF)
    if truncate:
        body = body[:-truncate]
    return header + bytes(body)


def pgm_p2_bytes(rows, maxval=255, comment=None):
    h = len(rows)
    w = len(rows[0])
    lines = ["P2"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"{w} {h}")
    lines.append(str(maxval))
    for row in rows:
        lines.append(" ".join(str(v) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def pgm_p5_bytes(rows, maxval=255, comment=None):
    h = len(rows)
    w = len(rows[0])
    head = "P5\n"
    if comment:
        head += f"# {comment}\n"
    head += f"{w} {h}\n{maxval}\n"
    body = bytes(v for row in rows for v in row)
    return head.encode("ascii") + body


# -- random instance helpers ------------------------------------------------


def random_grid(rng: random.Random, dims, density=0.2) -> OccupancyGrid3D:
    nx, ny, nz = dims
    cells = np.array([1 if rng.random() < density else 0 for _ in range(nx * ny * nz)], dtype=np.uint8)
    return OccupancyGrid3D((0.0, 0.0, 0.0), 1.0, dims, cells)


def free_cells(grid, kind=None):
    nx, ny, nz = grid.dims
    zs = (0,) if kind == AGV else range(nz)
    return [
        (i, j, k)
        for k in zs
        for j in range(ny)
        for i in range(nx)
        if not grid.is_occupied(i, j, k)
    ]


def random_instance(rng: random.Random, dims, n_agents, density=0.2, kinds=None):
    """Random grid plus a roster with free, distinct starts and goals."""
    while True:
        grid = random_grid(rng, dims, density)
        ground = free_cells(grid, AGV)
        anywhere = free_cells(grid)
        if len(anywhere) < 2 * n_agents + 2 or len(ground) < 2 * n_agents:
            continue
        agents = []
        used = set()
        ok = True
        for aid in range(n_agents):
            kind = kinds[aid] if kinds else rng.choice((UAV, AGV))
            pool = ground if kind == AGV else anywhere
            picks = [c for c in pool if c not in used]
            if len(picks) < 2:
                ok = False
                break
            start = picks[rng.randrange(len(picks))]
            goal_picks = [c for c in picks if c != start]
            goal = goal_picks[rng.randrange(len(goal_picks))]
            used.update((start, goal))
            agents.append(Agent(aid, kind, start, goal))
        if ok:
            return grid, tuple(agents)


def random_walk_paths(rng: random.Random, dims, n_agents, max_len):
    """Unconstrained random walks used to stress the conflict detector."""
    nx, ny, nz = dims
    paths = {}
    for aid in range(n_agents):
        kind = rng.choice((UAV, AGV))
        k0 = 0 if kind == AGV else rng.randrange(nz)
        cell = (rng.randrange(nx), rng.randrange(ny), k0)
        cells = [cell]
        for _ in range(rng.randrange(1, max_len + 1)):
            moves = MOVES[kind]
            dx, dy, dz = moves[rng.randrange(len(moves))]
            nxt = (cell[0] + dx, cell[1] + dy, cell[2] + dz)
            if 0 <= nxt[0] < nx and 0 <= nxt[1] < ny and 0 <= nxt[2] < nz:
                cell = nxt
            cells.append(cell)
        paths[aid] = tuple(cells)
    return paths
