"""Command-line entry point: grid generation, solving, simulation, tasks, bench.

Exit codes: 0 ok, 2 input error, 3 capacity or placement failure,
4 no solution, 5 resource limit. Log verbosity comes from SKYROVER_LOG
(debug/info/warning/error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import bench as bench_mod
from .errors import (
    CapacityError,
    NoSolutionError,
    ParseError,
    PlacementError,
    ResourceLimitError,
    ScenarioError,
    SkyroverError,
    TaskError,
)
from .mapf import validate_solution
from .pcd import parse_pcd
from .pgm import parse_pgm
from .scenario import Scenario, load_scenario, save_scenario
from .sim import (
    Simulator,
    collect_metrics,
    execute_plan,
    plan_to_bytes,
    read_plan,
    waypoints_to_bytes,
)
from .solvers import NO_SOLUTION, RESOURCE_LIMIT, SolverConfig, normalize_algorithm, solve
from .tasks import run_task
from .voxelgrid import extrude_ground, rasterize, read_grid, write_grid
from .warehouse import generate_warehouse

log = logging.getLogger("skyrover")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPACITY = 3
EXIT_NO_SOLUTION = 4
EXIT_LIMIT = 5


def _configure_logging() -> None:
    level = os.environ.get("SKYROVER_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _solver_config(args, scenario: Scenario | None = None) -> SolverConfig:
    base = scenario.solver if scenario is not None and scenario.solver else SolverConfig()
    return SolverConfig(
        algorithm=normalize_algorithm(args.alg) if args.alg else base.algorithm,
        node_expansion_limit=args.expansion_limit or base.node_expansion_limit,
        time_limit=args.time_limit or base.time_limit,
        rng_seed=args.seed if args.seed is not None else base.rng_seed,
        online_policy=getattr(args, "policy", None) or base.online_policy,
    )


def _load_grid_for(args, scenario: Scenario):
    if getattr(args, "grid", None):
        return read_grid(args.grid)
    return scenario.materialize_grid()


def cmd_gridgen(args) -> int:
    if bool(args.pcd) == bool(args.pgm):
        print("error: pass exactly one of --pcd or --pgm", file=sys.stderr)
        return EXIT_INPUT
    if args.pcd:
        with open(args.pcd, "rb") as fh:
            cloud = parse_pcd(fh.read())
        if cloud.dropped:
            log.info("dropped %d non-finite points", cloud.dropped)
        grid = rasterize(cloud, resolution=args.resolution, padding=args.padding)
    else:
        with open(args.pgm, "rb") as fh:
            ground = parse_pgm(fh.read(), resolution=args.resolution, occupied_threshold=args.threshold)
        grid = extrude_ground(ground, nz=args.extrude, walls=args.walls)
    write_grid(grid, args.output)
    nx, ny, nz = grid.dims
    print(f"wrote {args.output}: {nx}x{ny}x{nz} cells, {grid.occupied_count} occupied")
    return EXIT_OK


def cmd_gen_warehouse(args) -> int:
    dims = tuple(args.dims)
    grid, agents = generate_warehouse(dims=dims, shelf_rows=args.shelf_rows, roster=args.agents, seed=args.seed)
    grid_path = args.output + ".grid"
    scenario_path = args.output + ".json"
    write_grid(grid, grid_path)
    scenario = Scenario(grid=os.path.basename(grid_path), agents=agents, seed=args.seed)
    save_scenario(scenario, scenario_path)
    print(f"wrote {grid_path} and {scenario_path}: {len(agents)} agents in {dims[0]}x{dims[1]}x{dims[2]}")
    return EXIT_OK


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    grid = _load_grid_for(args, scenario)
    config = _solver_config(args, scenario)
    t0 = time.perf_counter()
    result = solve(grid, scenario.agents, config)
    comp_time = time.perf_counter() - t0
    if result.status == NO_SOLUTION:
        print(f"no solution: {result.reason}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    if result.status == RESOURCE_LIMIT:
        print(f"resource limit: {result.reason}", file=sys.stderr)
        return EXIT_LIMIT
    solution = result.solution
    violations = validate_solution(grid, scenario.agents, solution.paths)
    success_rate = 1.0 if not violations else 0.0
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(plan_to_bytes(solution, scenario.agents, comp_time))
    print(
        f"solved alg={config.algorithm} agents={len(scenario.agents)} "
        f"sum_of_costs={solution.sum_of_costs} makespan={solution.makespan} "
        f"comp_time_s={comp_time:.3f} success_rate={success_rate * 100:.0f}%"
    )
    return EXIT_OK


def cmd_sim(args) -> int:
    scenario = load_scenario(args.scenario)
    grid = _load_grid_for(args, scenario)
    if bool(args.plan) == bool(args.online):
        print("error: pass exactly one of --plan or --online", file=sys.stderr)
        return EXIT_INPUT
    sim = Simulator()
    if args.plan:
        plan = read_plan(args.plan)
        config = _solver_config(args, scenario)
        sim._init_core(grid, scenario.agents, config, solution=plan.solution)
        comp_time = plan.computation_time_s
    else:
        config = SolverConfig(algorithm="online", online_policy=args.online, rng_seed=args.seed or scenario.seed)
        sim._init_core(grid, scenario.agents, config)
        comp_time = sim.computation_time
    record = sim.run(max_ticks=args.max_ticks)
    metrics = collect_metrics(record)

    if args.ticks:
        with open(args.ticks, "w", encoding="ascii") as fh:
            for s in record.states:
                fh.write(
                    json.dumps(
                        {"tick": s.tick, "cells": {str(a): list(c) for a, c in sorted(s.cells.items())}},
                        sort_keys=True,
                    )
                    + "\n"
                )
    if args.waypoints:
        from .mapf import make_solution

        paths = {a.id: tuple(s.cells[a.id] for s in record.states) for a in record.agents}
        commands = execute_plan(make_solution(paths), args.cell_duration, grid.resolution, grid.origin)
        with open(args.waypoints, "wb") as fh:
            fh.write(waypoints_to_bytes(commands))
    print(
        f"simulated {record.states[-1].tick} ticks mode={record.mode} "
        f"success_rate={metrics.success_rate * 100:.1f}% makespan={metrics.makespan} "
        f"sum_of_costs={metrics.sum_of_costs} comp_time_s={comp_time:.3f}"
    )
    return EXIT_OK


def cmd_task(args) -> int:
    scenario = load_scenario(args.scenario)
    if scenario.task is None:
        print("error: scenario has no task block", file=sys.stderr)
        return EXIT_INPUT
    grid = _load_grid_for(args, scenario)
    config = _solver_config(args, scenario)
    report = run_task(grid, scenario.agents, scenario.task, config)
    for n, m in enumerate(report.episodes, start=1):
        print(
            f"episode {n}: success_rate={m.success_rate * 100:.1f}% makespan={m.makespan} "
            f"sum_of_costs={m.sum_of_costs} comp_time_s={m.computation_time:.3f}"
        )
    print(f"rendezvous_ok={report.rendezvous_ok} overall_success={report.success}")
    if report.success:
        return EXIT_OK
    if "resource" in report.reason:
        print(report.reason, file=sys.stderr)
        return EXIT_LIMIT
    print(report.reason or "task failed", file=sys.stderr)
    return EXIT_NO_SOLUTION


def cmd_bench(args) -> int:
    paths = bench_mod.load_suite(args.suite)
    algorithms = [normalize_algorithm(a) for a in args.algs.split(",") if a]
    if not algorithms:
        print("error: --algs lists no algorithms", file=sys.stderr)
        return EXIT_INPUT
    report = bench_mod.run_suite(paths, algorithms, repeats=args.repeats, seed=args.seed)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(bench_mod.report_to_bytes(report))
    print(bench_mod.format_table(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skyrover", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gridgen", help="rasterize a PCD or extrude a PGM into a SKYGRID1 file")
    p.add_argument("--pcd", help="point cloud input")
    p.add_argument("--pgm", help="2D map input")
    p.add_argument("--extrude", type=int, default=1, metavar="NZ", help="layers for PGM extrusion")
    p.add_argument("--walls", action="store_true", help="replicate PGM obstacles through all layers")
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--padding", type=int, default=1, help="cells added around the cloud bounding box")
    p.add_argument("--threshold", type=int, default=128, help="PGM values below this are obstacles")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gridgen)

    p = sub.add_parser("gen-warehouse", help="procedurally generate a warehouse grid + scenario")
    p.add_argument("--dims", type=int, nargs=3, default=[80, 60, 10], metavar=("NX", "NY", "NZ"))
    p.add_argument("--shelf-rows", type=int, default=6)
    p.add_argument("--agents", default="6uav+16agv", help="roster such as 6uav+16agv")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("-o", "--output", required=True, help="path prefix for the .grid and .json files")
    p.set_defaults(func=cmd_gen_warehouse)

    def _solver_flags(p):
        p.add_argument("--alg", help="astar | cbs | online")
        p.add_argument("--time-limit", type=float, default=None, dest="time_limit")
        p.add_argument("--expansion-limit", type=int, default=None, dest="expansion_limit")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("solve", help="plan a scenario and write the plan file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid", help="override the scenario's grid reference")
    _solver_flags(p)
    p.add_argument("-o", "--output", help="plan JSON path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sim", help="replay a plan or run an online policy")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid", help="override the scenario's grid reference")
    p.add_argument("--plan", help="plan JSON to replay")
    p.add_argument("--online", help="online policy name, e.g. greedy-shielded")
    p.add_argument("--cell-duration", type=float, default=1.0, dest="cell_duration")
    p.add_argument("--max-ticks", type=int, default=None, dest="max_ticks")
    p.add_argument("--waypoints", help="waypoint CSV output path")
    p.add_argument("--ticks", help="tick log output path (JSON lines)")
    _solver_flags(p)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("task", help="run the scenario's task pipeline")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid", help="override the scenario's grid reference")
    _solver_flags(p)
    p.set_defaults(func=cmd_task)

    p = sub.add_parser("bench", help="run a suite of scenarios across algorithms")
    p.add_argument("--suite", required=True, help="JSON file {\"scenarios\": [paths]}")
    p.add_argument("--algs", default="astar,cbs,online")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", help="report CSV path")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParseError, ScenarioError, TaskError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapacityError, PlacementError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NoSolutionError as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except SkyroverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
