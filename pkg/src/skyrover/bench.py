"""Benchmark harness: run (scenario, algorithm) cells and emit a report.

Success rates are recomputed from the executed runs through the solution
validator and the tick logs; solver self-reports are never trusted. Absolute
computation times are hardware-bound and therefore reported, not asserted.
"""

from __future__ import annotations

import json
import os
import platform
import statistics
from dataclasses import dataclass, replace

from .errors import NoSolutionError, ParseError, ResourceLimitError, ScenarioError
from .scenario import load_scenario
from .sim import Simulator, collect_metrics
from .solvers import SolverConfig, normalize_algorithm

CSV_HEADER = "scenario,algorithm,seed,agents,comp_time_s,success_rate,makespan,sum_of_costs"


@dataclass(frozen=True)
class BenchRow:
    scenario: str
    algorithm: str
    seed: int
    agents: int
    comp_time_s: float
    success_rate: float
    makespan: int
    sum_of_costs: int


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple
    seed: int
    environment: str


def environment_note() -> str:
    return f"{platform.platform()} / Python {platform.python_version()}"


def load_suite(path) -> list[str]:
    """Suite file: {"scenarios": [paths...]}, paths relative to the suite file."""
    with open(path, "rb") as fh:
        try:
            payload = json.loads(fh.read())
        except json.JSONDecodeError as exc:
            raise ParseError(f"suite is not valid JSON: {exc}") from None
    if not isinstance(payload, dict) or set(payload) != {"scenarios"}:
        raise ParseError("suite must be an object with exactly the key 'scenarios'")
    paths = payload["scenarios"]
    if not isinstance(paths, list) or not paths:
        raise ParseError("suite lists no scenarios")
    base = os.path.dirname(os.path.abspath(path))
    return [p if os.path.isabs(p) else os.path.join(base, p) for p in paths]


def run_cell(scenario_path, algorithm: str, repeats: int = 1, seed: int | None = None) -> BenchRow:
    """One (scenario, algorithm) measurement; times are the median of repeats."""
    algorithm = normalize_algorithm(algorithm)
    scenario = load_scenario(scenario_path)
    base = scenario.solver or SolverConfig()
    row_seed = scenario.seed if seed is None else seed
    config = replace(base, algorithm=algorithm, rng_seed=row_seed)
    name = os.path.splitext(os.path.basename(str(scenario_path)))[0]

    times = []
    metrics = None
    for _ in range(max(1, repeats)):
        sim = Simulator()
        try:
            sim.init(scenario, config=config)
        except (NoSolutionError, ResourceLimitError):
            return BenchRow(name, algorithm, row_seed, len(scenario.agents), 0.0, 0.0, -1, -1)
        record = sim.run()
        times.append(record.computation_time)
        if metrics is None:
            metrics = collect_metrics(record)
    return BenchRow(
        scenario=name,
        algorithm=algorithm,
        seed=row_seed,
        agents=len(scenario.agents),
        comp_time_s=statistics.median(times),
        success_rate=metrics.success_rate,
        makespan=metrics.makespan,
        sum_of_costs=metrics.sum_of_costs,
    )


def run_suite(scenario_paths, algorithms, repeats: int = 1, seed: int | None = None) -> BenchmarkReport:
    if not scenario_paths:
        raise ScenarioError("benchmark suite is empty")
    rows = [
        run_cell(path, alg, repeats=repeats, seed=seed)
        for path in scenario_paths
        for alg in algorithms
    ]
    rows.sort(key=lambda r: (r.scenario, r.algorithm))
    return BenchmarkReport(rows=tuple(rows), seed=seed if seed is not None else 0, environment=environment_note())


def report_to_bytes(report: BenchmarkReport) -> bytes:
    lines = [
        f"# environment: {report.environment}",
        f"# seed: {report.seed}",
        CSV_HEADER,
    ]
    for r in report.rows:
        lines.append(
            f"{r.scenario},{r.algorithm},{r.seed},{r.agents},"
            f"{r.comp_time_s:.4f},{r.success_rate:.4f},{r.makespan},{r.sum_of_costs}"
        )
    return ("\n".join(lines) + "\n").encode("ascii")


def report_from_bytes(data: bytes) -> BenchmarkReport:
    lines = data.decode("ascii").splitlines()
    environment = ""
    seed = 0
    rows = []
    saw_header = False
    for line in lines:
        if line.startswith("# environment: "):
            environment = line[len("# environment: ") :]
        elif line.startswith("# seed: "):
            seed = int(line[len("# seed: ") :])
        elif line == CSV_HEADER:
            saw_header = True
        elif line.strip():
            parts = line.split(",")
            if len(parts) != 8:
                raise ParseError(f"report row has {len(parts)} columns, expected 8")
            rows.append(
                BenchRow(
                    scenario=parts[0],
                    algorithm=parts[1],
                    seed=int(parts[2]),
                    agents=int(parts[3]),
                    comp_time_s=float(parts[4]),
                    success_rate=float(parts[5]),
                    makespan=int(parts[6]),
                    sum_of_costs=int(parts[7]),
                )
            )
    if not saw_header:
        raise ParseError(f"report is missing the header line {CSV_HEADER!r}")
    return BenchmarkReport(rows=tuple(rows), seed=seed, environment=environment)


def format_table(report: BenchmarkReport) -> str:
    headers = ("scenario", "algorithm", "comp time (s)", "success rate (%)", "makespan", "sum of costs")
    body = [
        (
            r.scenario,
            r.algorithm,
            f"{r.comp_time_s:.2f}",
            f"{100.0 * r.success_rate:.1f}",
            str(r.makespan),
            str(r.sum_of_costs),
        )
        for r in report.rows
    ]
    widths = [max(len(h), *(len(row[c]) for row in body)) if body else len(h) for c, h in enumerate(headers)]
    def fmt(row):
        return "  ".join(v.ljust(widths[c]) for c, v in enumerate(row)).rstrip()
    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in body)
    lines.append(f"(seed {report.seed}; {report.environment})")
    return "\n".join(lines)
