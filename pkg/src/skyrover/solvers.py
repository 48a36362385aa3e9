"""Solver configuration, result types, and the algorithm dispatch."""

from __future__ import annotations

from dataclasses import dataclass, field

ASTAR_PRIORITIZED = "astar_prioritized"
CBS = "cbs"
ONLINE = "online"
ALGORITHMS = (ASTAR_PRIORITIZED, CBS, ONLINE)

_ALIASES = {
    "astar": ASTAR_PRIORITIZED,
    "prioritized": ASTAR_PRIORITIZED,
}

SOLVED = "solved"
NO_SOLUTION = "no_solution"
RESOURCE_LIMIT = "resource_limit"


def normalize_algorithm(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; pick one of astar, cbs, online")
    return name


@dataclass(frozen=True)
class SolverConfig:
    algorithm: str = CBS
    node_expansion_limit: int = 5_000_000
    time_limit: float = 300.0
    rng_seed: int = 0
    online_policy: str = "greedy-shielded"

    def __post_init__(self):
        object.__setattr__(self, "algorithm", normalize_algorithm(self.algorithm))
        if self.node_expansion_limit <= 0:
            raise ValueError("node_expansion_limit must be positive")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass(frozen=True)
class SolveStats:
    ll_expansions: int = 0
    ct_expanded: int = 0
    wall_time: float = 0.0
    best_cost: int | None = None


@dataclass(frozen=True)
class SolveResult:
    status: str
    solution: object = None  # Solution when status == SOLVED
    reason: str = ""
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def ok(self) -> bool:
        return self.status == SOLVED


def solve(grid, agents, config: SolverConfig) -> SolveResult:
    """Run the configured precomputing solver. Online mode has no plan phase."""
    from .cbs import cbs_solve
    from .prioritized import prioritized_solve

    if config.algorithm == CBS:
        return cbs_solve(grid, agents, config)
    if config.algorithm == ASTAR_PRIORITIZED:
        return prioritized_solve(grid, agents, config)
    raise ValueError("online policies plan per step; there is nothing to precompute")
