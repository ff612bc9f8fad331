"""Scenario drivers behind the command line.

`run_scenario` solves a scenario with its policy and writes the partition
CSV and report JSON, `sweep_station_position` moves one station along a 1D
domain, `compare_policies` prices several policies under one objective and
`check_oracle` cross-checks the congestion solvers against brute force.
Outputs depend on the scenario alone, never on timing or thread count.
"""

import csv
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from otcells.congestion import ADDITIVE
from otcells.errors import (
    DomainError,
    EquilibriumError,
    OTCellsUserError,
    StationError,
    UnsupportedParameterError,
)
from otcells.oracle import (
    EXHAUSTIVE,
    MAX_EXHAUSTIVE_CELLS,
    MAX_EXHAUSTIVE_STATIONS,
    THRESHOLD_SCAN,
    brute_force_oracle,
)
from otcells.policies import (
    ALPHA_FAIR,
    PENALIZED,
    POLICIES,
    RATE_FAIR,
    ROUND_ROBIN,
    WARDROP,
    alpha_fair_solver,
    penalized_rate_fair_solver,
    rate_fair_solver,
    rate_fair_spec,
    round_robin_solver,
)
from otcells.scenario import resolve_path
from otcells.solvers import (
    SolverReport,
    intracell_costs,
    solve_additive,
    solve_multiplicative,
    total_cost,
)
from otcells.wardrop import (
    WORST,
    CongestionCostModel,
    ShareRateModel,
    find_equilibria,
    price_of_anarchy,
    select_equilibrium,
)

logger = logging.getLogger(__name__)

DEGENERATE = "degenerate"
NO_EQUILIBRIUM = "none"
OPTIMUM = "optimum"


@dataclass(frozen=True)
class RunRecord:
    """
    Attributes:
        scenario_hash (str): `Scenario.digest()` of the scenario run.
        report (dict): The report JSON, as written.
        partition_path (str)
        report_path (str)
        duration (float): Wall-clock seconds; never written to the report.
    """

    scenario_hash: str
    report: dict
    partition_path: str
    report_path: str
    duration: float

    @property
    def converged(self):
        return bool(self.report["converged"])


def equilibrium_model(scenario):
    """Selfish users minimize their own cost under the `[congestion]`
    objective when the scenario has one, and otherwise chase the best
    time-shared Shannon rate."""
    if scenario.congestion is not None:
        return CongestionCostModel(scenario.reference_spec(), scenario.stations)
    return ShareRateModel(scenario.params, scenario.stations, scenario.total_users)


def evaluation_report(kind, partition, density, spec):
    "A `SolverReport` for a partition that no iteration produced."
    costs = intracell_costs(partition, density, spec)
    return SolverReport(
        kind=kind,
        iterations=0,
        residual=0.0,
        converged=True,
        total_cost=float(np.sum(costs)),
        masses=tuple(float(m) for m in partition.masses),
        intracell_costs=tuple(float(c) for c in costs),
    )


def solve_policy(scenario, policy=None, density=None):
    """Partition and report of one of the centralized policies (by default
    the scenario's own).

    Returns:
        tuple[Partition, SolverReport]
    """
    policy = policy or scenario.policy
    density = density if density is not None else scenario.build_density()
    args = (scenario.domain, density, scenario.stations, scenario.params)
    if policy == ROUND_ROBIN:
        return round_robin_solver(*args, scenario.total_users, scenario.solver)
    if policy == RATE_FAIR:
        partition = rate_fair_solver(*args, scenario.total_users)
        spec = rate_fair_spec(scenario.stations, scenario.params)
        return partition, evaluation_report("voronoi", partition, density, spec)
    if policy == PENALIZED:
        return penalized_rate_fair_solver(*args, scenario.total_users, scenario.solver)
    if policy == ALPHA_FAIR:
        if scenario.alpha is None:
            raise UnsupportedParameterError("the alpha-fair policy needs network.alpha")
        return alpha_fair_solver(
            *args, scenario.alpha, scenario.total_users, scenario.solver
        )
    raise UnsupportedParameterError(f"{policy!r} is not a centralized policy")


def _equilibrium_entry(solution, cost):
    return dict(
        thresholds=None if solution.thresholds is None else list(solution.thresholds),
        masses=list(solution.masses),
        common_rate=solution.common_rate,
        residual=solution.residual,
        converged=solution.converged,
        iterations=solution.iterations,
        total_cost=cost,
    )


def _wardrop_report(scenario, density):
    spec = scenario.reference_spec()
    poa = price_of_anarchy(
        scenario.domain,
        density,
        scenario.stations,
        spec,
        equilibrium_model(scenario),
        scenario.solver,
        scenario.scan_resolution,
        scenario.total_users,
    )
    selected = poa.equilibrium

    def cost(solution):
        return total_cost(
            solution.partition, scenario.domain, density, scenario.stations, spec
        )

    report = dict(
        policy=WARDROP,
        iterations=selected.iterations,
        residual=selected.residual,
        converged=all(s.converged for s in poa.equilibria),
        total_cost=poa.equilibrium_cost,
        masses=list(selected.masses),
        intracell_costs=intracell_costs(selected.partition, density, spec).tolist(),
        equilibria=[_equilibrium_entry(s, cost(s)) for s in poa.equilibria],
        optimum=dict(
            total_cost=poa.optimum_cost,
            masses=[float(m) for m in poa.optimum.masses],
        ),
        price_of_anarchy=poa.ratio,
    )
    return selected.partition, report


def output_path(scenario, name, default_suffix, out_dir=None):
    """Where output `name` of `scenario` goes: the file set in its
    `[output]` section, else `<scenario name>-<name><suffix>`, relative to
    `out_dir` (default: the working directory)."""
    path = getattr(scenario.outputs, name) or f"{scenario.name}-{name}{default_suffix}"
    return resolve_path(path, out_dir or os.getcwd())


def _ensure_parent(path):
    "Create the directory `path` goes in, if needed, and return `path`."
    os.makedirs(os.path.dirname(path) or os.curdir, exist_ok=True)
    return path


def _write_json(data, path):
    with open(_ensure_parent(path), "w", encoding="utf-8") as f:
        f.write(json.dumps(data, indent=2) + "\n")


def run_scenario(scenario, out_dir=None):
    """Solve `scenario` with its policy, then write the partition CSV and
    the report JSON.

    Wardrop scenarios report every equilibrium found, the optimum under the
    scenario's reference objective and the price of anarchy; the partition
    written is the costliest equilibrium.

    Returns:
        RunRecord
    """
    start = time.perf_counter()
    density = scenario.build_density()
    try:
        if scenario.policy == WARDROP:
            partition, report = _wardrop_report(scenario, density)
        else:
            partition, solver_report = solve_policy(scenario, density=density)
            report = dict(policy=scenario.policy, **solver_report.to_dict())
    except OTCellsUserError as e:
        e.args = (f"scenario {scenario.name!r}: {e}", *e.args[1:])
        raise
    partition_path = output_path(scenario, "partition", ".csv", out_dir)
    report_path = output_path(scenario, "report", ".json", out_dir)
    partition.write_csv(_ensure_parent(partition_path))
    _write_json(report, report_path)
    duration = time.perf_counter() - start
    logger.info(
        "ran %s (%s) in %.3f s: converged=%s, cost %.6g",
        scenario.name,
        scenario.policy,
        duration,
        report["converged"],
        report["total_cost"],
    )
    return RunRecord(
        scenario_hash=scenario.digest(),
        report=report,
        partition_path=partition_path,
        report_path=report_path,
        duration=duration,
    )


class SweepResult(NamedTuple):
    rows: list
    path: str
    converged: bool


def _sweep_columns(scenario):
    k = len(scenario.stations)
    return (
        ["param_value"]
        + [f"threshold_{j}" for j in range(1, k)]
        + [f"mass_{s.index}" for s in scenario.stations]
        + ["common_rate", "total_cost", "classification", "converged"]
    )


def _sweep_row(scenario, station_index, x, criterion):
    moved = scenario.with_station_position(station_index, (x,))
    k = len(moved.stations)
    row = dict(param_value=x)
    nan_row = dict(
        row,
        **{f"threshold_{j}": np.nan for j in range(1, k)},
        **{f"mass_{s.index}": np.nan for s in moved.stations},
        common_rate=np.nan,
        total_cost=np.nan,
        converged=False,
    )
    positions = [s.position for s in moved.stations]
    if len(set(positions)) < len(positions):
        return dict(nan_row, classification=DEGENERATE)

    density = moved.build_density()
    spec = moved.reference_spec()
    if moved.policy == WARDROP:
        solutions = find_equilibria(
            moved.domain,
            density,
            moved.stations,
            equilibrium_model(moved),
            moved.scan_resolution,
            moved.solver,
            moved.total_users,
        )
        if not solutions:
            return dict(nan_row, classification=NO_EQUILIBRIUM)
        chosen = select_equilibrium(solutions, criterion)
        thresholds, masses = chosen.thresholds, chosen.masses
        common_rate, converged = chosen.common_rate, chosen.converged
        classification, partition = chosen.classification, chosen.partition
    else:
        partition, report = solve_policy(moved, density=density)
        try:
            thresholds = partition.thresholds()
        except DomainError:
            thresholds = [np.nan] * (k - 1)
        masses, common_rate = partition.masses, np.nan
        converged, classification = report.converged, OPTIMUM

    row.update({f"threshold_{j}": float(t) for j, t in enumerate(thresholds, 1)})
    row.update({f"mass_{s.index}": float(m) for s, m in zip(moved.stations, masses)})
    row.update(
        common_rate=float(common_rate),
        total_cost=total_cost(partition, moved.domain, density, moved.stations, spec),
        classification=classification,
        converged=bool(converged),
    )
    return row


def sweep_station_position(
    scenario, station_index, start, stop, steps, jobs=1, out_dir=None, criterion=WORST
):
    """Move station `station_index` over `steps` evenly spaced positions
    from `start` to `stop` on a 1D scenario, recording the cell thresholds,
    masses and cost at each (the selected equilibrium for wardrop
    scenarios, the policy's optimum otherwise).

    Positions where the moving station lands on another one give a row of
    NaNs classified `"degenerate"`. Rows are computed on `jobs` threads and
    written in position order.

    Returns:
        SweepResult: `converged` is false if any non-degenerate row failed
        to converge.
    """
    if scenario.domain.ndim != 1:
        raise DomainError("station sweeps need a 1D scenario")
    if steps < 1:
        raise UnsupportedParameterError(f"steps must be at least 1, got {steps}")
    if station_index not in [s.index for s in scenario.stations]:
        raise StationError(f"no station {station_index} in scenario {scenario.name!r}")
    for x in (start, stop):
        if not scenario.domain.contains((x,)):
            raise StationError(f"sweep position {x} lies outside the domain")

    xs = [float(x) for x in np.linspace(start, stop, int(steps))]
    with ThreadPoolExecutor(max_workers=max(1, int(jobs))) as pool:
        rows = list(
            pool.map(lambda x: _sweep_row(scenario, station_index, x, criterion), xs)
        )

    path = output_path(scenario, "sweep", ".csv", out_dir)
    with open(_ensure_parent(path), "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=_sweep_columns(scenario))
        writer.writeheader()
        writer.writerows(rows)
    converged = all(r["converged"] for r in rows if r["classification"] != DEGENERATE)
    logger.info(
        "swept station %d over %d positions: converged=%s", station_index, steps, converged
    )
    return SweepResult(rows, path, converged)


def compare_policies(scenario, policies, out_dir=None):
    """Cost of each policy's partition under the scenario's reference
    objective, with the cost ratio of every pair.

    The wardrop entry is the costliest equilibrium found.

    Returns:
        dict: The comparison JSON, as written.
    """
    policies = list(dict.fromkeys(policies))
    if len(policies) < 2:
        raise UnsupportedParameterError("comparing needs at least two policies")
    for p in policies:
        if p not in POLICIES:
            raise UnsupportedParameterError(
                f"unknown policy {p!r} (expected one of: {', '.join(POLICIES)})"
            )
    density = scenario.build_density()
    spec = scenario.reference_spec()

    def cost(partition):
        return total_cost(partition, scenario.domain, density, scenario.stations, spec)

    entries = {}
    for p in policies:
        if p == WARDROP:
            solutions = find_equilibria(
                scenario.domain,
                density,
                scenario.stations,
                equilibrium_model(scenario),
                scenario.scan_resolution,
                scenario.solver,
                scenario.total_users,
            )
            if not solutions:
                raise EquilibriumError(f"scenario {scenario.name!r}: no equilibrium found")
            costs = [cost(s.partition) for s in solutions]
            worst = int(np.argmax(costs))
            partition, converged = solutions[worst].partition, solutions[worst].converged
        else:
            partition, report = solve_policy(scenario, p, density)
            converged = report.converged
        entries[p] = dict(
            total_cost=cost(partition),
            masses=[float(m) for m in partition.masses],
            converged=bool(converged),
        )

    ratios = {
        f"{a}/{b}": entries[a]["total_cost"] / entries[b]["total_cost"]
        if entries[b]["total_cost"] != 0
        else None
        for a, b in combinations(policies, 2)
    }
    comparison = dict(
        scenario=scenario.name,
        objective=spec.kind,
        policies=entries,
        ratios=ratios,
        converged=all(e["converged"] for e in entries.values()),
    )
    _write_json(comparison, output_path(scenario, "comparison", ".json", out_dir))
    return comparison


class OracleCheck(NamedTuple):
    mode: str
    solver_cost: float
    oracle_cost: float
    gap: float
    agrees: bool
    converged: bool


def check_oracle(scenario, rtol=None):
    """Compare the congestion solver's optimum of the scenario's reference
    objective with the brute-force oracle's.

    Instances with at most 16 cells and 3 stations are enumerated
    exhaustively (default tolerance 1e-9 relative); larger 1D instances use
    the threshold scan (1e-6).
    """
    density = scenario.build_density()
    spec = scenario.reference_spec()
    k = len(scenario.stations)
    exhaustive = (
        scenario.domain.n_cells <= MAX_EXHAUSTIVE_CELLS and k <= MAX_EXHAUSTIVE_STATIONS
    )
    mode = EXHAUSTIVE if exhaustive else THRESHOLD_SCAN
    if rtol is None:
        rtol = 1e-9 if exhaustive else 1e-6
    solve = solve_additive if spec.kind == ADDITIVE else solve_multiplicative
    _, report = solve(
        scenario.domain,
        density,
        scenario.stations,
        spec,
        scenario.solver,
        scenario.total_users,
    )
    _, oracle_cost = brute_force_oracle(
        scenario.domain,
        density,
        scenario.stations,
        spec,
        mode=mode,
        total_users=scenario.total_users,
    )
    gap = (report.total_cost - oracle_cost) / max(abs(oracle_cost), np.finfo(float).tiny)
    return OracleCheck(
        mode=mode,
        solver_cost=report.total_cost,
        oracle_cost=oracle_cost,
        gap=gap,
        agrees=gap <= rtol,
        converged=report.converged,
    )
