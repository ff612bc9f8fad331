"""Optimal cell partitions for congestion-augmented transport costs.

`solve_additive` and `solve_multiplicative` share one damped fixed point on
the vector of cell masses. Given masses `N`, every quadrature cell is sent
to the station minimizing the first-order rule of the objective
(`CongestionSpec.rule_offsets`); the masses of that assignment are blended
into `N` with a damping factor that is halved whenever some station's mass
update reverses direction. Iteration stops once no mass moves by more than
`SolverConfig.tol`.

The fixed point is followed by a discrete polish: single-cell moves that
lower the exact (discretized) objective are applied until none is left,
and on small grids so are exchanges of two cells between two stations.
The returned partition is a local optimum of the gridded problem and not
just of its first-order conditions. When a brute-force search of
`otcells.oracle` is cheap enough for the instance, its partition is
polished too and kept if it beats the fixed point.

A solve counts as converged when the mass iteration settled and the
settled masses agree with the masses of the partition it produced to
within a few layers of cells.
"""

import itertools
import json
import logging
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from otcells.errors import (
    ConvergenceWarning,
    DomainError,
    PowerOverflowError,
    UnsupportedParameterError,
)
from otcells.radio import DEFAULT_TOTAL_USERS, check_stations, station_distances

logger = logging.getLogger(__name__)

# Moves improving the objective by less than this fraction of it are ignored
# by the polish; rounding in the move deltas stays well below it.
POLISH_REL_TOL = 1e-12
# Pair exchanges are only tried on grids of at most this many cells.
SWAP_POLISH_CELLS = 512
# Allowed gap between settled and realized masses, in layers of cells.
CONVERGED_LAYERS = 4

FIXED_POINT = "fixed-point"


@dataclass(frozen=True, eq=False)
class Partition:
    """An assignment of every quadrature cell to a station.

    Attributes:
        domain (Domain): The grid being partitioned.
        stations (tuple[Station, ...]): Stations in tie-break order.
        assignment (numpy.ndarray): Position in `stations` of each cell's station.
        masses (numpy.ndarray): Proportion of users in each station's cell.
        total_users (float): User count the masses are scaled by.
    """

    domain: object
    stations: tuple
    assignment: np.ndarray
    masses: np.ndarray
    total_users: float = DEFAULT_TOTAL_USERS

    @classmethod
    def from_assignment(cls, density, stations, assignment, total_users=DEFAULT_TOTAL_USERS):
        stations = tuple(stations)
        assignment = np.array(assignment, dtype=np.intp).ravel()
        if assignment.shape != (density.domain.n_cells,):
            raise DomainError(
                f"expected {density.domain.n_cells} cell assignments, got {assignment.size}"
            )
        if assignment.size and (assignment.min() < 0 or assignment.max() >= len(stations)):
            raise DomainError("assignment refers to a station that doesn't exist")
        masses = np.bincount(
            assignment, weights=density.cell_masses, minlength=len(stations)
        )
        assignment.setflags(write=False)
        masses.setflags(write=False)
        return cls(density.domain, stations, assignment, masses, total_users)

    @property
    def n_stations(self):
        return len(self.stations)

    @property
    def user_counts(self):
        return self.masses * self.total_users

    @property
    def station_indices(self):
        "Station id (`Station.index`) of each cell."
        return np.array([s.index for s in self.stations])[self.assignment]

    def cells_of(self, k):
        return np.flatnonzero(self.assignment == k)

    def cell_areas(self):
        "Measure (km or km²) of each station's cell."
        return (
            np.bincount(self.assignment, minlength=self.n_stations)
            * self.domain.cell_measure
        )

    def same_cells(self, other):
        return np.array_equal(self.assignment, other.assignment)

    def thresholds(self):
        """Cell boundaries of a 1D partition whose cells are intervals in
        station-position order. Empty cells give repeated thresholds."""
        if self.domain.ndim != 1:
            raise DomainError("thresholds are only defined on 1D domains")
        order = np.argsort([s.position[0] for s in self.stations], kind="stable")
        rank = np.empty(self.n_stations, dtype=np.intp)
        rank[order] = np.arange(self.n_stations)
        ranked = rank[self.assignment]
        if np.any(np.diff(ranked) < 0):
            raise DomainError("partition cells are not intervals in station order")
        counts = np.bincount(ranked, minlength=self.n_stations)
        return self.domain.edges(0)[np.cumsum(counts)[:-1]]

    def write_csv(self, path):
        "Write `cell_index,x[,y],station_index` rows in cell order."
        ndim = self.domain.ndim
        names = ["cell_index"] + ["x", "y"][:ndim] + ["station_index"]
        table = np.column_stack(
            (np.arange(self.domain.n_cells),)
            + self.domain.coordinates
            + (self.station_indices,)
        )
        np.savetxt(
            path,
            table,
            delimiter=",",
            header=",".join(names),
            comments="",
            fmt=["%d"] + ["%.17g"] * ndim + ["%d"],
        )


@dataclass(frozen=True)
class SolverConfig:
    """
    Attributes:
        tol (float): Stop once no mass changes by more than this.
        damping (float): Initial blending factor γ ∈ (0, 1].
        max_iter (int): Fixed-point iteration cap; also caps polish moves.
        tie_break (str): Only `"lowest-index"` is supported.
        polish (bool): Run the discrete polish after the fixed point.
        brute_force_limit (int): Also try every oracle search enumerating at
            most this many partitions; 0 turns the searches off.
    """

    tol: float = 1e-8
    damping: float = 0.5
    max_iter: int = 10_000
    tie_break: str = "lowest-index"
    polish: bool = True
    brute_force_limit: int = 5_000_000

    def __post_init__(self):
        if not self.tol > 0:
            raise UnsupportedParameterError(f"tol must be positive, got {self.tol}")
        if not 0 < self.damping <= 1:
            raise UnsupportedParameterError(
                f"damping must lie in (0, 1], got {self.damping}"
            )
        if not self.max_iter >= 1:
            raise UnsupportedParameterError(
                f"max_iter must be at least 1, got {self.max_iter}"
            )
        if self.tie_break != "lowest-index":
            raise UnsupportedParameterError(
                f"unsupported tie-break rule {self.tie_break!r}"
            )
        if not self.brute_force_limit >= 0:
            raise UnsupportedParameterError(
                f"brute_force_limit must be nonnegative, got {self.brute_force_limit}"
            )


class Iterate(NamedTuple):
    iteration: int
    residual: float
    damping: float
    mass_sum: float


@dataclass(frozen=True, eq=False)
class SolverReport:
    """Outcome of one solve.

    `masses` and `intracell_costs` describe the returned partition; `residual`
    is the last fixed-point mass change and `trace` holds one `Iterate` per
    iteration. `gap` is the largest difference between the settled masses
    and those of the partition they produced, and `source` names where the
    returned partition came from: the fixed point or an oracle search.
    """

    kind: str
    iterations: int
    residual: float
    converged: bool
    total_cost: float
    masses: tuple
    intracell_costs: tuple
    polish_moves: int = 0
    total_power: float = None
    trace: tuple = ()
    gap: float = 0.0
    source: str = FIXED_POINT

    def to_dict(self):
        out = dict(
            iterations=self.iterations,
            residual=self.residual,
            converged=self.converged,
            total_cost=self.total_cost,
            masses=list(self.masses),
            intracell_costs=list(self.intracell_costs),
        )
        if self.total_power is not None:
            out["total_power"] = self.total_power
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json() + "\n")


def voronoi_partition(domain, density, stations, total_users=DEFAULT_TOTAL_USERS):
    "Nearest-station partition, ties going to the earliest station."
    stations = check_stations(stations, domain)
    _check_density(domain, density)
    assignment = np.argmin(station_distances(domain, stations), axis=0)
    return Partition.from_assignment(density, stations, assignment, total_users)


def _check_density(domain, density):
    if density.domain != domain:
        raise DomainError("density is defined on a different domain")


def _prepare(domain, density, stations, spec):
    stations = check_stations(stations, domain)
    _check_density(domain, density)
    if spec.n_stations != len(stations):
        raise UnsupportedParameterError(
            f"{len(stations)} stations but {spec.n_stations} congestion terms"
        )
    distances = station_distances(domain, stations)
    base = spec.base_matrix(distances)
    if not np.all(np.isfinite(base)):
        raise DomainError("base cost is not finite on every cell center")
    return stations, distances, base


def _sums(base, assignment, cell_masses, n_stations):
    "Per-station masses Nₖ and transport integrals Sₖ = ∫_{Cₖ} F(dₖ)λ."
    own = base[assignment, np.arange(assignment.size)]
    masses = np.bincount(assignment, weights=cell_masses, minlength=n_stations)
    integrals = np.bincount(
        assignment, weights=own * cell_masses, minlength=n_stations
    )
    return masses, integrals


def _station_costs(spec, masses, integrals):
    return np.array(
        [
            float(spec.station_cost(k, masses[k], integrals[k]))
            for k in range(spec.n_stations)
        ]
    )


def _rule_scores(spec, base, masses, integrals):
    scale, offset = spec.rule_offsets(masses, integrals)
    with np.errstate(invalid="ignore"):
        scores = scale[:, None] * base + offset[:, None]
    return np.where(np.isnan(scores), np.inf, scores)


def _best_response(spec, base, masses, integrals):
    # `argmin` returns the first minimum, which is the tie-break rule.
    return np.argmin(_rule_scores(spec, base, masses, integrals), axis=0)


def _move_deltas(spec, base, assignment, cell_masses, masses, integrals):
    """Exact objective change of moving each cell to each station, as a
    `(K, n_cells)` array. Staying put is `+inf`."""
    n_stations, n_cells = base.shape
    cells = np.arange(n_cells)
    current = _station_costs(spec, masses, integrals)

    leave = np.empty(n_cells)
    for k in range(n_stations):
        mine = assignment == k
        w = cell_masses[mine]
        leave[mine] = (
            spec.station_cost(k, masses[k] - w, integrals[k] - base[k, mine] * w)
            - current[k]
        )

    deltas = np.empty((n_stations, n_cells))
    for k in range(n_stations):
        deltas[k] = (
            spec.station_cost(
                k, masses[k] + cell_masses, integrals[k] + base[k] * cell_masses
            )
            - current[k]
            + leave
        )
    deltas[assignment, cells] = np.inf
    return np.where(np.isnan(deltas), np.inf, deltas)


def _objective(spec, base, assignment, cell_masses):
    masses, integrals = _sums(base, assignment, cell_masses, base.shape[0])
    return float(np.sum(_station_costs(spec, masses, integrals)))


def _improvement_threshold(objective):
    return POLISH_REL_TOL * max(abs(objective), np.finfo(float).tiny)


def _single_moves(spec, base, assignment, cell_masses, max_moves):
    """Apply improving single-cell moves to `assignment` in place until none
    is left. Returns the number of moves made."""
    n_stations = base.shape[0]
    moves = 0
    while moves < max_moves:
        masses, integrals = _sums(base, assignment, cell_masses, n_stations)
        threshold = _improvement_threshold(
            float(np.sum(_station_costs(spec, masses, integrals)))
        )

        deltas = _move_deltas(spec, base, assignment, cell_masses, masses, integrals)
        best = np.min(deltas, axis=0)
        candidates = np.flatnonzero(best < -threshold)
        if not candidates.size:
            break
        candidates = candidates[np.argsort(best[candidates], kind="stable")]

        for c in candidates:
            i = assignment[c]
            w = cell_masses[c]
            delta = np.full(n_stations, np.inf)
            leave = float(
                spec.station_cost(i, masses[i] - w, integrals[i] - base[i, c] * w)
            ) - float(spec.station_cost(i, masses[i], integrals[i]))
            for k in range(n_stations):
                if k != i:
                    delta[k] = (
                        float(
                            spec.station_cost(
                                k, masses[k] + w, integrals[k] + base[k, c] * w
                            )
                        )
                        - float(spec.station_cost(k, masses[k], integrals[k]))
                        + leave
                    )
            j = int(np.argmin(np.where(np.isnan(delta), np.inf, delta)))
            if not delta[j] < -threshold:
                continue
            masses[i] -= w
            masses[j] += w
            integrals[i] -= base[i, c] * w
            integrals[j] += base[j, c] * w
            assignment[c] = j
            moves += 1
            if moves >= max_moves:
                break
    return moves


def _best_swap(spec, base, assignment, cell_masses, masses, integrals):
    """The exchange of a cell of station `a` with a cell of station `b` that
    lowers the objective most, as `(delta, cell_a, cell_b)`. `delta` is
    `inf` when no exchange is possible."""
    current = _station_costs(spec, masses, integrals)
    best = (np.inf, -1, -1)
    for a, b in itertools.combinations(range(base.shape[0]), 2):
        ca = np.flatnonzero(assignment == a)
        cb = np.flatnonzero(assignment == b)
        if not ca.size or not cb.size:
            continue
        wa = cell_masses[ca][:, None]
        wb = cell_masses[cb][None, :]
        # Rows are cells leaving `a`, columns cells leaving `b`.
        shift = wb - wa
        integral_a = integrals[a] - base[a, ca][:, None] * wa + base[a, cb][None, :] * wb
        integral_b = integrals[b] + base[b, ca][:, None] * wa - base[b, cb][None, :] * wb
        delta = (
            spec.station_cost(a, masses[a] + shift, integral_a)
            - current[a]
            + spec.station_cost(b, masses[b] - shift, integral_b)
            - current[b]
        )
        delta = np.where(np.isnan(delta), np.inf, delta)
        i = int(np.argmin(delta))
        if delta.flat[i] < best[0]:
            r, c = divmod(i, cb.size)
            best = (float(delta.flat[i]), int(ca[r]), int(cb[c]))
    return best


def _polish(spec, base, assignment, cell_masses, max_moves):
    """Apply improving single-cell moves until none is left; on grids of at
    most `SWAP_POLISH_CELLS` cells, then exchange pairs of cells while that
    helps, settling single moves after each exchange. Returns the new
    assignment and the number of moves made."""
    assignment = assignment.copy()
    moves = _single_moves(spec, base, assignment, cell_masses, max_moves)
    if assignment.size > SWAP_POLISH_CELLS:
        return assignment, moves
    n_stations = base.shape[0]
    while moves < max_moves:
        masses, integrals = _sums(base, assignment, cell_masses, n_stations)
        threshold = _improvement_threshold(
            float(np.sum(_station_costs(spec, masses, integrals)))
        )
        delta, i, j = _best_swap(spec, base, assignment, cell_masses, masses, integrals)
        if not delta < -threshold:
            break
        assignment[i], assignment[j] = assignment[j], assignment[i]
        moves += 1
        moves += _single_moves(spec, base, assignment, cell_masses, max_moves - moves)
    if moves >= max_moves:
        logger.info("polish stopped after %d moves", moves)
    return assignment, moves


def _brute_force_candidates(domain, stations, spec, base, w, limit):
    "Yield `(mode, assignment)` for each oracle search within `limit`."
    # Deferred: the oracle builds on this module.
    from otcells import oracle

    for mode in oracle.feasible_modes(domain, len(stations), limit):
        try:
            assignment, _ = oracle.SEARCHES[mode](domain, stations, spec, base, w)
        except PowerOverflowError as e:
            # Some candidates load one station far beyond any sensible cell.
            logger.info("skipping the %s search: %s", mode, e)
            continue
        yield mode, assignment


def _solve(kind, domain, density, stations, spec, cfg, total_users):
    if spec.kind != kind:
        raise UnsupportedParameterError(
            f"expected a {kind} congestion spec, got a {spec.kind} one"
        )
    cfg = cfg or SolverConfig()
    stations, distances, base = _prepare(domain, density, stations, spec)
    n_stations = len(stations)
    w = density.cell_masses

    assignment = np.argmin(distances, axis=0)
    masses, integrals = _sums(base, assignment, w, n_stations)
    best_cost, best_assignment = np.inf, assignment

    gamma = cfg.damping
    previous_step = np.zeros(n_stations)
    residual = np.inf
    settled = False
    trace = []
    iteration = 0
    for iteration in range(1, cfg.max_iter + 1):
        response = _best_response(spec, base, masses, integrals)
        target_masses, target_integrals = _sums(base, response, w, n_stations)

        cost = float(np.sum(_station_costs(spec, target_masses, target_integrals)))
        if cost < best_cost:
            best_cost, best_assignment = cost, response

        step = target_masses - masses
        if np.any(step * previous_step < 0):
            gamma /= 2
        previous_step = step
        updated = masses + gamma * step
        integrals = integrals + gamma * (target_integrals - integrals)
        residual = float(np.max(np.abs(updated - masses)))
        masses = updated

        trace.append(Iterate(iteration, residual, gamma, float(np.sum(masses))))
        logger.debug(
            "%s iteration %d: residual %.3e, damping %.3g, masses %s",
            kind,
            iteration,
            residual,
            gamma,
            np.array2string(masses, precision=6),
        )
        if residual <= cfg.tol:
            settled = True
            assignment = response
            break
    if not settled:
        assignment = best_assignment

    moves = 0
    if cfg.polish:
        assignment, moves = _polish(spec, base, assignment, w, cfg.max_iter)

    gap = float(
        np.max(np.abs(np.bincount(assignment, weights=w, minlength=n_stations) - masses))
    )
    # One layer is the mass of a row of cells across the domain.
    layer = float(np.max(w)) * domain.n_cells ** (1 - 1 / domain.ndim)
    converged = settled and gap <= max(cfg.tol, CONVERGED_LAYERS * layer)
    if not settled:
        warnings.warn(
            f"{kind} solver stopped after {cfg.max_iter} iterations "
            f"with mass residual {residual:.3e} > tol {cfg.tol:g}",
            ConvergenceWarning,
            stacklevel=3,
        )
    elif not converged:
        warnings.warn(
            f"{kind} solver settled on masses {gap:.3e} away from those of "
            "its partition",
            ConvergenceWarning,
            stacklevel=3,
        )

    source = FIXED_POINT
    if cfg.brute_force_limit:
        objective = _objective(spec, base, assignment, w)
        for mode, candidate in _brute_force_candidates(
            domain, stations, spec, base, w, cfg.brute_force_limit
        ):
            candidate_moves = 0
            if cfg.polish:
                candidate, candidate_moves = _polish(spec, base, candidate, w, cfg.max_iter)
            cost = _objective(spec, base, candidate, w)
            if cost < objective - _improvement_threshold(objective):
                logger.info(
                    "%s search beats the %s partition: %.12g < %.12g",
                    mode,
                    source,
                    cost,
                    objective,
                )
                assignment, objective, moves, source = candidate, cost, candidate_moves, mode

    partition = Partition.from_assignment(density, stations, assignment, total_users)
    _, final_integrals = _sums(base, partition.assignment, w, n_stations)
    costs = _station_costs(spec, partition.masses, final_integrals)
    report = SolverReport(
        kind=kind,
        iterations=iteration,
        residual=residual,
        converged=converged,
        total_cost=float(np.sum(costs)),
        masses=tuple(float(m) for m in partition.masses),
        intracell_costs=tuple(float(c) for c in costs),
        polish_moves=moves,
        trace=tuple(trace),
        gap=gap,
        source=source,
    )
    logger.info(
        "%s solve: %d iterations, %d polish moves, converged=%s, cost %.10g from the %s",
        kind,
        iteration,
        moves,
        converged,
        report.total_cost,
        source,
    )
    return partition, report


def solve_additive(
    domain, density, stations, spec, cfg=None, total_users=DEFAULT_TOTAL_USERS
):
    """Minimize Σᵢ ∫_{Cᵢ} [F(dᵢ) + sᵢ(Nᵢ)] λ over partitions.

    Cells follow the rule argminᵢ F(dᵢ(c)) + sᵢ(Nᵢ) + Nᵢ·sᵢ′(Nᵢ).

    Returns:
        tuple[Partition, SolverReport]
    """
    return _solve("additive", domain, density, stations, spec, cfg, total_users)


def solve_multiplicative(
    domain, density, stations, spec, cfg=None, total_users=DEFAULT_TOTAL_USERS
):
    """Minimize Σᵢ mᵢ(Nᵢ) ∫_{Cᵢ} F(dᵢ) λ over partitions.

    Cells follow the rule argminᵢ mᵢ(Nᵢ)·F(dᵢ(c)) + mᵢ′(Nᵢ)·∫_{Cᵢ} F(dᵢ)λ.

    Returns:
        tuple[Partition, SolverReport]
    """
    return _solve("multiplicative", domain, density, stations, spec, cfg, total_users)


def intracell_costs(partition, density, spec):
    "Per-station intracell cost of `partition` under `spec`."
    _check_density(partition.domain, density)
    if spec.n_stations != partition.n_stations:
        raise UnsupportedParameterError(
            f"{partition.n_stations} stations but {spec.n_stations} congestion terms"
        )
    base = spec.base_matrix(station_distances(partition.domain, partition.stations))
    masses, integrals = _sums(
        base, partition.assignment, density.cell_masses, partition.n_stations
    )
    return _station_costs(spec, masses, integrals)


def total_cost(partition, domain, density, stations, spec):
    """Σᵢ of the intracell costs of `partition` under `spec`, e.g. the total
    network power P_total for the round-robin objective."""
    if partition.domain != domain:
        raise DomainError("partition is defined on a different domain")
    stations = tuple(stations)
    if stations != partition.stations:
        partition = replace(partition, stations=stations)
    return float(np.sum(intracell_costs(partition, density, spec)))


def rule_violation(partition, density, spec):
    """Per-cell amount by which the first-order rule prefers another station
    over the assigned one, at the partition's own masses. Zero everywhere
    means the partition satisfies the optimality rule exactly."""
    base = spec.base_matrix(station_distances(partition.domain, partition.stations))
    masses, integrals = _sums(
        base, partition.assignment, density.cell_masses, partition.n_stations
    )
    scores = _rule_scores(spec, base, masses, integrals)
    own = scores[partition.assignment, np.arange(partition.domain.n_cells)]
    return own - np.min(scores, axis=0)
