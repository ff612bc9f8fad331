"""Wardrop equilibria of user association and the price of anarchy.

Users pick the station offering them the best rate given everybody else's
choice. An `EquilibriumModel` says what a station offers a user at distance
`d` when its cell holds the proportion `n` of users:

- `ShareRateModel` (built in): the station's Shannon rate at the user's
  location, time-shared among the users of its cell.
- `CongestionCostModel`: minus the user's own cost under a `CongestionSpec`,
  which is how selfish users behave in the congestion objectives.

Equilibria are found on continuous thresholds in 1D (every sign change of
the indifference function, so several equilibria can come back) and by a
damped fixed point on the masses in 2D.
"""

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from otcells.congestion import ADDITIVE, Constant, CongestionSpec, PowerLawCost, Step
from otcells.domain import Domain, build_uniform_density
from otcells.errors import (
    DomainError,
    EquilibriumError,
    StationError,
    UnsupportedParameterError,
)
from otcells.radio import (
    DEFAULT_TOTAL_USERS,
    Station,
    check_stations,
    distance,
    station_distances,
    throughput,
)
from otcells.solvers import (
    Partition,
    SolverConfig,
    solve_additive,
    solve_multiplicative,
    total_cost,
)

logger = logging.getLogger(__name__)

DEFAULT_SCAN_RESOLUTION = 2000
INDIFFERENCE_TOL = 1e-10
_BRENT = dict(xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)

BEST = "best"
WORST = "worst"
UNCLASSIFIED = "unclassified"


class EquilibriumModel:
    """Per-user offered rates. Subclasses define `rate` and `join_rate`,
    both vectorized over distances and masses.

    `rate` is what a user already in the cell gets; at zero mass it may be
    `+inf`. `join_rate` is the finite rate a user gets by joining, which
    for an empty cell means being its only user.
    """

    def __init__(self, stations):
        self.stations = tuple(stations)

    def position(self, station):
        "Position of `station` in this model's station list."
        for k, s in enumerate(self.stations):
            if s.index == station.index:
                return k
        raise StationError(f"station {station.index} is not part of this model")

    def rate(self, k, d, n):
        raise NotImplementedError

    def join_rate(self, k, d, n):
        raise NotImplementedError


class ShareRateModel(EquilibriumModel):
    """log₂(1 + Pᵢhᵢ(d)/σ²) / (Nᵢ·T): the station's rate at the user's
    location shared among its `Nᵢ·T` users. Stations without a transmit
    power are taken to send 1 W."""

    def __init__(self, params, stations, total_users=DEFAULT_TOTAL_USERS):
        super().__init__(stations)
        self.params = params
        self.total_users = float(total_users)
        self.powers = np.array(
            [1.0 if s.tx_power is None else s.tx_power for s in self.stations]
        )

    def peak_rate(self, k, d):
        "Rate a lone user at distance `d` gets."
        gain = (self.params.height**2 + np.asarray(d, dtype=float) ** 2) ** (
            -self.params.xi / 2
        )
        return throughput(self.powers[k] * gain / self.params.sigma2)

    def rate(self, k, d, n):
        users = np.asarray(n, dtype=float) * self.total_users
        with np.errstate(divide="ignore"):
            return np.where(users > 0, self.peak_rate(k, d) / users, np.inf)

    def join_rate(self, k, d, n):
        users = np.maximum(np.asarray(n, dtype=float) * self.total_users, 1.0)
        return self.peak_rate(k, d) / users


class CongestionCostModel(EquilibriumModel):
    """Minus the user's own cost: F(dᵢ) + sᵢ(Nᵢ) for an additive spec,
    mᵢ(Nᵢ)·F(dᵢ) for a multiplicative one."""

    def __init__(self, spec, stations):
        super().__init__(stations)
        if spec.n_stations != len(self.stations):
            raise StationError(
                f"{len(self.stations)} stations but {spec.n_stations} congestion terms"
            )
        self.spec = spec

    def rate(self, k, d, n):
        base = self.spec.base_for(k)(d)
        term = self.spec.terms[k].value(n)
        if self.spec.kind == ADDITIVE:
            return -(base + term)
        return -(term * base)

    join_rate = rate


def offered_rate(model, station, point, n_i):
    "Rate `station` offers a user at `point` when its cell holds mass `n_i`."
    if np.any(np.asarray(n_i) < 0):
        raise DomainError("cell mass must be nonnegative")
    return model.rate(model.position(station), distance(station, point), n_i)


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    """
    Attributes:
        partition (Partition): Grid assignment of the equilibrium.
        common_rate (float): Rate offered at the cell boundaries.
        residual (float): Largest violation of the Wardrop conditions.
        classification (str): `"best"`, `"worst"` or `"unclassified"`.
        thresholds (Optional[tuple]): 1D cell boundaries in station-position order.
        masses (tuple): Cell masses in station order; exact (from the
            thresholds) in 1D.
        converged (bool): Whether the underlying iteration met its tolerance.
        iterations (int)
    """

    partition: Partition
    common_rate: float
    residual: float
    classification: str = UNCLASSIFIED
    thresholds: tuple = None
    masses: tuple = ()
    converged: bool = True
    iterations: int = 0


def _check_1d(domain, density, stations):
    if domain.ndim != 1:
        raise DomainError("this equilibrium solver needs a 1D domain")
    if density.domain != domain:
        raise DomainError("density is defined on a different domain")
    return check_stations(stations, domain)


def _by_position(stations):
    return sorted(stations, key=lambda s: s.position[0])


def _interval_masses(density, edges):
    """Masses between consecutive `edges`. Edges at or beyond either end of
    the domain cut off exactly none or all of the unit mass."""
    a, b = density.domain.extent(0)
    t = np.asarray(edges, dtype=float)
    cut = np.where(t <= a, 0.0, np.where(t >= b, 1.0, density.cdf(t)))
    return np.diff(cut)


def _threshold_solution(
    domain, density, stations, ordered, thresholds, total_users, **fields
):
    "An `EquilibriumSolution` whose cells are the intervals between `thresholds`."
    thresholds = tuple(float(t) for t in thresholds)
    slot = np.searchsorted(thresholds, domain.coordinates[0], side="right")
    lookup = np.array([stations.index(s) for s in ordered])
    partition = Partition.from_assignment(density, stations, lookup[slot], total_users)

    a, b = domain.extent(0)
    interval_masses = _interval_masses(density, [a, *thresholds, b])
    masses = np.empty(len(stations))
    for m, s in zip(interval_masses, ordered):
        masses[stations.index(s)] = m
    return EquilibriumSolution(
        partition=partition,
        thresholds=thresholds,
        masses=tuple(float(m) for m in masses),
        **fields,
    )


def _sample_points(domain):
    return np.concatenate((domain.edges(0)[[0, -1]], domain.coordinates[0]))


def _entry_gap(model, density, keep, leave):
    """Largest gain a user could get by leaving `keep`, the only nonempty
    station, for the empty station `leave`. Nonpositive means the empty
    cell satisfies the Wardrop condition."""
    xs = _sample_points(density.domain)
    sk, sl = model.stations[keep], model.stations[leave]
    return float(
        np.max(
            model.join_rate(leave, distance(sl, xs), 0.0)
            - model.join_rate(keep, distance(sk, xs), density.total_mass())
        )
    )


def solve_equilibrium_1d_two_stations(
    domain,
    density,
    s1,
    s2,
    model,
    scan_resolution=DEFAULT_SCAN_RESOLUTION,
    total_users=DEFAULT_TOTAL_USERS,
):
    """All threshold equilibria between two stations on an interval.

    The indifference g(t) = rate₁(t, N₁(t)) − rate₂(t, N₂(t)), with N₁(t)
    the mass left of `t` and station 1 the leftmost, is scanned on
    `scan_resolution` intervals and every sign change is refined with
    Brent's method. A threshold pinned at either end of the domain is
    returned when the empty station attracts nobody.

    Returns:
        list[EquilibriumSolution]: Ordered by threshold; possibly empty.
    """
    stations = _check_1d(domain, density, [s1, s2])
    left, right = ordered = _by_position(stations)
    kl, kr = model.position(left), model.position(right)
    total = density.total_mass()
    a, b = domain.extent(0)

    def indifference(t):
        n_left = density.cdf(t)
        return model.join_rate(kl, distance(left, t), n_left) - model.join_rate(
            kr, distance(right, t), total - n_left
        )

    ts = np.linspace(a, b, int(scan_resolution) + 1)
    g = np.asarray(indifference(ts), dtype=float)
    roots = [float(t) for t in ts[1:-1][g[1:-1] == 0]]
    for i in np.flatnonzero(g[:-1] * g[1:] < 0):
        roots.append(brentq(lambda t: float(indifference(t)), ts[i], ts[i + 1], **_BRENT))

    solutions = []
    for t in sorted(set(roots)):
        solutions.append(
            _threshold_solution(
                domain,
                density,
                stations,
                ordered,
                (t,),
                total_users,
                common_rate=float(model.join_rate(kl, distance(left, t), density.cdf(t))),
                residual=abs(float(indifference(t))),
            )
        )
    # Pinned thresholds: one cell empty and nobody wanting to join it.
    for t, keep, leave, lone in ((a, kr, kl, right), (b, kl, kr, left)):
        gap = _entry_gap(model, density, keep, leave)
        if gap <= INDIFFERENCE_TOL:
            solutions.append(
                _threshold_solution(
                    domain,
                    density,
                    stations,
                    ordered,
                    (t,),
                    total_users,
                    common_rate=float(model.join_rate(keep, distance(lone, t), total)),
                    residual=max(gap, 0.0),
                )
            )
    solutions.sort(key=lambda s: s.thresholds[0])
    logger.info(
        "two-station equilibria: %d found at %s",
        len(solutions),
        [s.thresholds[0] for s in solutions],
    )
    return solutions


def _pair_threshold(model, density, left, right, lo, hi):
    """Indifference point of two adjacent stations sharing `[lo, hi]`, or
    `lo`/`hi` when one of them attracts nobody. `left` and `right` are
    `(model position, station)` pairs."""
    if hi <= lo:
        return lo
    (kl, sl), (kr, sr) = left, right
    cum_lo, cum_hi = float(density.cdf(lo)), float(density.cdf(hi))

    def indifference(t):
        c = float(density.cdf(t))
        return float(
            model.join_rate(kl, distance(sl, t), c - cum_lo)
            - model.join_rate(kr, distance(sr, t), cum_hi - c)
        )

    if indifference(lo) <= 0:
        return lo
    if indifference(hi) >= 0:
        return hi
    return brentq(indifference, lo, hi, **_BRENT)


class _ActiveSet:
    """Stations (as ranks in position order) whose cells are nonempty, with
    the interior boundaries between consecutive ones."""

    def __init__(self, ordered, a, b):
        self.ordered, self.a, self.b = ordered, a, b
        self.ranks = list(range(len(ordered)))
        self.bounds = [
            0.5 * (ordered[i].position[0] + ordered[i + 1].position[0])
            for i in range(len(ordered) - 1)
        ]

    @property
    def edges(self):
        return [self.a, *self.bounds, self.b]

    def drop_empty(self):
        "Remove stations whose interval has collapsed. Returns whether any was."
        dropped = False
        j = 0
        while len(self.ranks) > 1 and j < len(self.ranks):
            edges = self.edges
            if edges[j + 1] > edges[j]:
                j += 1
                continue
            del self.ranks[j]
            del self.bounds[min(j, len(self.bounds) - 1)]
            dropped = True
        return dropped

    def insert(self, rank):
        """Put `rank` back with an interval between its own position and the
        boundary of the cell it lies in."""
        j = sum(1 for r in self.ranks if r < rank)
        edges = self.edges
        p = self.ordered[rank].position[0]
        if j == 0:
            self.bounds.insert(0, float(np.clip(p, self.a, edges[1])))
        elif j == len(self.ranks):
            self.bounds.append(float(np.clip(p, edges[-2], self.b)))
        else:
            t = edges[j]
            p = float(np.clip(p, edges[j - 1], edges[j + 1]))
            self.bounds[j - 1 : j] = [min(p, t), max(p, t)]
        self.ranks.insert(j, rank)

    def thresholds(self):
        """One threshold after every station but the last, in position order.
        Inactive stations sit on the boundary between their active neighbours."""
        edges = self.edges
        out = []
        for i in range(len(self.ordered) - 1):
            if i in self.ranks:
                out.append(edges[self.ranks.index(i) + 1])
            else:
                out.append(edges[sum(1 for r in self.ranks if r < i)])
        return out


def _own_join_rates(model, ks, active, density, xs):
    "Rate every sample point gets from its own (active) station."
    edges = active.edges
    masses = _interval_masses(density, edges)
    slot = np.clip(
        np.searchsorted(edges, xs, side="right") - 1, 0, len(active.ranks) - 1
    )
    own = np.empty(xs.size)
    for j, i in enumerate(active.ranks):
        sel = slot == j
        own[sel] = model.join_rate(ks[i], distance(active.ordered[i], xs[sel]), masses[j])
    return own, masses


def _inactive_gaps(model, ks, active, density, xs):
    "Largest entry gain over `xs` for every inactive rank."
    own, _ = _own_join_rates(model, ks, active, density, xs)
    return {
        i: float(np.max(model.join_rate(ks[i], distance(s, xs), 0.0) - own))
        for i, s in enumerate(active.ordered)
        if i not in active.ranks
    }


def solve_equilibrium_1d_multi(
    domain,
    density,
    stations,
    model,
    scan_resolution=DEFAULT_SCAN_RESOLUTION,
    cfg=None,
    total_users=DEFAULT_TOTAL_USERS,
):
    """Threshold equilibrium for any number of stations on an interval,
    assuming cells are intervals in station-position order.

    Boundaries between adjacent nonempty cells are updated one after the
    other (damped Gauss-Seidel), each by solving its pairwise indifference
    with the neighbouring boundaries held fixed. A cell that shrinks to
    nothing drops out of the active set; once the boundaries settle, a
    dropped station that would attract users somewhere on a
    `scan_resolution`-point grid is put back and the sweep resumes.

    Returns:
        list[EquilibriumSolution]: A single solution.
    """
    cfg = cfg or SolverConfig()
    stations = _check_1d(domain, density, stations)
    ordered = _by_position(stations)
    ks = [model.position(s) for s in ordered]
    a, b = domain.extent(0)
    xs = np.linspace(a, b, int(scan_resolution) + 1)
    active = _ActiveSet(ordered, a, b)

    converged = False
    iterations = 0
    for _ in range(len(ordered) + 1):
        converged = False
        while iterations < cfg.max_iter:
            iterations += 1
            change = 0.0
            for j in range(len(active.ranks) - 1):
                edges = active.edges
                il, ir = active.ranks[j], active.ranks[j + 1]
                lo, hi = edges[j], edges[j + 2]
                new = _pair_threshold(
                    model, density, (ks[il], ordered[il]), (ks[ir], ordered[ir]), lo, hi
                )
                # Pinned boundaries are taken as they are so cells can empty.
                if lo < new < hi:
                    new = (1 - cfg.damping) * active.bounds[j] + cfg.damping * new
                change = max(change, abs(new - active.bounds[j]))
                active.bounds[j] = new
            if active.drop_empty():
                change = np.inf
            logger.debug(
                "multi-station iteration %d: change %.3e, boundaries %s",
                iterations,
                change,
                active.bounds,
            )
            if change <= cfg.tol * (b - a):
                converged = True
                break
        gaps = _inactive_gaps(model, ks, active, density, xs)
        worst = max(gaps, key=gaps.get, default=None)
        if worst is None or gaps[worst] <= INDIFFERENCE_TOL:
            break
        logger.debug("reactivating station %d", ordered[worst].index)
        active.insert(worst)

    own, masses = _own_join_rates(model, ks, active, density, xs)
    residual, rates = 0.0, []
    edges = active.edges
    for j in range(len(active.ranks) - 1):
        il, ir = active.ranks[j], active.ranks[j + 1]
        t = edges[j + 1]
        r_left = float(model.join_rate(ks[il], distance(ordered[il], t), masses[j]))
        r_right = float(model.join_rate(ks[ir], distance(ordered[ir], t), masses[j + 1]))
        residual = max(residual, abs(r_left - r_right))
        rates.append(r_left)
    for gap in _inactive_gaps(model, ks, active, density, xs).values():
        residual = max(residual, gap)
    common = float(np.mean(rates)) if rates else float(np.min(own))

    thresholds = active.thresholds()
    logger.info(
        "multi-station equilibrium: %d iterations, converged=%s, thresholds %s",
        iterations,
        converged,
        thresholds,
    )
    return [
        _threshold_solution(
            domain,
            density,
            stations,
            ordered,
            thresholds,
            total_users,
            common_rate=common,
            residual=residual,
            converged=converged,
            iterations=iterations,
        )
    ]


def _rate_rows(model, ks, distances, masses, join=False):
    f = model.join_rate if join else model.rate
    rows = np.vstack([f(k, distances[i], masses[i]) for i, k in enumerate(ks)])
    return np.where(np.isnan(rows), -np.inf, rows)


def _boundary_cells(domain, assignment):
    "Cells with a grid neighbour in another station's cell."
    grid = assignment.reshape(domain.shape)
    mask = np.zeros(grid.shape, dtype=bool)
    for axis in range(grid.ndim):
        differs = np.diff(grid, axis=axis) != 0
        lo = [slice(None)] * grid.ndim
        hi = [slice(None)] * grid.ndim
        lo[axis], hi[axis] = slice(None, -1), slice(1, None)
        mask[tuple(lo)] |= differs
        mask[tuple(hi)] |= differs
    return mask.ravel()


def solve_equilibrium_2d(
    domain, density, stations, model, cfg=None, total_users=DEFAULT_TOTAL_USERS
):
    """Rate-balanced partition of a rectangle.

    Starting from Voronoi masses, every cell is sent to the station offering
    it the highest rate at the current masses, and the masses of that
    assignment are blended in with the same adaptive damping as the
    congestion solvers. The residual is the largest rate gain any cell could
    get by switching station, at the returned partition's masses.
    """
    cfg = cfg or SolverConfig()
    stations = check_stations(stations, domain)
    if density.domain != domain:
        raise DomainError("density is defined on a different domain")
    ks = [model.position(s) for s in stations]
    distances = station_distances(domain, stations)
    w = density.cell_masses
    n_stations = len(stations)
    cells = np.arange(domain.n_cells)

    response = np.argmin(distances, axis=0)
    masses = np.bincount(response, weights=w, minlength=n_stations)
    gamma = cfg.damping
    previous_step = np.zeros(n_stations)
    converged = False
    iteration = 0
    for iteration in range(1, cfg.max_iter + 1):
        # `argmax` keeps the first maximum: ties go to the earliest station.
        response = np.argmax(_rate_rows(model, ks, distances, masses), axis=0)
        step = np.bincount(response, weights=w, minlength=n_stations) - masses
        if np.any(step * previous_step < 0):
            gamma /= 2
        previous_step = step
        residual = float(np.max(np.abs(gamma * step)))
        masses = masses + gamma * step
        logger.debug(
            "2D equilibrium iteration %d: change %.3e, damping %.3g", iteration, residual, gamma
        )
        if residual <= cfg.tol:
            converged = True
            break

    partition = Partition.from_assignment(density, stations, response, total_users)
    join = _rate_rows(model, ks, distances, partition.masses, join=True)
    own = join[partition.assignment, cells]
    regret = float(max(np.max(join - own), 0.0))
    boundary = _boundary_cells(domain, partition.assignment)
    common = float(np.mean(own[boundary])) if boundary.any() else float(np.min(own))
    logger.info(
        "2D equilibrium: %d iterations, converged=%s, regret %.3e",
        iteration,
        converged,
        regret,
    )
    return EquilibriumSolution(
        partition=partition,
        common_rate=common,
        residual=regret,
        masses=tuple(float(m) for m in partition.masses),
        converged=converged,
        iterations=iteration,
    )


def cell_regret(solution, model, density):
    """Per-cell gain from switching to the best other station, at the
    solution's masses (exact masses in 1D). Nonpositive wherever the Wardrop
    conditions hold."""
    partition = solution.partition
    ks = [model.position(s) for s in partition.stations]
    distances = station_distances(partition.domain, partition.stations)
    masses = np.asarray(solution.masses or partition.masses)
    join = _rate_rows(model, ks, distances, masses, join=True)
    own = join[partition.assignment, np.arange(partition.domain.n_cells)]
    return np.max(join, axis=0) - own


def find_equilibria(
    domain,
    density,
    stations,
    model,
    scan_resolution=DEFAULT_SCAN_RESOLUTION,
    cfg=None,
    total_users=DEFAULT_TOTAL_USERS,
):
    "Dispatch to the equilibrium solver that fits the domain and station count."
    stations = list(stations)
    if domain.ndim == 2:
        return [solve_equilibrium_2d(domain, density, stations, model, cfg, total_users)]
    if len(stations) == 2:
        return solve_equilibrium_1d_two_stations(
            domain, density, *stations, model, scan_resolution, total_users
        )
    return solve_equilibrium_1d_multi(
        domain, density, stations, model, scan_resolution, cfg, total_users
    )


def select_equilibrium(solutions, criterion=WORST):
    """The `"best"` (highest common rate) or `"worst"` (lowest) solution,
    ties going to the lowest threshold."""
    solutions = list(solutions)
    if not solutions:
        raise EquilibriumError("no equilibria to select from")
    if criterion not in (BEST, WORST):
        raise UnsupportedParameterError(
            f"criterion must be {BEST!r} or {WORST!r}, got {criterion!r}"
        )
    sign = -1 if criterion == BEST else 1

    def key(s):
        return (sign * s.common_rate, s.thresholds[0] if s.thresholds else 0.0)

    return replace(min(solutions, key=key), classification=criterion)


class PriceOfAnarchy(NamedTuple):
    ratio: float
    equilibrium_cost: float
    optimum_cost: float
    equilibrium: EquilibriumSolution
    optimum: Partition
    equilibria: list


def price_of_anarchy(
    domain,
    density,
    stations,
    spec,
    model,
    cfg=None,
    scan_resolution=DEFAULT_SCAN_RESOLUTION,
    total_users=DEFAULT_TOTAL_USERS,
):
    """Cost of the costliest equilibrium over the optimal cost, both under
    `spec`.

    The optimum is the cheaper of the congestion solver's partition (which
    already tries the oracle searches small enough for the instance) and
    the equilibria themselves, so the ratio is never below 1.

    Raises:
        EquilibriumError: if no equilibrium is found or the optimum cost
            is not positive.
    """
    stations = list(stations)
    equilibria = find_equilibria(
        domain, density, stations, model, scan_resolution, cfg, total_users
    )
    if not equilibria:
        raise EquilibriumError("no equilibrium found")

    def cost(partition):
        return total_cost(partition, domain, density, stations, spec)

    costs = [cost(s.partition) for s in equilibria]
    worst = int(np.argmax(costs))
    solve = solve_additive if spec.kind == ADDITIVE else solve_multiplicative
    candidates = [solve(domain, density, stations, spec, cfg, total_users)[0]]
    candidates += [s.partition for s in equilibria]
    candidate_costs = [cost(p) for p in candidates]
    best = int(np.argmin(candidate_costs))
    optimum_cost = candidate_costs[best]
    if not optimum_cost > 0:
        raise EquilibriumError(
            f"optimum cost is {optimum_cost!r}; the ratio needs a positive optimum"
        )
    ratio = costs[worst] / optimum_cost
    logger.info(
        "price of anarchy %.6g (equilibrium %.6g, optimum %.6g)",
        ratio,
        costs[worst],
        optimum_cost,
    )
    return PriceOfAnarchy(
        ratio=ratio,
        equilibrium_cost=costs[worst],
        optimum_cost=optimum_cost,
        equilibrium=replace(equilibria[worst], classification=WORST),
        optimum=candidates[best],
        equilibria=equilibria,
    )


POA_TOY_CAPACITY = 0.999


def poa_toy_instance(resolution=100_000):
    """The unfair-optimum instance: users on [0, 1], stations at both ends,
    distance cost, a flat charge of 100 at station 1 and a unit charge at
    station 2 once it serves more than 99.9% of users.

    Returns:
        tuple: `(domain, density, stations, spec)`.
    """
    domain = Domain.interval(0.0, 1.0, resolution)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    spec = CongestionSpec.additive(
        PowerLawCost(1.0), [Constant(100.0), Step(POA_TOY_CAPACITY, 0.0, 1.0)]
    )
    return domain, build_uniform_density(domain), stations, spec


def poa_toy_example(resolution=100_000):
    """Selfish users all crowd station 2 although the optimum sends the
    first 0.1% of them to station 1.

    Returns:
        PriceOfAnarchy
    """
    domain, density, stations, spec = poa_toy_instance(resolution)
    model = CongestionCostModel(spec, stations)
    return price_of_anarchy(domain, density, stations, spec, model)
