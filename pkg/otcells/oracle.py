"""Brute-force reference optima for small instances.

Two families are searched. `"threshold-scan"` tries every contiguous 1D
partition whose cells are intervals in station-position order, empty cells
included; `"exhaustive"` tries every assignment of every cell.
"""

import logging
from math import comb

import numpy as np

from otcells.errors import InstanceTooLargeError, UnsupportedParameterError
from otcells.radio import DEFAULT_TOTAL_USERS
from otcells.solvers import Partition, _prepare

logger = logging.getLogger(__name__)

THRESHOLD_SCAN = "threshold-scan"
EXHAUSTIVE = "exhaustive"

MAX_SCAN_CELLS = {1: 10**6, 2: 10**6, 3: 10**4}
MAX_EXHAUSTIVE_CELLS = 16
MAX_EXHAUSTIVE_STATIONS = 3
# Assignments evaluated per vectorized block in exhaustive mode.
EXHAUSTIVE_BLOCK = 1 << 18


def brute_force_oracle(
    domain, density, stations, spec, mode=THRESHOLD_SCAN, total_users=DEFAULT_TOTAL_USERS
):
    """Global minimum of the objective `spec` over the family `mode`.

    Ties go to the first candidate in enumeration order.

    Returns:
        tuple[Partition, float]: The minimizing partition and its cost.

    Raises:
        InstanceTooLargeError: if the instance exceeds the mode's limits.
    """
    if mode not in SEARCHES:
        raise UnsupportedParameterError(
            f"unknown oracle mode {mode!r} (expected {THRESHOLD_SCAN!r} or {EXHAUSTIVE!r})"
        )
    stations, distances, base = _prepare(domain, density, stations, spec)
    assignment, cost = SEARCHES[mode](domain, stations, spec, base, density.cell_masses)
    logger.info("%s oracle: cost %.12g", mode, cost)
    return Partition.from_assignment(density, stations, assignment, total_users), cost


def search_size(mode, domain, n_stations):
    "Number of candidate partitions `mode` enumerates."
    n = domain.n_cells
    if mode == THRESHOLD_SCAN:
        return comb(n + n_stations - 1, n_stations - 1)
    return n_stations**n


def feasible_modes(domain, n_stations, max_candidates=None):
    """The oracle modes that accept this instance, in order of preference,
    optionally only those enumerating at most `max_candidates` partitions."""
    modes = []
    for mode, check in ((THRESHOLD_SCAN, _check_scan), (EXHAUSTIVE, _check_exhaustive)):
        try:
            check(domain, n_stations)
        except InstanceTooLargeError:
            continue
        if max_candidates is None or search_size(mode, domain, n_stations) <= max_candidates:
            modes.append(mode)
    return modes


def _check_scan(domain, n_stations):
    if domain.ndim != 1:
        raise InstanceTooLargeError("the threshold scan only searches 1D domains")
    if n_stations > 3:
        raise InstanceTooLargeError(
            f"the threshold scan handles at most 3 stations, got {n_stations}"
        )
    if domain.n_cells > MAX_SCAN_CELLS[n_stations]:
        raise InstanceTooLargeError(
            f"the threshold scan handles at most {MAX_SCAN_CELLS[n_stations]} cells "
            f"with {n_stations} stations, got {domain.n_cells}"
        )


def _check_exhaustive(domain, n_stations):
    n = domain.n_cells
    if n > MAX_EXHAUSTIVE_CELLS or n_stations > MAX_EXHAUSTIVE_STATIONS:
        raise InstanceTooLargeError(
            f"exhaustive search handles at most {MAX_EXHAUSTIVE_CELLS} cells and "
            f"{MAX_EXHAUSTIVE_STATIONS} stations, got {n} cells and {n_stations} stations"
        )


def _threshold_scan(domain, stations, spec, base, w):
    n_stations = len(stations)
    _check_scan(domain, n_stations)
    n = domain.n_cells

    order = np.argsort([s.position[0] for s in stations], kind="stable")
    # Prefix sums: mass and transport integral of cells [0, t) for each station.
    mass_prefix = np.concatenate(([0.0], np.cumsum(w)))
    integral_prefix = np.hstack(
        [np.zeros((n_stations, 1)), np.cumsum(base * w, axis=1)]
    )

    def segment_cost(k, lo, hi):
        return spec.station_cost(
            k,
            mass_prefix[hi] - mass_prefix[lo],
            integral_prefix[k, hi] - integral_prefix[k, lo],
        )

    if n_stations == 1:
        cuts = ()
        cost = float(segment_cost(order[0], 0, n))
    elif n_stations == 2:
        t = np.arange(n + 1)
        costs = segment_cost(order[0], 0, t) + segment_cost(order[1], t, n)
        costs = np.where(np.isnan(costs), np.inf, costs)
        best = int(np.argmin(costs))
        cuts, cost = (best,), float(costs[best])
    else:
        cost, cuts = np.inf, None
        for t1 in range(n + 1):
            t2 = np.arange(t1, n + 1)
            costs = (
                segment_cost(order[0], 0, t1)
                + segment_cost(order[1], t1, t2)
                + segment_cost(order[2], t2, n)
            )
            costs = np.where(np.isnan(costs), np.inf, costs)
            best = int(np.argmin(costs))
            if costs[best] < cost:
                cost, cuts = float(costs[best]), (t1, int(t2[best]))

    assignment = np.empty(n, dtype=np.intp)
    bounds = (0, *cuts, n)
    for k, (lo, hi) in zip(order, zip(bounds, bounds[1:])):
        assignment[lo:hi] = k
    return assignment, cost


def _exhaustive(domain, stations, spec, base, w):
    n_stations, n = len(stations), domain.n_cells
    _check_exhaustive(domain, n_stations)
    # Per-station cost of every subset of cells, indexed by bitmask (bit j
    # is cell j). An assignment then costs one lookup per station.
    masses = _subset_sums(w)
    tables = []
    for k in range(n_stations):
        cost = spec.station_cost(k, masses, _subset_sums(base[k] * w))
        tables.append(np.where(np.isnan(cost), np.inf, cost))

    # Cells [0, low) are the fast digits and [low, n) the slow ones.
    low = n // 2
    lo_masks = _digit_masks(low, n_stations)
    hi_masks = _digit_masks(n - low, n_stations) << low
    n_lo, n_hi = lo_masks.shape[1], hi_masks.shape[1]
    rows = max(1, EXHAUSTIVE_BLOCK // n_lo)

    best_cost, best_hi, best_lo = np.inf, 0, 0
    for start in range(0, n_hi, rows):
        hi = hi_masks[:, start : start + rows]
        costs = np.zeros((hi.shape[1], n_lo))
        for k in range(n_stations):
            costs += tables[k][hi[k][:, None] | lo_masks[k][None, :]]
        i = int(np.argmin(costs))
        if costs.flat[i] < best_cost:
            r, c = divmod(i, n_lo)
            best_cost, best_hi, best_lo = float(costs.flat[i]), start + r, c

    assignment = np.concatenate(
        (_digits(best_lo, low, n_stations), _digits(best_hi, n - low, n_stations))
    )
    return assignment.astype(np.intp), best_cost


def _subset_sums(values):
    "Sum of `values` over every subset, indexed by the subset's bitmask."
    sums = np.zeros(1 << len(values))
    for j, v in enumerate(values):
        sums[1 << j : 2 << j] = sums[: 1 << j] + v
    return sums


def _digits(code, m, n_stations):
    "The `m` base-`n_stations` digits of `code`, least significant first."
    return (code // n_stations ** np.arange(m)) % n_stations


def _digit_masks(m, n_stations):
    """For every code of `m` base-`n_stations` digits, the bitmask of the
    digits equal to each station, as an `(n_stations, n_stations**m)` array."""
    codes = np.arange(n_stations**m)
    masks = np.zeros((n_stations, codes.size), dtype=np.int64)
    for j in range(m):
        digit = (codes // n_stations**j) % n_stations
        for k in range(n_stations):
            masks[k] |= (digit == k).astype(np.int64) << j
    return masks


SEARCHES = {THRESHOLD_SCAN: _threshold_scan, EXHAUSTIVE: _exhaustive}
