"""Association policies as instances of the congestion objectives.

==================  ===============  =========================================
policy              objective        cost
==================  ===============  =========================================
round-robin         multiplicative   σ²(R²+d²)^(ξ/2) · (2^(N·T·θ̄) − 1)
rate-fair           additive         σ²(R²+d²)^(ξ/2), no congestion term
penalized           additive         σ²(R²+d²)^(ξ/2) + κᵢ(N)
alpha-fair          multiplicative   path loss^(α−1)/(α−1) · (2^(N·T·θ̄) − 1)^(α−1)
==================  ===============  =========================================
"""

from dataclasses import replace

import numpy as np

from otcells.congestion import (
    AlphaFairCost,
    CongestionSpec,
    PathLossCost,
    Penalty,
    PowerOf,
    ShannonFactor,
    Zero,
)
from otcells.errors import DomainError, StationError, UnsupportedParameterError
from otcells.radio import (
    DEFAULT_TOTAL_USERS,
    RadioParams,
    check_stations,
    station_distances,
)
from otcells.solvers import Partition, SolverConfig, solve_additive, solve_multiplicative

ROUND_ROBIN = "round-robin"
RATE_FAIR = "rate-fair"
PENALIZED = "penalized"
ALPHA_FAIR = "alpha-fair"
WARDROP = "wardrop"
POLICIES = (ROUND_ROBIN, RATE_FAIR, PENALIZED, ALPHA_FAIR, WARDROP)


def round_robin_spec(stations, params, total_users=DEFAULT_TOTAL_USERS):
    return CongestionSpec.multiplicative(
        PathLossCost(params),
        [ShannonFactor(total_users, params.theta_bar, s.index) for s in stations],
    )


def rate_fair_spec(stations, params):
    return CongestionSpec.additive(PathLossCost(params), [Zero() for _ in stations])


def penalized_spec(stations, params, total_users=DEFAULT_TOTAL_USERS, kink_tol=1e-8):
    missing = [
        s.index for s in stations if s.max_carriers is None or s.kappa_bar is None
    ]
    if missing:
        raise StationError(
            "the penalized policy needs max_carriers and kappa_bar on every station; "
            f"missing on station(s) {', '.join(map(str, missing))}"
        )
    return CongestionSpec.additive(
        PathLossCost(params),
        [
            Penalty(s.max_carriers, s.kappa_bar, total_users, kink_tol)
            for s in stations
        ],
    )


def alpha_fair_spec(stations, params, alpha, total_users=DEFAULT_TOTAL_USERS):
    base = AlphaFairCost(params, alpha)
    return CongestionSpec.multiplicative(
        base,
        [
            PowerOf(ShannonFactor(total_users, params.theta_bar, s.index), alpha - 1)
            for s in stations
        ],
    )


def round_robin_solver(
    domain, density, stations, params, total_users=DEFAULT_TOTAL_USERS, cfg=None
):
    """Partition minimizing the total power needed to give every user θ̄
    under round-robin time sharing.

    The report's `total_power` is the network power summed over all
    `total_users` users; `total_cost` is the same per user.
    """
    stations = check_stations(stations, domain)
    partition, report = solve_multiplicative(
        domain,
        density,
        stations,
        round_robin_spec(stations, params, total_users),
        cfg,
        total_users,
    )
    return partition, replace(report, total_power=report.total_cost * total_users)


def rate_fair_solver(domain, density, stations, params, total_users=DEFAULT_TOTAL_USERS):
    """Each cell goes to the station with the smallest path loss, which is
    the nearest one: the rate-fair optimum is the Voronoi partition.

    `params` only has to be valid. Every station shares it, and with ξ > 0
    the path loss σ²(R²+d²)^(ξ/2) is strictly increasing in d, so comparing
    distances gives the same cells without rounding ties in the path loss.
    """
    if not isinstance(params, RadioParams):
        raise UnsupportedParameterError(
            f"rate-fair needs RadioParams, got {type(params).__name__}"
        )
    stations = check_stations(stations, domain)
    if density.domain != domain:
        raise DomainError("density is defined on a different domain")
    nearest = np.argmin(station_distances(domain, stations), axis=0)
    return Partition.from_assignment(density, stations, nearest, total_users)


def penalized_rate_fair_solver(
    domain, density, stations, params, total_users=DEFAULT_TOTAL_USERS, cfg=None
):
    "Rate-fair partition with a per-user penalty above each station's capacity."
    cfg = cfg or SolverConfig()
    stations = check_stations(stations, domain)
    spec = penalized_spec(stations, params, total_users, kink_tol=cfg.tol)
    return solve_additive(domain, density, stations, spec, cfg, total_users)


def alpha_fair_solver(
    domain, density, stations, params, alpha, total_users=DEFAULT_TOTAL_USERS, cfg=None
):
    """α-fair power minimization. α = 0 maximizes energy efficiency, α = 2
    minimizes total power (the round-robin partition) and large α
    approaches min-max power.

    Raises:
        UnsupportedParameterError: for α = 1.
    """
    stations = check_stations(stations, domain)
    spec = alpha_fair_spec(stations, params, alpha, total_users)
    return solve_multiplicative(domain, density, stations, spec, cfg, total_users)
