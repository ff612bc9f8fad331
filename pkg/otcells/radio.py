"""Physical-layer formulas: path-loss gain, SNR, Shannon throughput and the
round-robin power requirement.

Interference is ignored (neighbouring stations use orthogonal bands), so
every quantity here depends on one station and one location only.
"""

from dataclasses import dataclass

import numpy as np

from otcells.errors import PowerOverflowError, StationError

DEFAULT_TOTAL_USERS = 2500
# Largest Nᵢθ̄ (bits per channel use) `required_power_round_robin` accepts.
MAX_EXPONENT_BITS = 1000.0


@dataclass(frozen=True)
class RadioParams:
    """
    Attributes:
        sigma2 (float): Noise power σ² (W).
        xi (float): Path-loss exponent ξ.
        height (float): Antenna height R (km).
        theta_bar (float): Target average throughput θ̄, in bits per channel use.
    """

    sigma2: float = 1.0
    xi: float = 2.0
    height: float = 1.0
    theta_bar: float = 1.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise StationError(f"noise power must be positive, got {self.sigma2}")
        if not self.xi > 0:
            raise StationError(f"path-loss exponent must be positive, got {self.xi}")
        if not self.height >= 0:
            raise StationError(f"antenna height must be nonnegative, got {self.height}")
        if not self.theta_bar > 0:
            raise StationError(f"target throughput must be positive, got {self.theta_bar}")

    @classmethod
    def from_sigma(cls, sigma, **kwargs):
        return cls(sigma2=float(sigma) ** 2, **kwargs)


@dataclass(frozen=True)
class Station:
    """A base station.

    Attributes:
        index (int): Station id, also the tie-break order.
        position (tuple[float, ...]): Location (km), one coordinate per axis.
        tx_power (Optional[float]): Constant power Pᵢ under the rate-fair policy (W).
        max_carriers (Optional[int]): Carrier capacity MAXᵢ.
        kappa_bar (Optional[float]): Penalty slope κ̄ᵢ per user above capacity.
    """

    index: int
    position: tuple
    tx_power: float = None
    max_carriers: int = None
    kappa_bar: float = None

    def __post_init__(self):
        position = tuple(float(v) for v in np.atleast_1d(self.position))
        if not all(np.isfinite(position)):
            raise StationError(f"station {self.index} has a non-finite position")
        object.__setattr__(self, "position", position)
        if self.tx_power is not None and not self.tx_power > 0:
            raise StationError(
                f"station {self.index}: transmit power must be positive, got {self.tx_power}"
            )
        if self.max_carriers is not None and not self.max_carriers >= 1:
            raise StationError(
                f"station {self.index}: max_carriers must be at least 1, got {self.max_carriers}"
            )
        if self.kappa_bar is not None and not self.kappa_bar >= 0:
            raise StationError(
                f"station {self.index}: kappa_bar must be nonnegative, got {self.kappa_bar}"
            )


def check_stations(stations, domain=None):
    """Validate a station list: nonempty, distinct positions, matching
    dimension and (if given) located in the domain."""
    stations = list(stations)
    if not stations:
        raise StationError("at least one station is required")
    seen = {}
    for s in stations:
        if domain is not None:
            if len(s.position) != domain.ndim:
                raise StationError(
                    f"station {s.index} has a {len(s.position)}D position in a {domain.ndim}D domain"
                )
            if not domain.contains(s.position):
                raise StationError(f"station {s.index} lies outside the domain")
        if s.position in seen:
            raise StationError(
                f"stations {seen[s.position]} and {s.index} share position {s.position}"
            )
        seen[s.position] = s.index
    return stations


def distance(station, point):
    """Euclidean distance from `station` to `point` (km). `point` may be a
    single location or an `(n, ndim)` array of locations; in 1D plain
    scalars and flat arrays work too."""
    pos = np.asarray(station.position, dtype=float)
    p = np.asarray(point, dtype=float)
    if pos.size == 1 and (p.ndim == 0 or p.shape[-1] != 1):
        return np.abs(p - pos[0])
    return np.sqrt(np.sum((p - pos) ** 2, axis=-1))


def station_distances(domain, stations):
    "`(K, n_cells)` array of distances from every station to every cell center."
    coords = domain.coordinates
    out = np.empty((len(stations), domain.n_cells))
    for k, s in enumerate(stations):
        out[k] = np.sqrt(sum((c - x) ** 2 for c, x in zip(coords, s.position)))
    return out


def path_loss(params, d):
    "Inverse channel gain scaled by the noise, σ²(R² + d²)^(ξ/2)."
    return params.sigma2 * (params.height**2 + np.asarray(d, dtype=float) ** 2) ** (
        params.xi / 2
    )


def channel_gain(params, station, point):
    "hᵢ = (R² + dᵢ²)^(−ξ/2)."
    d = distance(station, point)
    return (params.height**2 + d**2) ** (-params.xi / 2)


def snr(params, power, gain):
    if np.any(np.asarray(power) < 0):
        raise StationError("transmit power must be nonnegative")
    return np.asarray(power, dtype=float) * gain / params.sigma2


def throughput(snr_value, base=2):
    """Shannon rate log(1 + snr). Base 2 (bits) by default, which makes
    `required_power_round_robin` its exact inverse."""
    snr_value = np.asarray(snr_value, dtype=float)
    if np.any(snr_value < 0):
        raise StationError("SNR must be nonnegative")
    return np.log1p(snr_value) / np.log(base)


def required_power_round_robin(
    params, station, point, n_i, total_users=DEFAULT_TOTAL_USERS
):
    """Per-user power that meets θ̄ when the station time-shares among its
    `n_i · total_users` users: σ²(2^(Nᵢθ̄) − 1)(R² + dᵢ²)^(ξ/2).

    Raises:
        PowerOverflowError: if Nᵢθ̄ exceeds `MAX_EXPONENT_BITS`.
    """
    if np.any(np.asarray(n_i) < 0):
        raise StationError("cell mass must be nonnegative")
    bits = np.asarray(n_i, dtype=float) * total_users * params.theta_bar
    check_exponent(bits, station.index)
    return np.expm1(bits * np.log(2)) * path_loss(params, distance(station, point))


def check_exponent(bits, station_index=None):
    worst = float(np.max(bits)) if np.size(bits) else 0.0
    if worst > MAX_EXPONENT_BITS:
        raise PowerOverflowError(
            f"station {station_index}: Nᵢθ̄ = {worst:g} bits exceeds the "
            f"{MAX_EXPONENT_BITS:g}-bit guard; 2^(Nᵢθ̄) would overflow",
            station=station_index,
            exponent=worst,
        )
