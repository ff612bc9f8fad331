"""Congestion terms and the costs they are attached to.

A `CongestionSpec` pairs a base transport cost F (a function of the
distance to each station) with one congestion term per station, either
added to F (`sᵢ`) or multiplying it (`mᵢ`). Terms take cell masses (user
proportions) and know their own derivative with respect to that mass.
"""

from dataclasses import dataclass

import numpy as np

from otcells.errors import UnsupportedParameterError
from otcells.radio import check_exponent, path_loss

ADDITIVE = "additive"
MULTIPLICATIVE = "multiplicative"


class Congestion:
    "Base class for congestion terms. Subclasses are vectorized over masses."

    def value(self, n):
        raise NotImplementedError

    def derivative(self, n):
        raise NotImplementedError

    def describe(self):
        "A scenario-style list form, e.g. `['linear', 0.5]`."
        raise NotImplementedError

    def __repr__(self):
        return "{}({})".format(
            type(self).__name__, ", ".join(map(repr, self.describe()[1:]))
        )


class Constant(Congestion):
    def __init__(self, c=0.0):
        self.c = float(c)

    def value(self, n):
        return np.full(np.shape(n), self.c)

    def derivative(self, n):
        return np.zeros(np.shape(n))

    def describe(self):
        return ["constant", self.c]


def Zero():
    return Constant(0.0)


class Linear(Congestion):
    "c·N."

    def __init__(self, c):
        self.c = float(c)

    def value(self, n):
        return self.c * np.asarray(n, dtype=float)

    def derivative(self, n):
        return np.full(np.shape(n), self.c)

    def describe(self):
        return ["linear", self.c]


class Polynomial(Congestion):
    "c₀ + c₁N + c₂N² + …"

    def __init__(self, *coefficients):
        if not coefficients:
            raise UnsupportedParameterError("a polynomial needs at least one coefficient")
        self.coefficients = tuple(float(c) for c in coefficients)

    def value(self, n):
        return np.polynomial.polynomial.polyval(np.asarray(n, dtype=float), self.coefficients)

    def derivative(self, n):
        d = np.polynomial.polynomial.polyder(self.coefficients)
        return np.polynomial.polynomial.polyval(np.asarray(n, dtype=float), d) + np.zeros(
            np.shape(n)
        )

    def describe(self):
        return ["polynomial", *self.coefficients]


class Step(Congestion):
    """`low` up to and including `threshold`, `high` above it. The derivative
    is taken as zero everywhere; only the brute-force oracle sees the jump."""

    def __init__(self, threshold, low, high):
        self.threshold, self.low, self.high = float(threshold), float(low), float(high)

    def value(self, n):
        return np.where(np.asarray(n) <= self.threshold, self.low, self.high) + 0.0

    def derivative(self, n):
        return np.zeros(np.shape(n))

    def describe(self):
        return ["step", self.threshold, self.low, self.high]


class Penalty(Congestion):
    """Carrier-capacity penalty κᵢ: zero up to `max_carriers` users and
    `kappa_bar` per user beyond.

    The kink is not differentiable. The right derivative is used, except
    within `kink_tol · total_users` users of the kink where the two
    one-sided derivatives are averaged.
    """

    def __init__(self, max_carriers, kappa_bar, total_users, kink_tol=1e-8):
        self.max_carriers = float(max_carriers)
        self.kappa_bar = float(kappa_bar)
        self.total_users = float(total_users)
        self.kink_tol = float(kink_tol)

    def value(self, n):
        users = np.asarray(n, dtype=float) * self.total_users
        return self.kappa_bar * np.maximum(users - self.max_carriers, 0.0)

    def derivative(self, n):
        users = np.asarray(n, dtype=float) * self.total_users
        slope = self.kappa_bar * self.total_users
        d = np.where(users >= self.max_carriers, slope, 0.0)
        near = np.abs(users - self.max_carriers) <= self.kink_tol * self.total_users
        return np.where(near, slope / 2, d)

    def describe(self):
        return ["penalty", self.max_carriers, self.kappa_bar, self.total_users]


class ShannonFactor(Congestion):
    """Round-robin time-sharing factor 2^(N·T·θ̄) − 1 for a cell holding
    the proportion N of T users."""

    def __init__(self, total_users, theta_bar, station=None):
        self.total_users = float(total_users)
        self.theta_bar = float(theta_bar)
        self.station = station

    def _bits(self, n):
        bits = np.asarray(n, dtype=float) * self.total_users * self.theta_bar
        check_exponent(bits, self.station)
        return bits

    def value(self, n):
        return np.expm1(self._bits(n) * np.log(2))

    def derivative(self, n):
        rate = self.total_users * self.theta_bar * np.log(2)
        return rate * np.exp(self._bits(n) * np.log(2))

    def describe(self):
        return ["shannon", self.total_users, self.theta_bar]


class PowerOf(Congestion):
    "`inner(N) ** exponent`, as used by the α-fair objective."

    def __init__(self, inner, exponent):
        self.inner = inner
        self.exponent = float(exponent)

    def value(self, n):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.power(self.inner.value(n), self.exponent)

    def derivative(self, n):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return (
                self.exponent
                * np.power(self.inner.value(n), self.exponent - 1)
                * self.inner.derivative(n)
            )

    def describe(self):
        return ["power", self.exponent, *self.inner.describe()]


TERMS = {
    "constant": Constant,
    "linear": Linear,
    "polynomial": Polynomial,
    "step": Step,
}


def term_from_description(description, station=None, total_users=None):
    """Build a term from its scenario list form. `['penalty']` takes its
    parameters from `station`."""
    name, *args = description
    if name == "penalty":
        if station is None or station.max_carriers is None or station.kappa_bar is None:
            raise UnsupportedParameterError(
                "a penalty term needs a station with max_carriers and kappa_bar"
            )
        return Penalty(station.max_carriers, station.kappa_bar, total_users)
    if name not in TERMS:
        raise UnsupportedParameterError(
            f"unknown congestion term {name!r} (expected one of: "
            + ", ".join(sorted([*TERMS, "penalty"]))
            + ")"
        )
    return TERMS[name](*args)


class PowerLawCost:
    "F(d) = dᵖ."

    def __init__(self, p=1.0):
        self.p = float(p)

    def __call__(self, d):
        return np.power(np.asarray(d, dtype=float), self.p)

    def __repr__(self):
        return f"PowerLawCost({self.p!r})"


class PathLossCost:
    "F(d) = σ²(R² + d²)^(ξ/2), the power needed per unit SNR at distance d."

    def __init__(self, params):
        self.params = params

    def __call__(self, d):
        return path_loss(self.params, d)

    def __repr__(self):
        return f"PathLossCost({self.params!r})"


class AlphaFairCost:
    "F(d) = (σ²(R² + d²)^(ξ/2))^(α−1) / (α − 1)."

    def __init__(self, params, alpha):
        if alpha == 1:
            raise UnsupportedParameterError(
                "alpha = 1 (proportional fairness) has no usable form here; "
                "use a value on either side of 1"
            )
        self.params = params
        self.alpha = float(alpha)

    def __call__(self, d):
        return (1.0 / (self.alpha - 1)) * np.power(
            path_loss(self.params, d), self.alpha - 1
        )

    def __repr__(self):
        return f"AlphaFairCost({self.params!r}, {self.alpha!r})"


@dataclass(frozen=True)
class CongestionSpec:
    """A base cost plus one congestion term per station.

    Attributes:
        kind (str): `"additive"` (F + sᵢ) or `"multiplicative"` (mᵢ·F).
        base (callable | list[callable]): F, shared or one per station.
        terms (tuple[Congestion, ...]): sᵢ or mᵢ, in station order.
    """

    kind: str
    base: object
    terms: tuple

    def __post_init__(self):
        if self.kind not in (ADDITIVE, MULTIPLICATIVE):
            raise UnsupportedParameterError(
                f"congestion kind must be {ADDITIVE!r} or {MULTIPLICATIVE!r}, got {self.kind!r}"
            )
        object.__setattr__(self, "terms", tuple(self.terms))
        if isinstance(self.base, (list, tuple)):
            object.__setattr__(self, "base", tuple(self.base))
            if len(self.base) != len(self.terms):
                raise UnsupportedParameterError("need one base cost per congestion term")

    @classmethod
    def additive(cls, base, terms):
        return cls(ADDITIVE, base, terms)

    @classmethod
    def multiplicative(cls, base, terms):
        return cls(MULTIPLICATIVE, base, terms)

    @property
    def n_stations(self):
        return len(self.terms)

    def base_for(self, k):
        return self.base[k] if isinstance(self.base, tuple) else self.base

    def base_matrix(self, distances):
        "F evaluated on a `(K, n_cells)` distance array."
        return np.vstack(
            [self.base_for(k)(distances[k]) for k in range(self.n_stations)]
        )

    def rule_offsets(self, masses, integrals):
        """Per-station `(scale, offset)` of the optimality rule: a cell goes
        to argminₖ scaleₖ·F(dₖ) + offsetₖ.

        Additive: scale 1, offset sₖ(Nₖ) + Nₖ·sₖ′(Nₖ).
        Multiplicative: scale mₖ(Nₖ), offset mₖ′(Nₖ)·∫_{Cₖ} F(dₖ)λ.
        """
        scale = np.ones(self.n_stations)
        offset = np.zeros(self.n_stations)
        with np.errstate(invalid="ignore", over="ignore"):
            for k, term in enumerate(self.terms):
                n = masses[k]
                if self.kind == ADDITIVE:
                    offset[k] = float(term.value(n)) + n * float(term.derivative(n))
                else:
                    scale[k] = float(term.value(n))
                    offset[k] = float(term.derivative(n)) * integrals[k]
        # Undefined values (e.g. 0·∞ at an empty cell) never win the argmin.
        return np.nan_to_num(scale, nan=np.inf), np.nan_to_num(offset, nan=np.inf)

    def station_cost(self, k, masses, integrals):
        """Intracell cost of station `k` for (arrays of) cell masses Nₖ and
        transport integrals Sₖ = ∫_{Cₖ} F(dₖ)λ. Empty cells cost nothing."""
        masses = np.asarray(masses, dtype=float)
        integrals = np.asarray(integrals, dtype=float)
        term = self.terms[k]
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            if self.kind == ADDITIVE:
                cost = integrals + masses * term.value(masses)
            else:
                cost = term.value(masses) * integrals
        return np.where(masses > 0, cost, 0.0)
