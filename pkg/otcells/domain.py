"Network regions, their midpoint quadrature grids, and user-density fields."

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from otcells.errors import DomainError

DEFAULT_RESOLUTION_1D = 100_000
DEFAULT_RESOLUTION_2D = 512

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Domain:
    """An interval `[a, b]` or an axis-aligned rectangle `[a, b] × [c, d]`
    (km), split into a regular grid of quadrature cells.

    Cells are numbered in row-major order over the `(nx, ny)` grid, i.e.
    the `x` index varies slowest. Every quantity the solvers need is
    evaluated at cell centers (midpoint rule).

    Attributes:
        bounds (tuple[float, ...]): `(a, b)` or `(a, b, c, d)`.
        resolution (tuple[int, ...]): Number of cells per axis.
    """

    bounds: tuple
    resolution: tuple

    def __post_init__(self):
        bounds = tuple(float(v) for v in self.bounds)
        resolution = tuple(int(v) for v in np.atleast_1d(self.resolution))
        if len(bounds) not in (2, 4):
            raise DomainError(
                f"a domain needs 2 (interval) or 4 (rectangle) bounds, got {len(bounds)}"
            )
        ndim = len(bounds) // 2
        if len(resolution) == 1 and ndim == 2:
            resolution = resolution * 2
        if len(resolution) != ndim:
            raise DomainError(
                f"expected {ndim} resolution value(s), got {len(resolution)}"
            )
        for axis in range(ndim):
            lo, hi = bounds[2 * axis], bounds[2 * axis + 1]
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise DomainError(f"empty or invalid extent [{lo}, {hi}] on axis {axis}")
            if resolution[axis] < 2:
                raise DomainError(
                    f"resolution must be at least 2 per axis, got {resolution[axis]}"
                )
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "resolution", resolution)

    @classmethod
    def interval(cls, a, b, resolution=DEFAULT_RESOLUTION_1D):
        return cls((a, b), (resolution,))

    @classmethod
    def rectangle(cls, a, b, c, d, resolution=DEFAULT_RESOLUTION_2D):
        return cls((a, b, c, d), resolution)

    @property
    def ndim(self):
        return len(self.resolution)

    @property
    def shape(self):
        return self.resolution

    @property
    def n_cells(self):
        return int(np.prod(self.resolution))

    def extent(self, axis):
        return self.bounds[2 * axis], self.bounds[2 * axis + 1]

    @property
    def spacing(self):
        return tuple(
            (self.extent(axis)[1] - self.extent(axis)[0]) / self.resolution[axis]
            for axis in range(self.ndim)
        )

    @property
    def measure(self):
        return float(
            np.prod([hi - lo for lo, hi in map(self.extent, range(self.ndim))])
        )

    @property
    def cell_measure(self):
        return float(np.prod(self.spacing))

    def edges(self, axis=0):
        lo, hi = self.extent(axis)
        return np.linspace(lo, hi, self.resolution[axis] + 1)

    def axis_centers(self, axis=0):
        e = self.edges(axis)
        return 0.5 * (e[:-1] + e[1:])

    @cached_property
    def coordinates(self):
        """Cell-center coordinates as a tuple of flat read-only arrays, one
        per axis, in cell order."""
        if self.ndim == 1:
            coords = (self.axis_centers(0),)
        else:
            xs, ys = np.meshgrid(
                self.axis_centers(0), self.axis_centers(1), indexing="ij"
            )
            coords = (xs.ravel(), ys.ravel())
        for c in coords:
            c.setflags(write=False)
        return coords

    @property
    def centers(self):
        "Cell centers as an `(n_cells, ndim)` array."
        return np.column_stack(self.coordinates)

    def contains(self, point, slack=1e-12):
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.ndim,):
            return False
        for axis in range(self.ndim):
            lo, hi = self.extent(axis)
            pad = slack * (hi - lo)
            if not lo - pad <= point[axis] <= hi + pad:
                return False
        return True

    def corners(self):
        if self.ndim == 1:
            return np.array([[self.bounds[0]], [self.bounds[1]]])
        a, b, c, d = self.bounds
        return np.array([[a, c], [a, d], [b, c], [b, d]])


@dataclass(frozen=True)
class Region:
    """A sub-interval / sub-rectangle of a domain, or an explicit set of
    cell indices. A cell belongs to a box region iff its center does, with
    boxes taken half-open (`lo <= x < hi`) so that adjacent boxes share no
    cells."""

    bounds: tuple = None
    cells: tuple = None

    def __post_init__(self):
        if (self.bounds is None) == (self.cells is None):
            raise DomainError("a region needs exactly one of `bounds` or `cells`")
        if self.bounds is not None:
            object.__setattr__(self, "bounds", tuple(float(v) for v in self.bounds))
        else:
            object.__setattr__(self, "cells", tuple(int(i) for i in self.cells))

    @classmethod
    def box(cls, *bounds):
        return cls(bounds=bounds)

    @classmethod
    def of_cells(cls, cells):
        return cls(cells=tuple(np.asarray(cells, dtype=int).ravel()))

    def mask(self, domain):
        "Boolean array over `domain`'s cells."
        if self.cells is not None:
            idx = np.asarray(self.cells, dtype=int)
            if idx.size and (idx.min() < 0 or idx.max() >= domain.n_cells):
                raise DomainError("region cell indices fall outside the domain")
            m = np.zeros(domain.n_cells, dtype=bool)
            m[idx] = True
            return m
        if len(self.bounds) != 2 * domain.ndim:
            raise DomainError(
                f"a {domain.ndim}D domain needs {2 * domain.ndim} region bounds"
            )
        m = np.ones(domain.n_cells, dtype=bool)
        for axis, coords in enumerate(domain.coordinates):
            lo, hi = self.bounds[2 * axis], self.bounds[2 * axis + 1]
            dlo, dhi = domain.extent(axis)
            pad = 1e-12 * (dhi - dlo)
            if hi < lo or lo < dlo - pad or hi > dhi + pad:
                raise DomainError(
                    f"region [{lo}, {hi}] is not contained in [{dlo}, {dhi}] on axis {axis}"
                )
            # The upper domain edge is closed.
            upper = coords <= hi if hi >= dhi else coords < hi
            m &= (coords >= lo) & upper
        return m


@dataclass(frozen=True)
class DensityField:
    """A nonnegative user density sampled at the cell centers of `domain`,
    normalized to unit mass.

    Attributes:
        domain (Domain): The grid the weights live on.
        weights (numpy.ndarray): One value per cell (users per unit measure,
            as a proportion of all users).
    """

    domain: Domain
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.shape != (self.domain.n_cells,):
            raise DomainError(
                f"expected {self.domain.n_cells} weights, got {w.size}"
            )
        if not np.all(np.isfinite(w)):
            raise DomainError("density weights must be finite")
        if np.any(w < 0):
            raise DomainError("density weights must be nonnegative")
        total = float(np.sum(w)) * self.domain.cell_measure
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(
                f"density is not normalized (total mass {total!r}); "
                "build it through `DensityField.from_values`"
            )
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_values(cls, domain, values):
        "Normalize any nonnegative per-cell array into a density field."
        v = np.array(values, dtype=float).ravel()
        if v.shape != (domain.n_cells,):
            raise DomainError(f"expected {domain.n_cells} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError("density values must be finite")
        if np.any(v < 0):
            raise DomainError("density values must be nonnegative")
        total = float(np.sum(v)) * domain.cell_measure
        if total <= 0:
            raise DomainError("density has zero total mass")
        return cls(domain, v / total)

    @property
    def cell_masses(self):
        "Mass carried by each cell."
        return self.weights * self.domain.cell_measure

    def total_mass(self):
        return float(np.sum(self.cell_masses))

    def cdf(self, t):
        """Mass to the left of `t` (1D only), exact for the piecewise-constant
        grid density."""
        if self.domain.ndim != 1:
            raise DomainError("cumulative mass is only defined on 1D domains")
        cum = np.concatenate(([0.0], np.cumsum(self.cell_masses)))
        return np.interp(t, self.domain.edges(0), cum)

    def value_at(self, t):
        "Density value of the cell containing `t` (1D only)."
        if self.domain.ndim != 1:
            raise DomainError("point lookup is only defined on 1D domains")
        idx = np.searchsorted(self.domain.edges(0), t, side="right") - 1
        idx = np.clip(idx, 0, self.domain.n_cells - 1)
        return self.weights[idx]


def build_uniform_density(domain):
    return DensityField.from_values(domain, np.ones(domain.n_cells))


def build_piecewise_density(domain, pieces):
    """Build a step density from `(region, level)` pairs. The regions must
    cover every cell exactly once and every level must be positive."""
    pieces = list(pieces)
    if not pieces:
        raise DomainError("a piecewise density needs at least one piece")
    coverage = np.zeros(domain.n_cells, dtype=int)
    values = np.zeros(domain.n_cells)
    for region, level in pieces:
        if not level > 0:
            raise DomainError(f"piece levels must be positive, got {level}")
        m = region.mask(domain)
        coverage += m
        values[m] = level
    if np.any(coverage == 0):
        raise DomainError(
            f"pieces leave {int(np.sum(coverage == 0))} cell(s) uncovered"
        )
    if np.any(coverage > 1):
        raise DomainError(f"pieces overlap on {int(np.sum(coverage > 1))} cell(s)")
    return DensityField.from_values(domain, values)


def build_radial_density(domain, radius):
    """Density ∝ R_D² − |x|², heaviest at the origin. `radius` must reach
    every corner of the domain so the density stays nonnegative."""
    r2 = float(radius) ** 2
    if np.max(np.sum(domain.corners() ** 2, axis=1)) > r2 * (1 + 1e-12):
        raise DomainError(
            f"radius {radius} does not cover the domain; the density would be negative"
        )
    values = r2 - sum(c**2 for c in domain.coordinates)
    return DensityField.from_values(domain, np.maximum(values, 0.0))


def build_linear_density(domain, slope, intercept):
    "Density ∝ intercept + slope·x along the first axis."
    values = intercept + slope * domain.coordinates[0]
    lo, hi = domain.extent(0)
    if min(intercept + slope * lo, intercept + slope * hi) < -1e-12 * max(
        abs(intercept), abs(slope), 1.0
    ):
        raise DomainError(
            f"linear density {intercept} + {slope}·x is negative on [{lo}, {hi}]"
        )
    return DensityField.from_values(domain, np.maximum(values, 0.0))


def mass(density, region):
    "Proportion of users in `region`; multiply by the user count to get N(A)."
    return float(np.sum(density.cell_masses[region.mask(density.domain)]))


def integrate(density, integrand):
    """Midpoint-rule integral of `integrand` against the density.

    `integrand` is called once with the cell-center coordinate arrays
    (`f(x)` or `f(x, y)`) and must return one finite value per cell.
    """
    values = np.broadcast_to(
        np.asarray(integrand(*density.domain.coordinates), dtype=float),
        (density.domain.n_cells,),
    )
    if not np.all(np.isfinite(values)):
        raise DomainError("integrand is not finite on every cell center")
    return float(np.sum(values * density.cell_masses))


CSV_FORMAT = "%.17g"


def write_density_csv(density, path):
    "Write `x[,y],weight` rows in cell order."
    names = ["x", "y"][: density.domain.ndim] + ["weight"]
    table = np.column_stack(density.domain.coordinates + (density.weights,))
    np.savetxt(
        path, table, delimiter=",", header=",".join(names), comments="", fmt=CSV_FORMAT
    )


def read_density_csv(path, domain=None):
    """Read a density grid written as `x[,y],weight` rows. Without a
    `domain`, the grid is inferred from the (regularly spaced) centers."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
    if header not in (["x", "weight"], ["x", "y", "weight"]):
        raise DomainError(f"{path}: expected a header `x[,y],weight`, got {header}")
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ndim = len(header) - 1
    if domain is None:
        domain = _infer_domain(table[:, :ndim], path)
    if domain.ndim != ndim or table.shape[0] != domain.n_cells:
        raise DomainError(f"{path}: grid does not match the domain")
    scale = max(domain.spacing)
    if not np.allclose(table[:, :ndim], domain.centers, rtol=0, atol=1e-6 * scale):
        raise DomainError(f"{path}: cell centers do not match the domain grid")
    return DensityField.from_values(domain, table[:, ndim])


def _infer_domain(points, path):
    bounds, resolution = [], []
    for axis in range(points.shape[1]):
        centers = np.unique(points[:, axis])
        if centers.size < 2:
            raise DomainError(f"{path}: need at least 2 cells per axis")
        h = float(np.mean(np.diff(centers)))
        if not np.allclose(np.diff(centers), h, rtol=1e-6):
            raise DomainError(f"{path}: cell centers are not regularly spaced")
        bounds += [centers[0] - h / 2, centers[-1] + h / 2]
        resolution.append(centers.size)
    return Domain(tuple(bounds), tuple(resolution))
