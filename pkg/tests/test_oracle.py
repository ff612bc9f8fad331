import numpy as np
import pytest

from otcells.congestion import (
    CongestionSpec,
    Linear,
    Polynomial,
    PowerLawCost,
    ShannonFactor,
)
from otcells.domain import (
    DensityField,
    Domain,
    build_linear_density,
    build_uniform_density,
)
from otcells.errors import InstanceTooLargeError, UnsupportedParameterError
from otcells.oracle import (
    EXHAUSTIVE,
    THRESHOLD_SCAN,
    brute_force_oracle,
    feasible_modes,
    search_size,
)
from otcells.radio import Station
from otcells.solvers import (
    SolverConfig,
    solve_additive,
    solve_multiplicative,
    total_cost,
)


def additive(*c):
    return CongestionSpec.additive(PowerLawCost(1.0), [Linear(x) for x in c])


def test_threshold_scan_matches_exhaustive():
    domain = Domain.interval(0.0, 1.0, 12)
    density = build_linear_density(domain, 1.0, 0.5)
    stations = [Station(1, (0.2,)), Station(2, (0.8,))]
    spec = additive(1.0, 3.0)
    scan, scan_cost = brute_force_oracle(domain, density, stations, spec, THRESHOLD_SCAN)
    full, full_cost = brute_force_oracle(domain, density, stations, spec, EXHAUSTIVE)
    assert scan_cost == pytest.approx(full_cost, rel=1e-12)
    assert scan.same_cells(full)
    assert scan_cost == pytest.approx(total_cost(scan, domain, density, stations, spec))


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_additive_solver_matches_exhaustive(seed):
    rng = np.random.default_rng(seed)
    domain = Domain.interval(0.0, 1.0, 12)
    density = build_linear_density(domain, rng.uniform(-0.5, 0.5), 1.0)
    a, b = sorted(rng.uniform(0.0, 1.0, 2))
    stations = [Station(1, (a,)), Station(2, (b,))]
    spec = additive(*rng.uniform(0.1, 3.0, 2))
    _, report = solve_additive(domain, density, stations, spec)
    _, cost = brute_force_oracle(domain, density, stations, spec, EXHAUSTIVE)
    assert report.total_cost == pytest.approx(cost, rel=1e-9)


def test_round_robin_matches_threshold_scan():
    domain = Domain.interval(0.0, 1.0, 400)
    density = build_linear_density(domain, 2.0, 0.0)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    spec = CongestionSpec.multiplicative(
        PowerLawCost(2.0), [ShannonFactor(2500, 0.0008, s.index) for s in stations]
    )
    partition, report = solve_multiplicative(domain, density, stations, spec)
    oracle, cost = brute_force_oracle(domain, density, stations, spec)
    assert report.total_cost == pytest.approx(cost, rel=1e-6)
    assert abs(partition.thresholds()[0] - oracle.thresholds()[0]) <= 2 * domain.cell_measure


def test_three_station_scan():
    domain = Domain.interval(0.0, 1.0, 60)
    density = build_uniform_density(domain)
    stations = [Station(1, (0.9,)), Station(2, (0.1,)), Station(3, (0.5,))]
    spec = additive(1.0, 1.0, 1.0)
    partition, cost = brute_force_oracle(domain, density, stations, spec)
    # Cells follow station order along the line; the crowded middle cell
    # shrinks: (t − 0.1) + 2t = (0.5 − t) + 2(1 − 2t).
    assert partition.thresholds() == pytest.approx([0.325, 0.675], abs=2 / 60)
    _, report = solve_additive(domain, density, stations, spec)
    assert cost <= report.total_cost * (1 + 1e-12)
    assert report.total_cost == pytest.approx(cost, rel=1e-3)


def test_empty_cells_are_searched():
    domain = Domain.interval(0.0, 1.0, 10)
    density = build_uniform_density(domain)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    # Station 2 charges a flat 100 on top of the distance.
    spec = CongestionSpec.additive(
        [PowerLawCost(1.0), lambda d: 100 + d], [Linear(0.0), Linear(0.0)]
    )
    partition, _ = brute_force_oracle(domain, density, stations, spec)
    assert list(partition.masses) == pytest.approx([1.0, 0.0])


def test_oracle_limits():
    stations = [Station(i, (x,)) for i, x in enumerate([0.1, 0.3, 0.6, 0.9], 1)]
    domain = Domain.interval(0.0, 1.0, 20)
    density = build_uniform_density(domain)
    spec = additive(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(InstanceTooLargeError):
        brute_force_oracle(domain, density, stations, spec)
    with pytest.raises(InstanceTooLargeError):
        brute_force_oracle(domain, density, stations, spec, EXHAUSTIVE)
    with pytest.raises(UnsupportedParameterError):
        brute_force_oracle(domain, density, stations[:2], additive(1.0, 1.0), "guess")

    square = Domain.rectangle(0, 1, 0, 1, 4)
    with pytest.raises(InstanceTooLargeError):
        brute_force_oracle(
            square,
            build_uniform_density(square),
            [Station(1, (0.2, 0.2)), Station(2, (0.8, 0.8))],
            additive(1.0, 1.0),
        )


def test_exhaustive_in_2d():
    square = Domain.rectangle(0, 1, 0, 1, 3)
    density = build_uniform_density(square)
    stations = [Station(1, (0.0, 0.0)), Station(2, (1.0, 1.0))]
    spec = additive(0.5, 0.5)
    _, report = solve_additive(square, density, stations, spec)
    _, cost = brute_force_oracle(square, density, stations, spec, EXHAUSTIVE)
    assert report.total_cost == pytest.approx(cost, rel=1e-9)


def test_feasible_modes():
    line = Domain.interval(0.0, 1.0, 14)
    assert feasible_modes(line, 2) == [THRESHOLD_SCAN, EXHAUSTIVE]
    assert feasible_modes(line, 3, max_candidates=3**13) == [THRESHOLD_SCAN]
    assert feasible_modes(line, 4) == []
    assert feasible_modes(Domain.interval(0.0, 1.0, 10**4), 3) == [THRESHOLD_SCAN]
    assert feasible_modes(Domain.interval(0.0, 1.0, 10**4 + 1), 3) == []
    assert feasible_modes(Domain.rectangle(0, 1, 0, 1, 4), 2) == [EXHAUSTIVE]
    assert search_size(THRESHOLD_SCAN, line, 3) == 15 * 16 // 2
    assert search_size(EXHAUSTIVE, line, 3) == 3**14


def random_line_instance(rng, n_cells, n_stations):
    """Random positive density, distinct stations, a base cost per station
    and one convex polynomial congestion term per station."""
    domain = Domain.interval(0.0, 1.0, n_cells)
    density = DensityField.from_values(domain, rng.uniform(0.1, 1.0, n_cells))
    xs = rng.uniform(0.0, 1.0, n_stations)
    stations = [Station(i, (x,)) for i, x in enumerate(xs, 1)]
    bases = [PowerLawCost(p) for p in rng.choice([1.0, 2.0], n_stations)]
    terms = [Polynomial(*rng.uniform(0.1, 2.0, 3)) for _ in stations]
    if rng.random() < 0.5:
        return domain, density, stations, CongestionSpec.additive(bases, terms)
    return domain, density, stations, CongestionSpec.multiplicative(bases, terms)


def solve(domain, density, stations, spec, cfg=None):
    if spec.kind == "additive":
        return solve_additive(domain, density, stations, spec, cfg)
    return solve_multiplicative(domain, density, stations, spec, cfg)


@pytest.mark.parametrize("seed", range(50))
def test_solvers_match_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    n_stations = int(rng.integers(2, 4))
    n_cells = int(rng.integers(12, 17 if n_stations == 2 else 15))
    domain, density, stations, spec = random_line_instance(rng, n_cells, n_stations)
    _, report = solve(domain, density, stations, spec)
    _, cost = brute_force_oracle(domain, density, stations, spec, EXHAUSTIVE)
    assert report.total_cost == pytest.approx(cost, rel=1e-9)


@pytest.mark.parametrize("seed", range(50))
def test_solvers_match_threshold_scan(seed):
    rng = np.random.default_rng(1000 + seed)
    domain = Domain.interval(0.0, 1.0, 10**4)
    density = build_linear_density(domain, rng.uniform(-1.0, 1.0), 1.0)
    a, b = sorted(rng.uniform(0.0, 1.0, 2))
    stations = [Station(1, (a,)), Station(2, (b,))]
    base = PowerLawCost(rng.choice([1.0, 2.0]))
    if seed % 2:
        # Round-robin factors with a different throughput target per station.
        targets = rng.uniform(4e-4, 1.2e-3, 2)
        terms = [ShannonFactor(2500, t, s.index) for t, s in zip(targets, stations)]
        spec = CongestionSpec.multiplicative(base, terms)
    else:
        terms = [Polynomial(*rng.uniform(0.0, 2.0, 3)) for _ in stations]
        spec = CongestionSpec.additive(base, terms)
    _, report = solve(domain, density, stations, spec)
    _, cost = brute_force_oracle(domain, density, stations, spec, THRESHOLD_SCAN)
    # The scan only searches contiguous cells, so it bounds the optimum from above.
    assert report.total_cost <= cost + 1e-6 * abs(cost)


def test_oracle_restarts_never_lose():
    domain = Domain.interval(0.0, 1.0, 10**4)
    density = build_linear_density(domain, 2.0, 0.0)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    spec = CongestionSpec.multiplicative(
        PowerLawCost(2.0), [ShannonFactor(2500, 0.0008, 1), ShannonFactor(2500, 0.0016, 2)]
    )
    _, alone = solve_multiplicative(
        domain, density, stations, spec, SolverConfig(brute_force_limit=0)
    )
    partition, report = solve_multiplicative(domain, density, stations, spec)
    _, cost = brute_force_oracle(domain, density, stations, spec)
    assert alone.source == "fixed-point"
    assert report.total_cost <= alone.total_cost
    assert report.total_cost <= cost * (1 + 1e-12)
    assert report.source in ("fixed-point", THRESHOLD_SCAN)
