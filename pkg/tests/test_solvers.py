import json

import numpy as np
import pytest

from otcells.congestion import (
    CongestionSpec,
    Constant,
    Linear,
    PowerLawCost,
    ShannonFactor,
    Step,
    Zero,
)
from otcells.domain import Domain, build_linear_density, build_uniform_density
from otcells.errors import ConvergenceWarning, DomainError, UnsupportedParameterError
from otcells.radio import Station, station_distances
from otcells.solvers import (
    Partition,
    SolverConfig,
    _polish,
    intracell_costs,
    rule_violation,
    solve_additive,
    solve_multiplicative,
    total_cost,
    voronoi_partition,
)


def segment(resolution=1000):
    domain = Domain.interval(0.0, 1.0, resolution)
    return domain, build_uniform_density(domain)


def two_stations(a=0.2, b=0.8):
    return [Station(1, (a,)), Station(2, (b,))]


def linear_spec(c1=1.0, c2=3.0):
    return CongestionSpec.additive(PowerLawCost(1.0), [Linear(c1), Linear(c2)])


def test_voronoi_partition():
    domain, density = segment()
    p = voronoi_partition(domain, density, two_stations(0.1, 0.5))
    assert p.thresholds() == pytest.approx([0.3])
    assert p.masses == pytest.approx([0.3, 0.7])
    assert p.user_counts == pytest.approx([750, 1750])


def test_partition_helpers(tmp_path):
    domain, density = segment(10)
    stations = two_stations()
    p = Partition.from_assignment(density, stations, [0] * 4 + [1] * 6, total_users=100)
    assert p.n_stations == 2
    assert list(p.cells_of(0)) == [0, 1, 2, 3]
    assert p.cell_areas() == pytest.approx([0.4, 0.6])
    assert list(p.station_indices[3:5]) == [1, 2]
    assert p.user_counts == pytest.approx([40, 60])
    assert p.same_cells(Partition.from_assignment(density, stations, p.assignment))

    path = tmp_path / "cells.csv"
    p.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "cell_index,x,station_index"
    assert lines[1] == "0,0.050000000000000003,1"
    assert len(lines) == 11

    with pytest.raises(DomainError):
        Partition.from_assignment(density, stations, [0] * 9)
    with pytest.raises(DomainError):
        Partition.from_assignment(density, stations, [2] * 10)


def test_thresholds_follow_station_order():
    domain, density = segment(10)
    stations = [Station(1, (0.9,)), Station(2, (0.1,)), Station(3, (0.5,))]
    p = Partition.from_assignment(density, stations, [1] * 3 + [2] * 2 + [0] * 5)
    assert p.thresholds() == pytest.approx([0.3, 0.5])
    # An empty cell gives a repeated threshold.
    p = Partition.from_assignment(density, stations, [1] * 3 + [0] * 7)
    assert p.thresholds() == pytest.approx([0.3, 0.3])
    with pytest.raises(DomainError):
        Partition.from_assignment(density, stations, [0, 1] * 5).thresholds()


def test_zero_congestion_is_voronoi():
    domain, density = segment()
    stations = two_stations(0.1, 0.5)
    spec = CongestionSpec.additive(PowerLawCost(2.0), [Zero(), Zero()])
    p, report = solve_additive(domain, density, stations, spec)
    assert p.same_cells(voronoi_partition(domain, density, stations))
    assert report.converged
    assert report.iterations <= 2
    assert report.polish_moves == 0


def test_unit_multiplier_is_voronoi():
    domain = Domain.rectangle(-1, 1, -1, 1, 32)
    density = build_uniform_density(domain)
    stations = [Station(i, p) for i, p in enumerate([(-0.5, -0.5), (0.5, 0.2), (0.0, 0.6)], 1)]
    spec = CongestionSpec.multiplicative(PowerLawCost(1.0), [Constant(1.0)] * 3)
    p, report = solve_multiplicative(domain, density, stations, spec)
    assert p.same_cells(voronoi_partition(domain, density, stations))
    assert report.iterations <= 2


def test_symmetric_square():
    domain = Domain.rectangle(-1, 1, -1, 1, 16)
    density = build_uniform_density(domain)
    corners = [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]
    stations = [Station(i, c) for i, c in enumerate(corners, 1)]
    spec = CongestionSpec.additive(PowerLawCost(1.0), [Linear(1.0)] * 4)
    p, report = solve_additive(domain, density, stations, spec)
    assert report.converged
    assert p.masses == pytest.approx([0.25] * 4, abs=1e-12)


def test_linear_congestion_moves_the_boundary():
    domain, density = segment()
    p, report = solve_additive(domain, density, two_stations(), linear_spec())
    # (t − 0.2) + 2t = (0.8 − t) + 6(1 − t)
    assert p.thresholds()[0] == pytest.approx(0.7, abs=2 * domain.cell_measure)
    assert sum(report.masses) == pytest.approx(1.0, abs=1e-9)
    assert report.masses == pytest.approx(list(p.masses))
    assert report.total_cost == pytest.approx(sum(report.intracell_costs))
    assert report.total_cost == pytest.approx(
        total_cost(p, domain, density, two_stations(), linear_spec())
    )
    assert np.allclose(intracell_costs(p, density, linear_spec()), report.intracell_costs)


def test_solution_satisfies_the_rule():
    domain, density = segment()
    spec = linear_spec()
    p, _ = solve_additive(domain, density, two_stations(), spec)
    # Only cells next to the boundary may prefer the other station, and
    # only by about one cell's worth of mass.
    violation = rule_violation(p, density, spec)
    assert np.count_nonzero(violation > 1e-12) <= 4
    assert np.max(violation) < 10 * domain.cell_measure


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_deterministic(seed):
    rng = np.random.default_rng(seed)
    domain = Domain.interval(0.0, 1.0, 500)
    density = build_linear_density(domain, rng.uniform(-1, 1), 1.0)
    a, b = sorted(rng.uniform(0, 1, 2))
    spec = linear_spec(*rng.uniform(0.1, 2.0, 2))
    first = solve_additive(domain, density, two_stations(a, b), spec)
    second = solve_additive(domain, density, two_stations(a, b), spec)
    assert first[0].same_cells(second[0])
    assert first[1].total_cost == second[1].total_cost
    assert first[1].iterations == second[1].iterations


def test_convergence_warning():
    domain, density = segment(200)
    with pytest.warns(ConvergenceWarning):
        p, report = solve_additive(
            domain, density, two_stations(), linear_spec(), SolverConfig(max_iter=1)
        )
    assert not report.converged
    assert report.iterations == 1
    # The partition returned is still a complete, polished one.
    assert p.masses.sum() == pytest.approx(1.0)


def test_trace_and_report(tmp_path):
    domain, density = segment(200)
    _, report = solve_additive(domain, density, two_stations(), linear_spec())
    assert len(report.trace) == report.iterations
    assert report.trace[-1].residual == report.residual
    assert all(0 < it.damping <= 0.5 for it in report.trace)
    data = report.to_dict()
    assert set(data) == {
        "iterations",
        "residual",
        "converged",
        "total_cost",
        "masses",
        "intracell_costs",
    }
    path = tmp_path / "report.json"
    report.write_json(path)
    assert json.loads(path.read_text()) == json.loads(report.to_json())


def test_no_polish():
    domain, density = segment(200)
    _, report = solve_additive(
        domain, density, two_stations(), linear_spec(), SolverConfig(polish=False)
    )
    assert report.polish_moves == 0


def test_bad_inputs():
    domain, density = segment(20)
    with pytest.raises(UnsupportedParameterError):
        solve_multiplicative(domain, density, two_stations(), linear_spec())
    with pytest.raises(UnsupportedParameterError):
        solve_additive(domain, density, [Station(1, (0.5,))], linear_spec())
    with pytest.raises(DomainError):
        solve_additive(Domain.interval(0.0, 2.0, 20), density, two_stations(), linear_spec())
    for bad in (
        dict(tol=0.0),
        dict(damping=1.5),
        dict(max_iter=0),
        dict(tie_break="random"),
        dict(brute_force_limit=-1),
    ):
        with pytest.raises(UnsupportedParameterError):
            SolverConfig(**bad)


def test_mass_is_conserved_at_every_iteration():
    domain = Domain.interval(0.0, 1.0, 1000)
    density = build_linear_density(domain, 2.0, 0.0)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    spec = CongestionSpec.multiplicative(
        PowerLawCost(2.0), [ShannonFactor(2500, 0.0008, s.index) for s in stations]
    )
    for solve, s in ((solve_additive, linear_spec()), (solve_multiplicative, spec)):
        _, report = solve(domain, density, stations, s)
        assert report.trace
        for it in report.trace:
            assert abs(it.mass_sum - 1.0) <= 1e-9


def test_settled_masses_must_match_the_partition():
    domain, density = segment(100)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    # Station 2 charges 10 per user once it serves more than 30.5% of them;
    # the first-order rule can't see the jump, so the masses hover at 0.305
    # while every response is all-or-half.
    spec = CongestionSpec.additive(PowerLawCost(1.0), [Zero(), Step(0.305, 0.0, 10.0)])
    bare = SolverConfig(polish=False, brute_force_limit=0)
    with pytest.warns(ConvergenceWarning, match="settled"):
        _, report = solve_additive(domain, density, stations, spec, bare)
    assert report.residual <= bare.tol
    assert report.gap > 0.1
    assert not report.converged

    partition, report = solve_additive(domain, density, stations, spec)
    assert report.converged
    assert report.gap <= 4 * domain.cell_measure
    assert partition.masses[1] == pytest.approx(0.3)
    assert partition.thresholds()[0] == pytest.approx(0.7)


def test_polish_exchanges_cells():
    domain, density = segment(4)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    # Each station takes at most two of the four cells, so no single move helps.
    cap = Step(0.51, 0.0, 100.0)
    spec = CongestionSpec.additive(PowerLawCost(1.0), [cap, cap])
    base = spec.base_matrix(station_distances(domain, stations))
    assignment, moves = _polish(spec, base, np.array([1, 0, 1, 0]), density.cell_masses, 100)
    assert list(assignment) == [0, 0, 1, 1]
    assert moves == 1


def test_small_instances_try_the_oracle():
    domain, density = segment(12)
    _, report = solve_additive(domain, density, two_stations(), linear_spec())
    assert report.source in ("fixed-point", "threshold-scan", "exhaustive")
    _, bare = solve_additive(
        domain, density, two_stations(), linear_spec(), SolverConfig(brute_force_limit=0)
    )
    assert bare.source == "fixed-point"
    assert report.total_cost <= bare.total_cost


def test_overflowing_searches_are_skipped():
    domain, density = segment(200)
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    # 750 bits at half the users, but past the overflow guard at all of them.
    spec = CongestionSpec.multiplicative(
        PowerLawCost(2.0), [ShannonFactor(2500, 0.6, s.index) for s in stations]
    )
    partition, report = solve_multiplicative(domain, density, stations, spec)
    assert report.source == "fixed-point"
    assert partition.masses == pytest.approx([0.5, 0.5])


def test_congestion_pushes_users_away():
    domain, density = segment(400)
    stations = two_stations(0.3, 0.7)
    shares = []
    for c in (0.0, 0.1, 1.0, 10.0):
        spec = CongestionSpec.additive(PowerLawCost(2.0), [Linear(c), Zero()])
        partition, _ = solve_additive(domain, density, stations, spec)
        shares.append(partition.masses[0])
    assert shares == sorted(shares, reverse=True)
    assert shares[0] == pytest.approx(0.5)
    # (t − 0.3)² + 20t = (0.7 − t)²
    assert shares[-1] == pytest.approx(0.4 / 20.8, abs=2 * domain.cell_measure)
