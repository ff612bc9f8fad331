import numpy as np
import pytest

from otcells.congestion import CongestionSpec, Linear, PowerLawCost
from otcells.domain import Domain, build_linear_density, build_uniform_density
from otcells.errors import DomainError, EquilibriumError, StationError, UnsupportedParameterError
from otcells.policies import rate_fair_spec
from otcells.radio import RadioParams, Station
from otcells.scenario import load_scenario
from otcells.solvers import voronoi_partition
from otcells.wardrop import (
    BEST,
    INDIFFERENCE_TOL,
    UNCLASSIFIED,
    WORST,
    CongestionCostModel,
    EquilibriumSolution,
    ShareRateModel,
    cell_regret,
    find_equilibria,
    offered_rate,
    poa_toy_example,
    poa_toy_instance,
    price_of_anarchy,
    select_equilibrium,
    solve_equilibrium_1d_multi,
    solve_equilibrium_1d_two_stations,
    solve_equilibrium_2d,
)

PARAMS = RadioParams.from_sigma(0.3)


def line(resolution=2000):
    domain = Domain.interval(-10.0, 10.0, resolution)
    return domain, build_uniform_density(domain)


def share(stations, total_users=2500):
    return ShareRateModel(PARAMS, stations, total_users)


def test_share_rate_model():
    s = Station(1, (0.0,))
    model = share([s, Station(2, (1.0,), tx_power=4.0)])
    assert model.powers.tolist() == [1.0, 4.0]
    peak = model.peak_rate(0, 0.0)
    assert peak == pytest.approx(np.log2(1 + 1 / 0.09))
    assert float(model.rate(0, 0.0, 0.5)) == pytest.approx(peak / 1250)
    assert float(model.rate(0, 0.0, 0.0)) == np.inf
    # Joining an empty cell makes you its only user.
    assert float(model.join_rate(0, 0.0, 0.0)) == pytest.approx(peak)
    assert float(offered_rate(model, s, (0.0,), 0.5)) == pytest.approx(peak / 1250)
    with pytest.raises(DomainError):
        offered_rate(model, s, (0.0,), -0.1)
    with pytest.raises(StationError):
        model.position(Station(3, (2.0,)))


def test_congestion_cost_model():
    stations = [Station(1, (0.0,)), Station(2, (1.0,))]
    spec = CongestionSpec.additive(PowerLawCost(1.0), [Linear(2.0), Linear(0.0)])
    model = CongestionCostModel(spec, stations)
    assert float(model.rate(0, 0.5, 0.25)) == pytest.approx(-(0.5 + 0.5))
    assert float(model.join_rate(1, 0.5, 0.25)) == pytest.approx(-0.5)
    mult = CongestionSpec.multiplicative(PowerLawCost(1.0), [Linear(2.0), Linear(1.0)])
    assert float(CongestionCostModel(mult, stations).rate(0, 0.5, 0.25)) == pytest.approx(-0.25)
    with pytest.raises(StationError):
        CongestionCostModel(spec, stations[:1])


def test_two_stations_symmetric():
    domain, density = line()
    s1, s2 = Station(1, (-5.0,)), Station(2, (5.0,))
    solutions = solve_equilibrium_1d_two_stations(domain, density, s1, s2, share([s1, s2]))
    assert len(solutions) == 1
    (solution,) = solutions
    assert solution.thresholds[0] == pytest.approx(0.0, abs=1e-6)
    assert solution.masses == pytest.approx([0.5, 0.5], abs=1e-6)
    assert solution.residual < 1e-9
    assert solution.classification == UNCLASSIFIED
    assert np.max(cell_regret(solution, share([s1, s2]), density)) <= 0.01 * solution.common_rate


def test_two_stations_order_does_not_matter():
    domain, density = line()
    s1, s2 = Station(1, (0.0,)), Station(2, (-5.0,))
    model = share([s1, s2])
    forward = solve_equilibrium_1d_two_stations(domain, density, s1, s2, model)
    backward = solve_equilibrium_1d_two_stations(domain, density, s2, s1, model)
    assert [s.thresholds for s in forward] == [s.thresholds for s in backward]
    # Station 2 sits left of station 1, so it owns the left cell.
    (solution,) = forward
    t = solution.thresholds[0]
    assert -5.0 < t < 0.0
    assert solution.masses[1] == pytest.approx(density.cdf(t))
    assert solution.partition.station_indices[0] == 2


def test_two_stations_nonhomogeneous():
    domain = Domain.interval(-10.0, 10.0, 2000)
    density = build_linear_density(domain, -0.005, 0.05)
    s1, s2 = Station(1, (-5.0,)), Station(2, (5.0,))
    (solution,) = solve_equilibrium_1d_two_stations(domain, density, s1, s2, share([s1, s2]))
    # Users crowd the left, so the left cell shrinks.
    assert solution.thresholds[0] < 0.0
    assert sum(solution.masses) == pytest.approx(1.0, abs=1e-9)


def test_multi_agrees_with_two_stations():
    domain, density = line()
    s1, s2 = Station(1, (0.0,)), Station(2, (-5.0,))
    model = share([s1, s2])
    (pair,) = solve_equilibrium_1d_two_stations(domain, density, s1, s2, model)
    (multi,) = solve_equilibrium_1d_multi(domain, density, [s1, s2], model)
    assert multi.converged
    assert multi.thresholds[0] == pytest.approx(pair.thresholds[0], abs=1e-6)


def test_three_stations_symmetric():
    domain, density = line()
    stations = [Station(1, (-10.0,)), Station(2, (10.0,)), Station(3, (0.0,))]
    (solution,) = solve_equilibrium_1d_multi(domain, density, stations, share(stations))
    assert solution.converged
    t1, t2 = solution.thresholds
    assert t1 == pytest.approx(-t2, abs=1e-6)
    assert -10.0 < t1 < 0.0
    assert sum(solution.masses) == pytest.approx(1.0, abs=1e-9)
    assert solution.masses[0] == pytest.approx(solution.masses[1], abs=1e-6)


def test_useless_station_stays_empty():
    domain, density = line()
    stations = [
        Station(1, (-10.0,)),
        Station(2, (10.0,)),
        Station(3, (0.0,), tx_power=1e-9),
    ]
    (solution,) = solve_equilibrium_1d_multi(domain, density, stations, share(stations))
    assert solution.masses[2] == 0.0
    assert solution.thresholds == pytest.approx([0.0, 0.0], abs=1e-6)
    assert solution.residual <= 1e-9


def test_two_dimensional_layout():
    domain = Domain.rectangle(-4, 4, -4, 4, 32)
    density = build_uniform_density(domain)
    positions = [(-3, -3), (3, -3), (3, 3), (-3, 3), (0, 0)]
    stations = [Station(i, p) for i, p in enumerate(positions, 1)]
    solution = solve_equilibrium_2d(domain, density, stations, share(stations))
    assert solution.converged
    assert solution.thresholds is None
    assert sum(solution.masses) == pytest.approx(1.0)
    corners = solution.masses[:4]
    assert max(corners) - min(corners) < 1e-9
    assert solution.residual >= 0.0
    (found,) = find_equilibria(domain, density, stations, share(stations))
    assert found.partition.same_cells(solution.partition)


def test_find_equilibria_dispatch():
    domain, density = line(400)
    two = [Station(1, (-5.0,)), Station(2, (5.0,))]
    three = two + [Station(3, (0.0,))]
    assert len(find_equilibria(domain, density, two, share(two))) == 1
    (solution,) = find_equilibria(domain, density, three, share(three))
    assert len(solution.thresholds) == 2
    with pytest.raises(DomainError):
        solve_equilibrium_1d_multi(
            Domain.rectangle(0, 1, 0, 1, 4),
            build_uniform_density(Domain.rectangle(0, 1, 0, 1, 4)),
            [Station(1, (0.5, 0.5))],
            share([Station(1, (0.5, 0.5))]),
        )


def fake_solution(rate, threshold):
    domain, density = line(10)
    s = [Station(1, (-5.0,)), Station(2, (5.0,))]
    return EquilibriumSolution(
        voronoi_partition(domain, density, s), rate, 0.0, thresholds=(threshold,)
    )


def test_select_equilibrium():
    solutions = [
        fake_solution(2.0, 0.5),
        fake_solution(1.0, 0.7),
        fake_solution(2.0, -0.5),
        fake_solution(1.0, 0.1),
    ]
    best = select_equilibrium(solutions, BEST)
    assert best.common_rate == 2.0 and best.thresholds == (-0.5,)
    assert best.classification == BEST
    worst = select_equilibrium(solutions, WORST)
    assert worst.common_rate == 1.0 and worst.thresholds == (0.1,)
    assert worst.classification == WORST
    assert solutions[3].classification == UNCLASSIFIED
    with pytest.raises(EquilibriumError):
        select_equilibrium([], WORST)
    with pytest.raises(UnsupportedParameterError):
        select_equilibrium(solutions, "median")


def test_price_of_anarchy_toy():
    poa = poa_toy_example(resolution=10_000)
    # Everybody crowds station 2 ...
    assert len(poa.equilibria) == 1
    assert poa.equilibrium.masses == (0.0, 1.0)
    assert poa.equilibrium.classification == WORST
    assert poa.equilibrium_cost == pytest.approx(1.5, rel=1e-6)
    # ... while the optimum sends the first 0.1% to station 1.
    assert poa.optimum.masses[0] == pytest.approx(0.001, abs=1.5e-4)
    assert poa.optimum_cost == pytest.approx(0.6, abs=0.02)
    assert poa.ratio > 1
    assert poa.ratio == pytest.approx(2.5, rel=0.03)


def test_poa_toy_instance():
    domain, density, stations, spec = poa_toy_instance(100)
    assert domain.n_cells == 100
    assert [s.position for s in stations] == [(0.0,), (1.0,)]
    assert spec.kind == "additive"


def test_price_of_anarchy_is_at_least_one():
    domain, density = line(400)
    stations = [Station(1, (0.0,)), Station(2, (-5.0,))]
    spec = rate_fair_spec(stations, PARAMS)
    poa = price_of_anarchy(domain, density, stations, spec, share(stations))
    assert poa.ratio >= 1.0
    assert poa.optimum_cost <= poa.equilibrium_cost


def test_more_power_never_shrinks_a_cell():
    domain, density = line(1000)
    thresholds = []
    for power in (0.5, 1.0, 2.0, 4.0, 8.0):
        s1, s2 = Station(1, (-5.0,)), Station(2, (5.0,), tx_power=power)
        (solution,) = solve_equilibrium_1d_two_stations(
            domain, density, s1, s2, share([s1, s2])
        )
        thresholds.append(solution.thresholds[0])
    # Station 2 owns the right cell; more power pushes its boundary left.
    assert all(a > b for a, b in zip(thresholds, thresholds[1:]))
    assert thresholds[0] > 0.0 > thresholds[-1]


@pytest.mark.parametrize("seed", range(100))
def test_random_equilibria_satisfy_the_wardrop_conditions(seed):
    rng = np.random.default_rng(seed)
    domain = Domain.interval(-10.0, 10.0, 400)
    density = build_linear_density(domain, rng.uniform(-0.04, 0.04), 1.0)
    a, b = np.sort(rng.uniform(-10.0, 10.0, 2))
    stations = [
        Station(1, (a,), tx_power=rng.uniform(0.5, 2.0)),
        Station(2, (b,), tx_power=rng.uniform(0.5, 2.0)),
    ]
    poa = price_of_anarchy(
        domain, density, stations, rate_fair_spec(stations, PARAMS), share(stations)
    )
    assert poa.ratio >= 1.0
    for solution in poa.equilibria:
        assert solution.residual <= 1e-6 * solution.common_rate + INDIFFERENCE_TOL
        assert sum(solution.masses) == pytest.approx(1.0, abs=1e-9)
        assert -10.0 <= solution.thresholds[0] <= 10.0


def test_center_cell_shrinks_under_a_crowded_center():
    areas = {}
    for name in ("2d-five-stations", "2d-five-stations-radial"):
        s = load_scenario(name)
        assert s.domain.shape == (256, 256)
        solution = solve_equilibrium_2d(
            s.domain,
            s.build_density(),
            s.stations,
            ShareRateModel(s.params, s.stations, s.total_users),
            s.solver,
            s.total_users,
        )
        cells = solution.partition.cell_areas()
        assert np.all(cells > 0)
        areas[name] = cells[4]
    assert areas["2d-five-stations-radial"] < areas["2d-five-stations"]
