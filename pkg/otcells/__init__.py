try:
    from otcells.version import __version__
except ImportError:
    __version__ = "unknown"


_FALSE_STRINGS = ("", "0", "false", "no", "off")


def _initialize_env_var(env_var, default_val):
    """Read a boolean flag from the environment. Unset means `default_val`;
    a value in `_FALSE_STRINGS`, in any case, means false."""
    import os

    value = os.environ.get(env_var)
    if value is None:
        return bool(default_val)
    return value.strip().lower() not in _FALSE_STRINGS


# Import some names on demand so that `import otcells` (and `otcells --help`)
# doesn't pull in numpy and scipy.

_jit_imports = dict(
    Domain="otcells.domain",
    DensityField="otcells.domain",
    Region="otcells.domain",
    RadioParams="otcells.radio",
    Station="otcells.radio",
    CongestionSpec="otcells.congestion",
    Partition="otcells.solvers",
    SolverConfig="otcells.solvers",
    SolverReport="otcells.solvers",
    voronoi_partition="otcells.solvers",
    solve_additive="otcells.solvers",
    solve_multiplicative="otcells.solvers",
    total_cost="otcells.solvers",
    brute_force_oracle="otcells.oracle",
    round_robin_solver="otcells.policies",
    rate_fair_solver="otcells.policies",
    penalized_rate_fair_solver="otcells.policies",
    alpha_fair_solver="otcells.policies",
    price_of_anarchy="otcells.wardrop",
    poa_toy_example="otcells.wardrop",
    load_scenario="otcells.scenario",
    run_scenario="otcells.experiments",
    sweep_station_position="otcells.experiments",
    compare_policies="otcells.experiments",
)


def __getattr__(k):
    if k not in _jit_imports:
        raise AttributeError(f"module {__name__!r} has no attribute {k!r}")
    import importlib

    globals()[k] = getattr(importlib.import_module(_jit_imports[k]), k)
    return globals()[k]
