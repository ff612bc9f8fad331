"""Scenario files: reading, validation, the canonical text form and the
bundled presets.

A scenario is a flat list of `key = value` entries grouped under
`[section]` headers (see ``docs/scenario.rst``). `load_scenario` accepts a
path or the name of a bundled preset and returns a validated `Scenario`;
every semantic problem found is reported at once in a
`ScenarioValidationError`.
"""

import hashlib
import math
import os
from dataclasses import dataclass, field, replace

from otcells.congestion import (
    ADDITIVE,
    MULTIPLICATIVE,
    Constant,
    CongestionSpec,
    PathLossCost,
    PowerLawCost,
    Zero,
    term_from_description,
)
from otcells.domain import (
    DEFAULT_RESOLUTION_1D,
    DEFAULT_RESOLUTION_2D,
    Domain,
    Region,
    build_linear_density,
    build_piecewise_density,
    build_radial_density,
    build_uniform_density,
    read_density_csv,
)
from otcells.errors import (
    DomainError,
    ScenarioError,
    ScenarioValidationError,
    StationError,
)
from otcells.policies import (
    ALPHA_FAIR,
    PENALIZED,
    POLICIES,
    ROUND_ROBIN,
    alpha_fair_spec,
    penalized_spec,
    rate_fair_spec,
    round_robin_spec,
)
from otcells.radio import DEFAULT_TOTAL_USERS, RadioParams, Station, check_stations
from otcells.scenario.models import (
    Integer,
    List,
    Section,
    String,
    Word,
    is_number,
    plain,
)
from otcells.scenario.reader import parse, read_file
from otcells.solvers import SolverConfig
from otcells.wardrop import DEFAULT_SCAN_RESOLUTION

SUFFIX = ".scn"
PRESETS_DIR = os.path.join(os.path.dirname(__file__), "presets")

DENSITY_KINDS = ("uniform", "piecewise", "radial", "linear", "csv")
DENSITY_FIELDS = {
    "uniform": (),
    "piecewise": ("pieces",),
    "radial": ("radius",),
    "linear": ("slope", "intercept"),
    "csv": ("path",),
}
TERM_ARITY = {
    "constant": (1, 1),
    "linear": (1, 1),
    "polynomial": (1, None),
    "step": (3, 3),
    "penalty": (0, 0),
}


@dataclass(frozen=True)
class DensitySpec:
    kind: str = "uniform"
    pieces: tuple = ()
    radius: float = None
    slope: float = None
    intercept: float = None
    path: str = None

    def build(self, domain, base_dir=None):
        if self.kind == "uniform":
            return build_uniform_density(domain)
        if self.kind == "piecewise":
            return build_piecewise_density(
                domain, [(Region.box(*p[:-1]), p[-1]) for p in self.pieces]
            )
        if self.kind == "radial":
            return build_radial_density(domain, self.radius)
        if self.kind == "linear":
            return build_linear_density(domain, self.slope, self.intercept or 0.0)
        return read_density_csv(resolve_path(self.path, base_dir), domain)


@dataclass(frozen=True)
class RadioSpec:
    sigma: float = 1.0
    xi: float = 2.0
    height: float = 1.0
    theta_bar: float = 1.0

    def params(self):
        return RadioParams.from_sigma(
            self.sigma, xi=self.xi, height=self.height, theta_bar=self.theta_bar
        )


@dataclass(frozen=True)
class ReferenceObjective:
    "The `[congestion]` section: a kind and an optional power-law exponent."

    kind: str
    exponent: float = None


@dataclass(frozen=True)
class Outputs:
    partition: str = None
    report: str = None
    sweep: str = None
    comparison: str = None


@dataclass(frozen=True)
class Scenario:
    """A validated scenario.

    `name` and `source_dir` say where the scenario came from and take no
    part in comparisons; relative file names in the scenario are resolved
    against `source_dir`.
    """

    domain: Domain
    density: DensitySpec
    radio: RadioSpec
    stations: tuple
    policy: str
    total_users: float = DEFAULT_TOTAL_USERS
    alpha: float = None
    station_congestion: tuple = ()
    congestion: ReferenceObjective = None
    solver: SolverConfig = SolverConfig()
    scan_resolution: int = DEFAULT_SCAN_RESOLUTION
    outputs: Outputs = Outputs()
    name: str = field(default="scenario", compare=False)
    source_dir: str = field(default=None, compare=False)

    @property
    def params(self):
        return self.radio.params()

    def build_density(self):
        return self.density.build(self.domain, self.source_dir)

    def reference_spec(self):
        """The objective partitions are compared under: the `[congestion]`
        section when there is one, else the policy's own objective, else
        the rate-fair power objective."""
        params = self.params
        if self.congestion is not None:
            base = (
                PowerLawCost(self.congestion.exponent)
                if self.congestion.exponent is not None
                else PathLossCost(params)
            )
            neutral = Zero if self.congestion.kind == ADDITIVE else lambda: Constant(1.0)
            terms = [
                term_from_description(desc, s, self.total_users) if desc else neutral()
                for s, desc in zip(self.stations, self._station_terms())
            ]
            return CongestionSpec(self.congestion.kind, base, terms)
        if self.policy == ROUND_ROBIN:
            return round_robin_spec(self.stations, params, self.total_users)
        if self.policy == ALPHA_FAIR:
            return alpha_fair_spec(self.stations, params, self.alpha, self.total_users)
        if self.policy == PENALIZED:
            return penalized_spec(self.stations, params, self.total_users, self.solver.tol)
        return rate_fair_spec(self.stations, params)

    def _station_terms(self):
        return self.station_congestion or (None,) * len(self.stations)

    def with_station_position(self, index, position):
        "A copy with station `index` (its `Station.index`) moved to `position`."
        if index not in [s.index for s in self.stations]:
            raise StationError(f"no station {index} in scenario {self.name!r}")
        return replace(
            self,
            stations=tuple(
                replace(s, position=position) if s.index == index else s
                for s in self.stations
            ),
        )

    def digest(self):
        "SHA-256 of the canonical text form."
        return hashlib.sha256(dump_scenario(self).encode("utf-8")).hexdigest()


def resolve_path(path, base_dir=None):
    if os.path.isabs(path) or base_dir is None:
        return path
    return os.path.join(base_dir, path)


def preset_names():
    return sorted(
        f[: -len(SUFFIX)] for f in os.listdir(PRESETS_DIR) if f.endswith(SUFFIX)
    )


def preset_path(name):
    path = os.path.join(PRESETS_DIR, name + SUFFIX)
    if not os.path.isfile(path):
        raise ScenarioError(
            f"no preset named {name!r} (available: {', '.join(preset_names())})"
        )
    return path


def read_preset(name):
    with open(preset_path(name), encoding="utf-8") as f:
        return f.read()


def load_scenario(path):
    """Load the scenario file at `path`, or the bundled preset of that name.

    Raises:
        ScenarioSyntaxError: when the file can't be parsed.
        ScenarioValidationError: listing every invalid entry.
    """
    path = os.fspath(path)
    if not os.path.exists(path) and not path.endswith(SUFFIX):
        if path in preset_names():
            path = preset_path(path)
        else:
            raise ScenarioError(f"no scenario file or preset named {path!r}")
    statements, source = read_file(path)
    return _build(
        statements,
        source,
        filename=path,
        name=os.path.splitext(os.path.basename(path))[0],
        source_dir=os.path.dirname(os.path.abspath(path)),
    )


def loads_scenario(source, filename="<string>", name="scenario", source_dir=None):
    "Like `load_scenario`, for scenario text."
    return _build(parse(source, filename), source, filename, name, source_dir)


class _Invalid(Exception):
    pass


REQUIRED = object()


def _show(v):
    return repr(plain(v))


def _number(v):
    if not is_number(v):
        raise _Invalid(f"expected a number, got {_show(v)}")
    v = plain(v)
    if not math.isfinite(v):
        raise _Invalid(f"expected a finite number, got {v!r}")
    return v


def _real(condition=None, what=None):
    def check(v):
        v = _number(v)
        if condition is not None and not condition(v):
            raise _Invalid(f"must be {what}, got {v!r}")
        return v

    return check


_any_real = _real()
_positive = _real(lambda v: v > 0, "positive")
_nonnegative = _real(lambda v: v >= 0, "nonnegative")
_fraction = _real(lambda v: 0 < v <= 1, "in (0, 1]")


def _integer(minimum):
    def check(v):
        if not isinstance(v, Integer):
            raise _Invalid(f"expected an integer, got {_show(v)}")
        if v < minimum:
            raise _Invalid(f"must be at least {minimum}, got {int(v)}")
        return int(v)

    return check


def _choice(*words):
    def check(v):
        if not isinstance(v, Word) or v not in words:
            raise _Invalid(f"expected one of {', '.join(words)}; got {_show(v)}")
        return str(v)

    return check


def _string(v):
    if not isinstance(v, String):
        raise _Invalid(f"expected a double-quoted string, got {_show(v)}")
    return str(v)


def _numbers(*lengths):
    def check(v):
        if not isinstance(v, List) or len(v) not in lengths:
            raise _Invalid(
                "expected a list of {} numbers, got {}".format(
                    " or ".join(map(str, lengths)), _show(v)
                )
            )
        return tuple(_any_real(x) for x in v)

    return check


def _resolution(v):
    if isinstance(v, List):
        return tuple(_integer(2)(x) for x in v)
    return _integer(2)(v)


def _position(v):
    if is_number(v):
        return (_any_real(v),)
    return _numbers(1, 2)(v)


def _pieces(v):
    if not isinstance(v, List) or not v:
        raise _Invalid("expected a nonempty list of [lo, hi, level] pieces")
    pieces = tuple(_numbers(3, 5)(p) for p in v)
    for p in pieces:
        if not p[-1] > 0:
            raise _Invalid(f"piece levels must be positive, got {p[-1]!r}")
    return pieces


def _term(v):
    if not isinstance(v, List) or not v or not isinstance(v[0], Word):
        raise _Invalid(f"expected a term such as [linear, 0.5], got {_show(v)}")
    name, *args = v
    if name not in TERM_ARITY:
        raise _Invalid(
            f"unknown congestion term {str(name)!r} (expected one of: "
            + ", ".join(TERM_ARITY)
            + ")"
        )
    lo, hi = TERM_ARITY[name]
    if len(args) < lo or (hi is not None and len(args) > hi):
        wanted = f"at least {lo}" if hi is None else str(lo)
        raise _Invalid(f"{name} takes {wanted} parameter(s), got {len(args)}")
    return (str(name), *(_any_real(a) for a in args))


SCHEMA = {
    "domain.kind": (_choice("interval", "rectangle"), REQUIRED),
    "domain.bounds": (_numbers(2, 4), REQUIRED),
    "domain.resolution": (_resolution, None),
    "density.kind": (_choice(*DENSITY_KINDS), "uniform"),
    "density.pieces": (_pieces, ()),
    "density.radius": (_positive, None),
    "density.slope": (_any_real, None),
    "density.intercept": (_any_real, None),
    "density.path": (_string, None),
    "radio.sigma": (_positive, 1.0),
    "radio.xi": (_positive, 2.0),
    "radio.height": (_nonnegative, 1.0),
    "radio.theta_bar": (_positive, 1.0),
    "network.total_users": (_positive, DEFAULT_TOTAL_USERS),
    "network.policy": (_choice(*POLICIES), REQUIRED),
    "network.alpha": (_any_real, None),
    "congestion.kind": (_choice(ADDITIVE, MULTIPLICATIVE), None),
    "congestion.exponent": (_positive, None),
    "solver.tol": (_positive, SolverConfig.tol),
    "solver.damping": (_fraction, SolverConfig.damping),
    "solver.max_iter": (_integer(1), SolverConfig.max_iter),
    "solver.scan_resolution": (_integer(2), DEFAULT_SCAN_RESOLUTION),
    "output.partition": (_string, None),
    "output.report": (_string, None),
    "output.sweep": (_string, None),
    "output.comparison": (_string, None),
}


STATION_SCHEMA = {
    "position": _position,
    "power": _positive,
    "max_carriers": _integer(1),
    "kappa_bar": _nonnegative,
    "congestion": _term,
}


SECTIONS = sorted({k.split(".")[0] for k in SCHEMA})


def _station_id(name):
    "The `i` of `station.i`, or `None`."
    parts = str(name).split(".")
    if len(parts) == 2 and parts[0] == "station" and parts[1].isdigit():
        return int(parts[1])
    return None


def _build(statements, source, filename, name, source_dir):
    errors = []

    def error(message, at=None):
        errors.append(ScenarioError(message, at, filename, source))

    # Syntax-level checks: known keys, no duplicates, well-typed values.
    entries, values = {}, {}
    bad_sections, station_sections = set(), {}
    for st in statements:
        if isinstance(st, Section):
            i = _station_id(st.name)
            if i is not None:
                station_sections.setdefault(i, st)
            elif st.name not in SECTIONS:
                bad_sections.add(str(st.name))
                error(
                    f"unknown section [{st.name}] (expected one of: "
                    + ", ".join(SECTIONS + ["station.<i>"])
                    + ")",
                    st,
                )
            continue
        key = str(st.key)
        if any(key.startswith(s + ".") for s in bad_sections):
            continue
        if key in entries:
            error(f"duplicate entry {key} (first set on line {entries[key].start_line})", st)
            continue
        entries[key] = st
        prefix, _, last = key.rpartition(".")
        if _station_id(prefix) is not None and last in STATION_SCHEMA:
            check = STATION_SCHEMA[last]
        elif key in SCHEMA:
            check = SCHEMA[key][0]
        else:
            error(f"unknown key {key}", st)
            continue
        try:
            values[key] = check(st.value)
        except _Invalid as e:
            error(f"{key}: {e}", st.value)
    for key, (_, default) in SCHEMA.items():
        if default is REQUIRED and key not in entries:
            error(f"missing required entry {key}")
    if errors:
        raise ScenarioValidationError(errors, filename)

    def get(key):
        default = SCHEMA[key][1]
        return values.get(key, None if default is REQUIRED else default)

    # Cross-entry checks.
    domain = None
    kind, bounds = get("domain.kind"), get("domain.bounds")
    ndim = 1 if kind == "interval" else 2
    if len(bounds) != 2 * ndim:
        error(
            f"domain.bounds: an {kind} needs {2 * ndim} bounds, got {len(bounds)}",
            entries["domain.bounds"],
        )
    else:
        resolution = get("domain.resolution") or (
            DEFAULT_RESOLUTION_1D if ndim == 1 else DEFAULT_RESOLUTION_2D
        )
        try:
            domain = Domain(bounds, resolution)
        except DomainError as e:
            error(f"domain: {e}", entries.get("domain.resolution", entries["domain.bounds"]))

    density_kind = get("density.kind")
    density_ok = True
    for f in ("pieces", "radius", "slope", "intercept", "path"):
        key = f"density.{f}"
        if key in entries and f not in DENSITY_FIELDS[density_kind]:
            error(f"{key} does not apply to {density_kind} densities", entries[key])
            density_ok = False
    for f in DENSITY_FIELDS[density_kind]:
        if f != "intercept" and f"density.{f}" not in entries:
            error(
                f"a {density_kind} density needs density.{f}",
                entries.get("density.kind"),
            )
            density_ok = False
    density = DensitySpec(
        kind=density_kind,
        pieces=get("density.pieces"),
        radius=get("density.radius"),
        slope=get("density.slope"),
        intercept=get("density.intercept"),
        path=get("density.path"),
    )
    if density.path is not None and not os.path.isfile(
        resolve_path(density.path, source_dir)
    ):
        error(f"density.path: no such file {density.path!r}", entries["density.path"])
        density_ok = False
    if domain is not None and density_ok:
        try:
            density.build(domain, source_dir)
        except (DomainError, OSError, ValueError) as e:
            error(f"density: {e}", entries.get("density.kind"))

    radio = RadioSpec(
        *(get(f"radio.{f}") for f in ("sigma", "xi", "height", "theta_bar"))
    )
    policy = get("network.policy")
    alpha = get("network.alpha")
    if policy == ALPHA_FAIR:
        if alpha is None:
            error("the alpha-fair policy needs network.alpha", entries["network.policy"])
        elif alpha == 1:
            error(
                "network.alpha: alpha = 1 is not supported; use a value on either side of 1",
                entries["network.alpha"],
            )
    elif alpha is not None:
        error("network.alpha only applies to the alpha-fair policy", entries["network.alpha"])

    ids = sorted(
        {_station_id(k.rpartition(".")[0]) for k in entries if k.startswith("station.")}
        | set(station_sections)
    )
    if not ids:
        error("at least one [station.<i>] section is required")
    stations, terms, seen = [], [], {}
    for i in ids:
        key = f"station.{i}"
        at = entries.get(f"{key}.position", station_sections.get(i))
        if f"{key}.position" not in values:
            error(f"station {i} needs a position", at)
            continue
        try:
            s = Station(
                i,
                values[f"{key}.position"],
                tx_power=values.get(f"{key}.power"),
                max_carriers=values.get(f"{key}.max_carriers"),
                kappa_bar=values.get(f"{key}.kappa_bar"),
            )
            if domain is not None:
                check_stations([s], domain)
        except StationError as e:
            error(str(e), at)
            continue
        if s.position in seen:
            error(f"stations {seen[s.position]} and {i} share position {s.position}", at)
            continue
        seen[s.position] = i
        incomplete = s.max_carriers is None or s.kappa_bar is None
        if policy == PENALIZED and incomplete:
            error(f"station {i}: the penalized policy needs max_carriers and kappa_bar", at)
        term = values.get(f"{key}.congestion")
        if term is not None and term[0] == "penalty" and incomplete:
            error(
                f"station {i}: a penalty term needs max_carriers and kappa_bar",
                entries[f"{key}.congestion"],
            )
        stations.append(s)
        terms.append(term)

    congestion = None
    if "congestion" in {str(st.name) for st in statements if isinstance(st, Section)} or any(
        k.startswith("congestion.") for k in entries
    ):
        if "congestion.kind" not in values:
            error("the [congestion] section needs a kind")
        else:
            congestion = ReferenceObjective(get("congestion.kind"), get("congestion.exponent"))
    elif any(t is not None for t in terms):
        for i, t in zip(ids, terms):
            if t is not None:
                error(
                    f"station {i}: congestion terms need a [congestion] section",
                    entries[f"station.{i}.congestion"],
                )
                break

    if errors:
        raise ScenarioValidationError(errors, filename)
    return Scenario(
        domain=domain,
        density=density,
        radio=radio,
        stations=tuple(stations),
        policy=policy,
        total_users=get("network.total_users"),
        alpha=alpha,
        station_congestion=tuple(terms) if any(t is not None for t in terms) else (),
        congestion=congestion,
        solver=SolverConfig(
            tol=get("solver.tol"),
            damping=get("solver.damping"),
            max_iter=get("solver.max_iter"),
        ),
        scan_resolution=get("solver.scan_resolution"),
        outputs=Outputs(*(get(f"output.{f}") for f in ("partition", "report", "sweep", "comparison"))),
        name=name,
        source_dir=source_dir,
    )


def _format(v):
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(map(_format, v)) + "]"
    if isinstance(v, str):
        return v
    return repr(v)


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dump_scenario(scenario):
    """The canonical text of `scenario`: every section in a fixed order,
    defaults written out, numbers in their shortest round-tripping form.
    `loads_scenario(dump_scenario(s)) == s`."""
    out = []

    def section(name, *pairs):
        pairs = [(k, v) for k, v in pairs if v is not None]
        if pairs:
            out.append(f"[{name}]")
            out.extend(f"{k} = {v}" for k, v in pairs)
            out.append("")

    d = scenario.domain
    resolution = d.resolution[0] if len(set(d.resolution)) == 1 else d.resolution
    section(
        "domain",
        ("kind", "interval" if d.ndim == 1 else "rectangle"),
        ("bounds", _format(d.bounds)),
        ("resolution", _format(resolution)),
    )
    dens = scenario.density
    section(
        "density",
        ("kind", dens.kind),
        ("pieces", _format(dens.pieces) if dens.pieces else None),
        *(
            (f, None if getattr(dens, f) is None else _format(getattr(dens, f)))
            for f in ("radius", "slope", "intercept")
        ),
        ("path", None if dens.path is None else _quote(dens.path)),
    )
    r = scenario.radio
    section(
        "radio",
        *((f, _format(getattr(r, f))) for f in ("sigma", "xi", "height", "theta_bar")),
    )
    section(
        "network",
        ("total_users", _format(scenario.total_users)),
        ("policy", scenario.policy),
        ("alpha", None if scenario.alpha is None else _format(scenario.alpha)),
    )
    if scenario.congestion is not None:
        c = scenario.congestion
        section(
            "congestion",
            ("kind", c.kind),
            ("exponent", None if c.exponent is None else _format(c.exponent)),
        )
    cfg = scenario.solver
    section(
        "solver",
        ("tol", _format(cfg.tol)),
        ("damping", _format(cfg.damping)),
        ("max_iter", _format(cfg.max_iter)),
        ("scan_resolution", _format(scenario.scan_resolution)),
    )
    o = scenario.outputs
    section(
        "output",
        *(
            (f, None if getattr(o, f) is None else _quote(getattr(o, f)))
            for f in ("partition", "report", "sweep", "comparison")
        ),
    )
    for s, term in zip(scenario.stations, scenario._station_terms()):
        section(
            f"station.{s.index}",
            ("position", _format(s.position)),
            ("power", None if s.tx_power is None else _format(s.tx_power)),
            ("max_carriers", None if s.max_carriers is None else _format(s.max_carriers)),
            ("kappa_bar", None if s.kappa_bar is None else _format(s.kappa_bar)),
            ("congestion", None if term is None else _format(term)),
        )
    return "\n".join(out)


__all__ = [
    "DensitySpec",
    "Outputs",
    "RadioSpec",
    "ReferenceObjective",
    "Scenario",
    "dump_scenario",
    "load_scenario",
    "loads_scenario",
    "preset_names",
    "preset_path",
    "read_preset",
]
