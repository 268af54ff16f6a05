"""Experiment configuration: a flat INI grammar with typed keys.

Every section and key is optional except where noted; unknown sections or
keys are errors.  Parsing collects all problems before raising, and
``serialize`` writes a canonical form that parses back to an equal config.

Grammar (defaults shown)::

    [run]
    seed = 0

    [grid]
    half_length = 12.0
    points = 256

    [masses]
    m1 = 1.0
    m2 = 1.0

    [potential1]            ; also [potential2] (kappa = 0.5) and [perturbation]
    type = harmonic         ; zero | harmonic | linear_window | bump
    kappa = 1.0             ; harmonic
    center = 0.0            ; harmonic, bump
    g = 1.0                 ; linear_window
    window = -7.0, 7.0      ; linear_window
    taper = 1.5             ; linear_window
    amplitude = 1.0         ; bump
    width = 3.0             ; bump

    [nonlinearity]
    kind = linear           ; linear | bbm | dg | single
    strength = 1.0          ; bbm
    c1 = 0.0 ... c5 = 0.0   ; dg
    tag = R4                ; single: R1..R5, R1minus4
    weight = 1.0            ; single
    eps_rel = 1e-12

    [initial]
    type = gaussian         ; gaussian | product | correlated
    a = 0.6+0.2j ... f = 0j ; gaussian, psi = exp(-(a x1^2 + b x1 x2 + c x2^2 + d x1 + e x2 + f))
    center1 = 0.3 width1 = 0.9 center2 = -0.2 width2 = 0.8   ; product, correlated
    sign = 1                ; correlated
    phase = bilinear        ; product, correlated: zero | bilinear
    normalize = true

    [probe]
    nu = 3
    stencil_dt = 0.002
    stencil_halfwidth = 3
    richardson_levels = 3
    substeps = 0            ; 0 picks from the stability heuristic

    [simulate]
    t_final = 0.1
    samples = 11
    dt = 0.0                ; 0 picks half the stability heuristic

    [werner]
    kappa1 = 1.0
    kappa2_pair = 0.5, 1.0
    substeps = 4
    x_range = -5.0, 5.0
    x_points = 201

    [analytic]
    tags = R1, R2, R3, R4, R5, R1minus4, BBM
    g = 1.0
    random_specs = 0        ; > 0 adds that many seeded random nodeless specs

    [sweep]
    engine = werner         ; werner | probe
    c3 = -1, -0.5, 0, 0.5, 1
    c1_plus_c4 = -1, -0.5, 0, 0.5, 1
    c1 = 1.0
    c2 = 0.7
    c5 = 0.4

``[probe]`` stencil settings are shared by probe, werner, sweep and
noise-floor runs so that one config describes one measurement protocol.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Tuple

from .errors import ConfigurationError
from .evolution import Bump, Harmonic, LinearWindow, Masses, Zero
from .field import make_grid
from .nonlinearity import BBM, BBM_TAG, DG, TAGS, DGCoefficients, Linear, Regularization, Single

POTENTIAL_TYPES = ("zero", "harmonic", "linear_window", "bump")
KINDS = ("linear", "bbm", "dg", "single")
INITIAL_TYPES = ("gaussian", "product", "correlated")
ENGINES = ("werner", "probe")


@dataclass(frozen=True)
class RunSection:
    seed: int = 0


@dataclass(frozen=True)
class GridSection:
    half_length: float = 12.0
    points: int = 256


@dataclass(frozen=True)
class MassSection:
    m1: float = 1.0
    m2: float = 1.0


@dataclass(frozen=True)
class PotentialSection:
    type: str = "harmonic"
    kappa: float = 1.0
    center: float = 0.0
    g: float = 1.0
    window: Tuple[float, float] = (-7.0, 7.0)
    taper: float = 1.5
    amplitude: float = 1.0
    width: float = 3.0


@dataclass(frozen=True)
class NonlinearitySection:
    kind: str = "linear"
    strength: float = 1.0
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    c5: float = 0.0
    tag: str = "R4"
    weight: float = 1.0
    eps_rel: float = 1e-12


@dataclass(frozen=True)
class InitialSection:
    type: str = "gaussian"
    a: complex = 0.6 + 0.2j
    b: complex = 0.5 + 0.4j
    c: complex = 0.8 - 0.1j
    d: complex = 0.1 + 0.2j
    e: complex = -0.2 + 0.1j
    f: complex = 0j
    center1: float = 0.3
    width1: float = 0.9
    center2: float = -0.2
    width2: float = 0.8
    sign: int = 1
    phase: str = "bilinear"
    normalize: bool = True


@dataclass(frozen=True)
class ProbeSection:
    nu: int = 3
    stencil_dt: float = 2e-3
    stencil_halfwidth: int = 3
    richardson_levels: int = 3
    substeps: int = 0


@dataclass(frozen=True)
class SimulateSection:
    t_final: float = 0.1
    samples: int = 11
    dt: float = 0.0


@dataclass(frozen=True)
class WernerSection:
    kappa1: float = 1.0
    kappa2_pair: Tuple[float, float] = (0.5, 1.0)
    substeps: int = 4
    x_range: Tuple[float, float] = (-5.0, 5.0)
    x_points: int = 201


@dataclass(frozen=True)
class AnalyticSection:
    tags: Tuple[str, ...] = TAGS + (BBM_TAG,)
    g: float = 1.0
    random_specs: int = 0


@dataclass(frozen=True)
class SweepSection:
    engine: str = "werner"
    c3: Tuple[float, ...] = (-1.0, -0.5, 0.0, 0.5, 1.0)
    c1_plus_c4: Tuple[float, ...] = (-1.0, -0.5, 0.0, 0.5, 1.0)
    c1: float = 1.0
    c2: float = 0.7
    c5: float = 0.4


_DEFAULT_POTENTIALS = {
    "potential1": PotentialSection(),
    "potential2": PotentialSection(kappa=0.5),
    "perturbation": PotentialSection(type="bump", amplitude=1.0, center=0.5, width=3.0),
}


@dataclass(frozen=True)
class ExperimentConfig:
    run: RunSection = field(default_factory=RunSection)
    grid: GridSection = field(default_factory=GridSection)
    masses: MassSection = field(default_factory=MassSection)
    potential1: PotentialSection = _DEFAULT_POTENTIALS["potential1"]
    potential2: PotentialSection = _DEFAULT_POTENTIALS["potential2"]
    perturbation: PotentialSection = _DEFAULT_POTENTIALS["perturbation"]
    nonlinearity: NonlinearitySection = field(default_factory=NonlinearitySection)
    initial: InitialSection = field(default_factory=InitialSection)
    probe: ProbeSection = field(default_factory=ProbeSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    werner: WernerSection = field(default_factory=WernerSection)
    analytic: AnalyticSection = field(default_factory=AnalyticSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    @property
    def galilei_covariant(self) -> bool:
        return self.nonlinearity.kind == "dg" and build_coefficients(self.nonlinearity).galilei_covariant

    def echo(self) -> dict:
        out = {name: _section_dict(getattr(self, name)) for name in SECTION_NAMES}
        out["galilei_covariant"] = self.galilei_covariant
        return out


SECTION_NAMES = tuple(f.name for f in fields(ExperimentConfig))

# ---------------------------------------------------------------------------
# scalar codecs


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _parse_complex(text):
    return complex(text.strip().replace(" ", ""))


def _split(text):
    return [p.strip() for p in text.split(",") if p.strip()]


def _parser_for(annotation):
    return {
        "int": _parse_int,
        "float": float,
        "complex": _parse_complex,
        "bool": _parse_bool,
        "str": str.strip,
        "Tuple[float, float]": lambda t: _pair(t),
        "Tuple[float, ...]": lambda t: tuple(float(p) for p in _split(t)),
        "Tuple[str, ...]": lambda t: tuple(_split(t)),
    }[annotation]


def _pair(text):
    parts = [float(p) for p in _split(text)]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {text!r}")
    return tuple(parts)


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _section_dict(section):
    out = {}
    for k, v in asdict(section).items():
        if isinstance(v, complex):
            v = [v.real, v.imag]
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# parse / serialize


def _validate(config: ExperimentConfig) -> list:
    problems = []
    try:
        make_grid(config.grid.half_length, config.grid.points, config.grid.half_length, config.grid.points)
    except ConfigurationError as err:
        # both axes share one section, so report each problem once
        problems.extend(dict.fromkeys(f"grid.{p.split('.', 1)[1]}" for p in err.problems))
    for name in ("m1", "m2"):
        if not getattr(config.masses, name) > 0:
            problems.append(f"masses.{name}: must be positive")
    for name in ("potential1", "potential2", "perturbation"):
        sec = getattr(config, name)
        if sec.type not in POTENTIAL_TYPES:
            problems.append(f"{name}.type: must be one of {', '.join(POTENTIAL_TYPES)}, got {sec.type!r}")
        if sec.type == "bump" and not sec.width > 0:
            problems.append(f"{name}.width: must be positive")
        if sec.type == "linear_window" and not sec.window[0] < sec.window[1]:
            problems.append(f"{name}.window: lower end must be below upper end")
    nl = config.nonlinearity
    if nl.kind not in KINDS:
        problems.append(f"nonlinearity.kind: must be one of {', '.join(KINDS)}, got {nl.kind!r}")
    if nl.kind == "single" and nl.tag not in TAGS:
        problems.append(f"nonlinearity.tag: must be one of {', '.join(TAGS)}, got {nl.tag!r}")
    if not 0 < nl.eps_rel <= 1e-6:
        problems.append(f"nonlinearity.eps_rel: must lie in (0, 1e-6], got {nl.eps_rel}")
    ini = config.initial
    if ini.type not in INITIAL_TYPES:
        problems.append(f"initial.type: must be one of {', '.join(INITIAL_TYPES)}, got {ini.type!r}")
    if ini.type == "gaussian" and (ini.a.real <= 0 or ini.c.real <= 0 or 4 * ini.a.real * ini.c.real <= ini.b.real**2):
        problems.append("initial: real part of the Gaussian quadratic form must be positive definite")
    if ini.type != "gaussian":
        if not (ini.width1 > 0 and ini.width2 > 0):
            problems.append("initial.width1/width2: must be positive")
        if ini.sign not in (1, -1):
            problems.append(f"initial.sign: must be 1 or -1, got {ini.sign}")
        if ini.phase not in ("zero", "bilinear"):
            problems.append(f"initial.phase: must be zero or bilinear, got {ini.phase!r}")
    pr = config.probe
    if pr.nu not in (1, 2, 3, 4):
        problems.append(f"probe.nu: must be in 1..4, got {pr.nu}")
    if pr.stencil_halfwidth < pr.nu:
        problems.append(f"probe.stencil_halfwidth: must be >= nu ({pr.nu}), got {pr.stencil_halfwidth}")
    if not pr.stencil_dt > 0:
        problems.append("probe.stencil_dt: must be positive")
    if pr.richardson_levels < 2:
        problems.append("probe.richardson_levels: must be >= 2")
    if pr.substeps < 0:
        problems.append("probe.substeps: must be >= 0")
    sim = config.simulate
    if not sim.t_final > 0:
        problems.append("simulate.t_final: must be positive")
    if sim.samples < 2:
        problems.append("simulate.samples: must be >= 2")
    if sim.dt < 0:
        problems.append("simulate.dt: must be >= 0")
    w = config.werner
    if w.kappa2_pair[0] == w.kappa2_pair[1]:
        problems.append("werner.kappa2_pair: values must differ")
    if min(w.kappa1, *w.kappa2_pair) < 0:
        problems.append("werner: kappa values must be >= 0")
    if w.substeps < 1:
        problems.append("werner.substeps: must be >= 1")
    if w.x_points < 2 or not w.x_range[0] < w.x_range[1]:
        problems.append("werner.x_range/x_points: need an increasing range and at least 2 points")
    an = config.analytic
    bad = [t for t in an.tags if t not in TAGS + (BBM_TAG,)]
    if bad:
        problems.append(f"analytic.tags: unknown tags {', '.join(bad)}")
    if an.random_specs < 0:
        problems.append("analytic.random_specs: must be >= 0")
    sw = config.sweep
    if sw.engine not in ENGINES:
        problems.append(f"sweep.engine: must be one of {', '.join(ENGINES)}, got {sw.engine!r}")
    if not sw.c3 or not sw.c1_plus_c4:
        problems.append("sweep: c3 and c1_plus_c4 need at least one value each")
    return problems


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigurationError listing every problem."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigurationError([f"syntax: {err}"]) from None
    problems = []
    sections = {}
    for name in cp.sections():
        if name not in SECTION_NAMES:
            problems.append(f"{name}: unknown section")
            continue
        default = getattr(ExperimentConfig(), name)
        types = {f.name: str(f.type) for f in fields(default)}
        values = {}
        for key, raw in cp.items(name):
            if key not in types:
                problems.append(f"{name}.{key}: unknown key")
                continue
            try:
                values[key] = _parser_for(types[key])(raw)
            except (ValueError, KeyError) as err:
                problems.append(f"{name}.{key}: {err}")
        sections[name] = replace(default, **values)
    if problems:
        raise ConfigurationError(problems)
    config = ExperimentConfig(**sections)
    problems = _validate(config)
    if problems:
        raise ConfigurationError(problems)
    return config


def serialize(config: ExperimentConfig) -> str:
    lines = []
    for name in SECTION_NAMES:
        lines.append(f"[{name}]")
        section = getattr(config, name)
        for f in fields(section):
            lines.append(f"{f.name} = {_format(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# builders


def build_grid(config: ExperimentConfig):
    g = config.grid
    return make_grid(g.half_length, g.points, g.half_length, g.points)


def build_masses(config: ExperimentConfig) -> Masses:
    return Masses(config.masses.m1, config.masses.m2)


def build_potential(sec: PotentialSection):
    if sec.type == "zero":
        return Zero()
    if sec.type == "harmonic":
        return Harmonic(sec.kappa, sec.center)
    if sec.type == "linear_window":
        return LinearWindow(sec.g, tuple(sec.window), sec.taper)
    return Bump(sec.amplitude, sec.center, sec.width)


def build_coefficients(nl: NonlinearitySection) -> DGCoefficients:
    return DGCoefficients(nl.c1, nl.c2, nl.c3, nl.c4, nl.c5)


def build_kind(nl: NonlinearitySection):
    if nl.kind == "bbm":
        return BBM(nl.strength)
    if nl.kind == "dg":
        return DG(build_coefficients(nl))
    if nl.kind == "single":
        return Single(nl.tag, nl.weight)
    return Linear()


def build_regularization(config: ExperimentConfig) -> Regularization:
    return Regularization(config.nonlinearity.eps_rel)
