"""Plain-text ``key = value`` run configuration and its resolved manifest.

Keys::

    l1 l2 l3 l4 coupler_fraction gravity      mechanism geometry (m, m/s^2)
    mass.N                                    link mass in kg, N in 1..8 except 4
    branch.q2 branch.q3                       assembly branch, -1 or +1
    dyad = a,b,len_a,len_b,branch,ids,label   follower dyad, repeatable; ids like 5+6
    q0 qf T                                   rest-to-rest crank trajectory
    kp kv                                     computed-torque gains
    dt duration cycles initial_q1 initial_w1  integration settings

Anything missing takes the default for the 0.90 m leg build. Giving any
``dyad`` line replaces the default follower chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .control import GainSet
from .mechanism import MASSED_LINKS, PAPER_COUPLER_FRACTION, DyadSpec, MechanismConfig, default_extra_links, default_masses
from .simulate import SimSettings
from .trajectory import PAPER_DURATION, PAPER_START, TrajectorySpec, fit_quintic

SCALAR_KEYS = {
    "l1": 0.18,
    "l2": 0.90,
    "l3": 0.45,
    "l4": 0.36,
    "coupler_fraction": PAPER_COUPLER_FRACTION,
    "gravity": 9.81,
    "branch.q2": -1,
    "branch.q3": -1,
    "q0": PAPER_START,
    "qf": None,  # q0 + 2*pi
    "T": PAPER_DURATION,
    "kp": 100.0,
    "kv": 20.0,
    "dt": 1e-3,
    "duration": None,  # cycles * T
    "cycles": 1,
    "initial_q1": None,  # q0
    "initial_w1": None,  # trajectory rate, or one turn per cycle for sweeps
}
INT_KEYS = {"branch.q2", "branch.q3", "cycles"}
MASS_KEYS = {f"mass.{i}" for i in MASSED_LINKS}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass
class RunConfig:
    mechanism: MechanismConfig
    settings: SimSettings
    gains: GainSet
    trajectory: TrajectorySpec
    values: dict = field(default_factory=dict)
    defaults_applied: list[str] = field(default_factory=list)


def _number(text: str, key: str, line: int):
    try:
        value = int(text) if key in INT_KEYS else float(text)
    except ValueError:
        kind = "an integer" if key in INT_KEYS else "a number"
        raise ConfigError(f"{key} must be {kind}, got {text!r}", line) from None
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {text!r}", line)
    return value


def _dyad(text: str, line: int) -> DyadSpec:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 7:
        raise ConfigError("dyad needs parent_a,parent_b,len_a,len_b,branch,link_ids,label", line)
    a, b, la, lb, branch, ids, label = parts
    try:
        return DyadSpec(a, b, float(la), float(lb), int(branch), tuple(int(i) for i in ids.split("+") if i), label)
    except ValueError as exc:
        raise ConfigError(f"bad dyad entry: {exc}", line) from None


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse a config file; ``overrides`` (e.g. from the command line) win over it."""
    raw: dict = {}
    dyads: list[DyadSpec] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        if key == "dyad":
            dyads.append(_dyad(value, lineno))
            continue
        if key not in SCALAR_KEYS and key not in MASS_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        number = _number(value, key, lineno)
        if (key[0] == "l" and key[1:].isdigit() or key in ("dt", "T", "duration")) and number <= 0:
            raise ConfigError(f"non-positive {key} = {value}", lineno)
        if key in MASS_KEYS and number < 0:
            raise ConfigError(f"negative {key} = {value}", lineno)
        if key == "cycles" and number < 1:
            raise ConfigError(f"cycles must be at least 1, got {value}", lineno)
        raw[key] = (number, lineno)
    for key, value in (overrides or {}).items():
        raw[key] = (value, None)
    return resolve(raw, dyads)


def resolve(raw: dict, dyads: list[DyadSpec]) -> RunConfig:
    given = {k: v for k, (v, _) in raw.items()}
    defaults_applied = []

    def get(key):
        if key in given:
            return given[key]
        defaults_applied.append(key)
        return SCALAR_KEYS[key]

    l1, l2, l3, l4 = (get(k) for k in ("l1", "l2", "l3", "l4"))
    if dyads:
        extras = tuple(dyads)
    else:
        defaults_applied.append("dyad")
        extras = default_extra_links(l3)
    masses = default_masses(l1, l2, l3, extras)
    for i in MASSED_LINKS:
        if f"mass.{i}" in given:
            masses[i] = given[f"mass.{i}"]
        else:
            defaults_applied.append(f"mass.{i}")
    mechanism = MechanismConfig(
        l1=l1,
        l2=l2,
        l3=l3,
        l4=l4,
        extra_links=extras,
        masses=masses,
        gravity=get("gravity"),
        branch_sign_q2=get("branch.q2"),
        branch_sign_q3=get("branch.q3"),
        coupler_fraction=get("coupler_fraction"),
    )

    q0 = get("q0")
    qf = get("qf")
    if qf is None:
        qf = q0 + 2 * math.pi
    T = get("T")
    trajectory = fit_quintic(q0, qf, T)

    try:
        gains = GainSet(get("kp"), get("kv"))
        cycles = get("cycles")
        duration = get("duration")
        settings = SimSettings(
            dt=get("dt"),
            duration=duration if duration is not None else cycles * T,
            cycles=cycles,
            initial_q1=q0 if (q1 := get("initial_q1")) is None else q1,
            initial_w1=get("initial_w1"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    values = {
        "l1": l1, "l2": l2, "l3": l3, "l4": l4,
        "coupler_fraction": mechanism.coupler_fraction,
        "gravity": mechanism.gravity,
        "branch.q2": mechanism.branch_sign_q2,
        "branch.q3": mechanism.branch_sign_q3,
        **{f"mass.{i}": masses[i] for i in MASSED_LINKS},
        "q0": q0, "qf": qf, "T": T,
        "kp": gains.kp, "kv": gains.kv,
        "dt": settings.dt, "duration": settings.duration, "cycles": settings.cycles,
        "initial_q1": settings.initial_q1, "initial_w1": settings.initial_w1,
    }  # fmt: skip
    return RunConfig(mechanism, settings, gains, trajectory, values, defaults_applied)


def format_value(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def format_dyad(d: DyadSpec) -> str:
    ids = "+".join(str(i) for i in d.link_ids)
    return f"{d.parent_a},{d.parent_b},{d.len_a!r},{d.len_b!r},{d.branch},{ids},{d.label}"


def render_manifest(run: RunConfig, header: dict[str, str] | None = None) -> str:
    """Fully resolved configuration; it parses back to the same run."""
    lines = [f"# {k}: {v}" for k, v in (header or {}).items()]
    lines.append(f"# defaults applied: {', '.join(run.defaults_applied) or 'none'}")
    for key, value in run.values.items():
        if value is None:
            continue  # resolved at run time from the trajectory
        lines.append(f"{key} = {format_value(value)}")
    lines += [f"dyad = {format_dyad(d)}" for d in run.mechanism.extra_links]
    return "\n".join(lines) + "\n"
