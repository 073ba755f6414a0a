"""Geometric and inertial description of the eight-link leg trainer.

Frame: crank pivot at the origin, ground link along +x to ``(l4, 0)``,
gravity along -y. Link 4 is the ground and carries no mass.

Link 2 is an extension link. The rocker joint sits at ``coupler_fraction``
of its length from the crank tip, so the four-bar loop sees a coupler of
``l2 * coupler_fraction`` while the full ``l2`` is used for mass, inertia and
the ``coupler_end`` point.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

MASSED_LINKS = (1, 2, 3, 5, 6, 7, 8)
FOLLOWER_LINKS = (5, 6, 7, 8)

#: names of the points every mechanism provides before any dyad is built
BASE_POINTS = ("crank_pivot", "crank_tip", "rocker_pivot", "rocker_tip", "coupler_end")
POINT_ALIASES = {"O": "crank_pivot", "P": "crank_tip", "Q": "rocker_pivot", "R": "rocker_tip"}

_COUPLER_REF = re.compile(r"^coupler@([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)$")

ROD_DENSITY = 1.0  # kg/m for links without a stated mass
LEG_LINK_MASS = 1.0  # kg, links 6 and 8 carry the patient's leg

PAPER_LEG_LENGTH = 0.90
PAPER_COUPLER_FRACTION = 0.5


class MechanismError(ValueError):
    """Raised for malformed mechanism data."""


class InvalidConfigError(MechanismError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


def canonical_point(ref: str) -> str:
    return POINT_ALIASES.get(ref, ref)


def coupler_ref_fraction(ref: str) -> float | None:
    """Return the fraction encoded in a ``coupler@f`` reference, else None."""
    m = _COUPLER_REF.match(ref)
    return float(m.group(1)) if m else None


@dataclass(frozen=True)
class DyadSpec:
    """Two rods joined at an apex, hung from two already-built points.

    ``link_ids[0]`` is the rod ``parent_a -> apex`` and ``link_ids[1]``, if
    present, the rod ``parent_b -> apex``.
    """

    parent_a: str
    parent_b: str
    len_a: float
    len_b: float
    branch: int = 1
    link_ids: tuple[int, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "parent_a", canonical_point(self.parent_a))
        object.__setattr__(self, "parent_b", canonical_point(self.parent_b))
        object.__setattr__(self, "link_ids", tuple(int(i) for i in self.link_ids))

    def segments(self):
        """Yield ``(link_id, parent, length)`` for every massed rod."""
        parents = ((self.parent_a, self.len_a), (self.parent_b, self.len_b))
        for link_id, (parent, length) in zip(self.link_ids, parents):
            yield link_id, parent, length


def default_extra_links(rod: float = 0.45) -> tuple[DyadSpec, ...]:
    """Follower chain used when no dyads are given.

    This is an approximation of the drawn follower topology: every rod has the
    follower length, and the ankle traces a closed stride-shaped loop under
    the hip over one crank turn.
    """
    return (
        DyadSpec("crank_tip", "rocker_tip", rod, rod, -1, (5,), "hip_C"),
        DyadSpec("crank_pivot", "hip_C", rod, rod, -1, (6,), "support_D"),
        DyadSpec("crank_tip", "support_D", rod, rod, -1, (8,), "knee_B"),
        DyadSpec("knee_B", "support_D", rod, rod, -1, (7,), "ankle_A"),
    )


def default_masses(l1: float, l2: float, l3: float, extra_links=()) -> dict[int, float]:
    """Uniform rods at ``ROD_DENSITY``; links 6 and 8 carry ``LEG_LINK_MASS``.

    Follower ids that no dyad carries get zero mass.
    """
    masses = {1: ROD_DENSITY * l1, 2: ROD_DENSITY * l2, 3: ROD_DENSITY * l3}
    masses.update({i: 0.0 for i in FOLLOWER_LINKS})
    for dyad in extra_links:
        for link_id, _, length in dyad.segments():
            if link_id in (6, 8):
                masses[link_id] = LEG_LINK_MASS
            elif link_id in FOLLOWER_LINKS:
                masses[link_id] = ROD_DENSITY * length
    return masses


@dataclass(frozen=True)
class MechanismConfig:
    l1: float
    l2: float
    l3: float
    l4: float
    extra_links: tuple[DyadSpec, ...] = ()
    masses: Mapping[int, float] | None = None
    gravity: float = 9.81
    branch_sign_q2: int = -1
    branch_sign_q3: int = -1
    coupler_fraction: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "extra_links", tuple(self.extra_links))
        if self.masses is None:
            masses = default_masses(self.l1, self.l2, self.l3, self.extra_links)
        else:
            masses = {int(k): float(v) for k, v in self.masses.items()}
        object.__setattr__(self, "masses", masses)

    @property
    def coupler_length(self) -> float:
        """Coupler length seen by the four-bar loop."""
        return self.l2 * self.coupler_fraction

    def dyad_labels(self) -> list[str]:
        return [d.label or f"dyad{i}" for i, d in enumerate(self.extra_links)]


def from_leg_length(leg_length: float, masses=None, extras=None) -> MechanismConfig:
    """Scale the 1:5:2:2.5 (crank:coupler:ground:rocker) mechanism to a leg.

    A 0.90 m leg gives the 18/90/36/45 cm build.
    """
    if not leg_length > 0:
        raise MechanismError(f"leg length must be positive, got {leg_length!r}")
    rod = leg_length / 2.0
    extras = default_extra_links(rod) if extras is None else tuple(extras)
    return MechanismConfig(
        l1=leg_length / 5.0,
        l2=leg_length,
        l3=rod,
        l4=2.0 * leg_length / 5.0,
        extra_links=extras,
        masses=masses,
        coupler_fraction=PAPER_COUPLER_FRACTION,
    )


def paper_config() -> MechanismConfig:
    return from_leg_length(PAPER_LEG_LENGTH)


def fourbar_discriminant(config: MechanismConfig, q1):
    """``A^2 + B^2 - C^2`` of the coupler half-angle equation (vectorised)."""
    q1 = np.asarray(q1, dtype=float)
    l1, l2, l3, l4 = config.l1, config.coupler_length, config.l3, config.l4
    a = 2 * l1 * l2 * np.sin(q1)
    b = 2 * l2 * (l1 * np.cos(q1) - l4)
    c = l1**2 + l2**2 + l4**2 - l3**2 - 2 * l1 * l4 * np.cos(q1)
    return a * a + b * b - c * c


def _structural_diagnostics(config: MechanismConfig) -> list[str]:
    out = []
    for name in ("l1", "l2", "l3", "l4"):
        value = getattr(config, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            out.append(f"non-positive length: {name} = {value!r}")
    if not (0 < config.coupler_fraction <= 1):
        out.append(f"coupler_fraction must lie in (0, 1], got {config.coupler_fraction!r}")
    for name in ("branch_sign_q2", "branch_sign_q3"):
        if getattr(config, name) not in (-1, 1):
            out.append(f"{name} must be -1 or +1, got {getattr(config, name)!r}")
    if not math.isfinite(config.gravity):
        out.append(f"gravity must be finite, got {config.gravity!r}")

    ids = set(config.masses)
    if ids != set(MASSED_LINKS):
        out.append(f"mass ids must be exactly {sorted(MASSED_LINKS)}, got {sorted(ids)}")
    for link_id, m in sorted(config.masses.items()):
        if not (math.isfinite(m) and m >= 0):
            out.append(f"negative mass: link {link_id} = {m!r}")
    if not any(m > 0 for m in config.masses.values()):
        out.append("all masses are zero")

    known = set(BASE_POINTS)
    carried: dict[int, str] = {}
    for i, (dyad, label) in enumerate(zip(config.extra_links, config.dyad_labels())):
        where = f"dyad {label!r}"
        for ref in (dyad.parent_a, dyad.parent_b):
            frac = coupler_ref_fraction(ref)
            if frac is not None:
                if frac < 0:
                    out.append(f"{where}: coupler fraction must be non-negative in {ref!r}")
            elif ref not in known:
                out.append(f"{where}: unresolved parent {ref!r}")
        if dyad.parent_a == dyad.parent_b:
            out.append(f"{where}: parents must be distinct")
        if not (dyad.len_a > 0 and dyad.len_b > 0):
            out.append(f"{where}: non-positive length")
        if dyad.branch not in (-1, 1):
            out.append(f"{where}: branch must be -1 or +1")
        if not 1 <= len(dyad.link_ids) <= 2:
            out.append(f"{where}: must carry one or two link ids")
        for link_id in dyad.link_ids:
            if link_id not in FOLLOWER_LINKS:
                out.append(f"{where}: link id {link_id} is not a follower link (5-8)")
            elif link_id in carried:
                out.append(f"{where}: link {link_id} already carried by {carried[link_id]!r}")
            else:
                carried[link_id] = label
        if label in known:
            out.append(f"{where}: label collides with an existing point")
        known.add(label)
    for link_id in FOLLOWER_LINKS:
        if config.masses.get(link_id, 0.0) > 0 and link_id not in carried:
            out.append(f"link {link_id} has mass but no dyad carries it")
    return out


def validate(config: MechanismConfig, step: float = 1e-3) -> list[str]:
    """Return every violated invariant; an empty list means the config is usable.

    Besides structural checks, the crank is swept over one revolution at
    ``step`` and every sample must be assemblable, dyads included.
    """
    diagnostics = _structural_diagnostics(config)
    if diagnostics:
        return diagnostics

    q1 = np.arange(0.0, 2 * np.pi, step)
    bad = q1[fourbar_discriminant(config, q1) < 0]
    if bad.size:
        return [
            "crank cannot complete revolution: four-bar unassemblable for "
            f"q1 in [{bad.min():.4f}, {bad.max():.4f}] rad"
        ]

    from .kinematics import KinematicsError, construct_points

    for q in q1:
        try:
            construct_points(config, float(q))
        except KinematicsError as exc:
            return [f"crank cannot complete revolution: {exc} at q1 = {q:.4f} rad"]
    return []


def ensure_valid(config: MechanismConfig) -> MechanismConfig:
    diagnostics = validate(config)
    if diagnostics:
        raise InvalidConfigError(diagnostics)
    return config
