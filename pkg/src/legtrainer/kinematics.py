"""Closed-form four-bar kinematics and dyad construction of the follower links.

All point derivatives are taken with respect to the crank angle ``q1``; time
rates follow from ``v = dp * w1`` and ``acc = ddp * w1**2 + dp * a1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .mechanism import BASE_POINTS, MechanismConfig, canonical_point, coupler_ref_fraction

TWO_PI = 2.0 * math.pi
HALF_ANGLE_EPS = 1e-12
SINGULAR_SIN = 1e-9
DYAD_TOL = 1e-12

Vec = tuple[float, float]


class KinematicsError(ArithmeticError):
    """Base class for poses the solvers cannot produce."""


class UnassemblableError(KinematicsError):
    pass


class SingularityError(KinematicsError):
    pass


def wrap_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    r = math.remainder(angle, TWO_PI)
    return math.pi if r == -math.pi else r


class LoopClosureTerms(NamedTuple):
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float


def loop_terms(config: MechanismConfig, q1: float) -> LoopClosureTerms:
    l1, l2, l3, l4 = config.l1, config.coupler_length, config.l3, config.l4
    s, c = math.sin(q1), math.cos(q1)
    return LoopClosureTerms(
        A=2 * l1 * l2 * s,
        B=2 * l2 * (l1 * c - l4),
        C=l1**2 + l2**2 + l4**2 - l3**2 - 2 * l1 * l4 * c,
        D=2 * l1 * l3 * s,
        E=2 * l3 * (l1 * c - l4),
        F=l2**2 - l1**2 - l3**2 - l4**2 + 2 * l1 * l4 * c,
    )


def _half_angle_root(a: float, b: float, c: float, sign: int, what: str) -> float:
    # root of b*cos(q) + a*sin(q) + c = 0
    disc = a * a + b * b - c * c
    if disc < 0:
        raise UnassemblableError(f"negative discriminant {disc:.3e} solving {what}")
    root = math.sqrt(disc)
    num = a + sign * root
    den = b - c
    if abs(den) >= HALF_ANGLE_EPS:
        return wrap_angle(2.0 * math.atan(num / den))
    if abs(num) >= HALF_ANGLE_EPS:
        return wrap_angle(2.0 * math.atan2(num, den))
    # same root through the product of the two half-angle tangents
    alt_num = -(b + c)
    alt_den = a - sign * root
    if abs(alt_num) < HALF_ANGLE_EPS and abs(alt_den) < HALF_ANGLE_EPS:
        raise SingularityError(f"degenerate half-angle equation solving {what}")
    return wrap_angle(2.0 * math.atan2(alt_num, alt_den))


def solve_position(config: MechanismConfig, q1: float) -> tuple[float, float, LoopClosureTerms]:
    """Coupler angle ``q2`` and rocker angle ``q3`` for a crank angle ``q1``."""
    terms = loop_terms(config, q1)
    q2 = _half_angle_root(terms.A, terms.B, terms.C, config.branch_sign_q2, "q2")
    q3 = _half_angle_root(terms.D, terms.E, terms.F, config.branch_sign_q3, "q3")
    return q2, q3, terms


def loop_residual(config: MechanismConfig, q1: float, q2: float, q3: float) -> float:
    l1, l2, l3, l4 = config.l1, config.coupler_length, config.l3, config.l4
    rx = l1 * math.cos(q1) + l2 * math.cos(q2) - l4 - l3 * math.cos(q3)
    ry = l1 * math.sin(q1) + l2 * math.sin(q2) - l3 * math.sin(q3)
    return math.hypot(rx, ry)


def _check_transmission(q2: float, q3: float) -> float:
    s23 = math.sin(q2 - q3)
    if abs(s23) < SINGULAR_SIN:
        raise SingularityError(f"coupler and rocker collinear (sin(q2 - q3) = {s23:.3e})")
    return s23


def solve_velocity(config: MechanismConfig, q1: float, q2: float, q3: float, w1: float) -> tuple[float, float]:
    s23 = _check_transmission(q2, q3)
    l1, l2, l3 = config.l1, config.coupler_length, config.l3
    w2 = -w1 * l1 * math.sin(q1 - q3) / (l2 * s23)
    w3 = w1 * l1 * math.sin(q1 - q2) / (l3 * -s23)
    return w2, w3


def solve_acceleration(
    config: MechanismConfig,
    q1: float,
    q2: float,
    q3: float,
    w1: float,
    w2: float,
    w3: float,
    a1: float,
) -> tuple[float, float]:
    """Second derivative of loop closure, crank acceleration included.

    With ``a1 = 0`` this is the textbook constant-speed form.
    """
    s23 = _check_transmission(q2, q3)
    l1, l2, l3 = config.l1, config.coupler_length, config.l3
    a2 = (
        -a1 * l1 * math.sin(q1 - q3)
        - w1 * w1 * l1 * math.cos(q1 - q3)
        - w2 * w2 * l2 * math.cos(q2 - q3)
        + w3 * w3 * l3
    ) / (l2 * s23)
    a3 = (
        a1 * l1 * math.sin(q1 - q2)
        + w1 * w1 * l1 * math.cos(q1 - q2)
        + w2 * w2 * l2
        - w3 * w3 * l3 * math.cos(q3 - q2)
    ) / (l3 * -s23)
    return a2, a3


def solve_dyad(p_a: Vec, p_b: Vec, len_a: float, len_b: float, branch: int) -> Vec:
    """Apex at ``len_a`` from ``p_a`` and ``len_b`` from ``p_b``.

    ``branch`` is the sign of ``(p_b - p_a) x (apex - p_a)``.
    """
    dx, dy = p_b[0] - p_a[0], p_b[1] - p_a[1]
    d = math.hypot(dx, dy)
    if d < DYAD_TOL:
        raise UnassemblableError("dyad parents coincide")
    if d > len_a + len_b + DYAD_TOL:
        raise UnassemblableError(f"dyad circles disjoint (d = {d:.6g} > {len_a + len_b:.6g})")
    if d < abs(len_a - len_b) - DYAD_TOL:
        raise UnassemblableError(f"dyad circle contained (d = {d:.6g} < {abs(len_a - len_b):.6g})")
    ux, uy = dx / d, dy / d
    x = (d * d + len_a * len_a - len_b * len_b) / (2 * d)
    h = branch * math.sqrt(max(len_a * len_a - x * x, 0.0))
    return (p_a[0] + x * ux - h * uy, p_a[1] + x * uy + h * ux)


def _dyad_rates(x: Vec, a, b) -> tuple[Vec, Vec]:
    # differentiate |x - a|^2 = const, |x - b|^2 = const twice along q1
    (pa, da, dda), (pb, db, ddb) = a, b
    ra = (x[0] - pa[0], x[1] - pa[1])
    rb = (x[0] - pb[0], x[1] - pb[1])
    det = ra[0] * rb[1] - ra[1] * rb[0]
    scale = math.hypot(*ra) * math.hypot(*rb)
    if abs(det) < SINGULAR_SIN * scale:
        raise SingularityError("dyad rods collinear, apex rate undefined")

    def solve(r1, r2):
        return ((r1 * rb[1] - ra[1] * r2) / det, (ra[0] * r2 - rb[0] * r1) / det)

    dx = solve(ra[0] * da[0] + ra[1] * da[1], rb[0] * db[0] + rb[1] * db[1])
    va = (dx[0] - da[0], dx[1] - da[1])
    vb = (dx[0] - db[0], dx[1] - db[1])
    ddx = solve(
        ra[0] * dda[0] + ra[1] * dda[1] - (va[0] ** 2 + va[1] ** 2),
        rb[0] * ddb[0] + rb[1] * ddb[1] - (vb[0] ** 2 + vb[1] ** 2),
    )
    return dx, ddx


class PointJet(NamedTuple):
    """Position with first and second derivatives along ``q1``."""

    p: Vec
    d: Vec
    dd: Vec


class Body(NamedTuple):
    """A massed rod: centre-of-mass jet and orientation derivatives along ``q1``."""

    link_id: int
    mass: float
    length: float
    com: PointJet
    dtheta: float
    ddtheta: float


@dataclass(frozen=True)
class Construction:
    """Every point of the mechanism at one crank angle, with ``q1``-derivatives."""

    q1: float
    q2: float
    q3: float
    dq2: float
    dq3: float
    ddq2: float
    ddq3: float
    points: dict[str, PointJet]
    bodies: tuple[Body, ...]


def _midpoint(a: PointJet, b: PointJet) -> PointJet:
    (p, d, dd), (q, e, ee) = a, b
    return PointJet(
        ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2),
        ((d[0] + e[0]) / 2, (d[1] + e[1]) / 2),
        ((dd[0] + ee[0]) / 2, (dd[1] + ee[1]) / 2),
    )


def _along(start: PointJet, length: float, q: float, dq: float, ddq: float) -> PointJet:
    c, s = math.cos(q), math.sin(q)
    p, d, dd = start
    return PointJet(
        (p[0] + length * c, p[1] + length * s),
        (d[0] - length * s * dq, d[1] + length * c * dq),
        (dd[0] - length * (s * ddq + c * dq * dq), dd[1] + length * (c * ddq - s * dq * dq)),
    )


def _rod_body(link_id: int, mass: float, tail: PointJet, head: PointJet) -> Body:
    r = (head.p[0] - tail.p[0], head.p[1] - tail.p[1])
    dr = (head.d[0] - tail.d[0], head.d[1] - tail.d[1])
    ddr = (head.dd[0] - tail.dd[0], head.dd[1] - tail.dd[1])
    n2 = r[0] ** 2 + r[1] ** 2
    cross_d = r[0] * dr[1] - r[1] * dr[0]
    dtheta = cross_d / n2
    ddtheta = (r[0] * ddr[1] - r[1] * ddr[0]) / n2 - 2 * (r[0] * dr[0] + r[1] * dr[1]) * cross_d / n2**2
    return Body(link_id, mass, math.sqrt(n2), _midpoint(tail, head), dtheta, ddtheta)


def construct_points(config: MechanismConfig, q1: float) -> Construction:
    """Solve the loop and build every dyad apex and COM at crank angle ``q1``."""
    q2, q3, _ = solve_position(config, q1)
    dq2, dq3 = solve_velocity(config, q1, q2, q3, 1.0)
    ddq2, ddq3 = solve_acceleration(config, q1, q2, q3, 1.0, dq2, dq3, 0.0)

    fixed = lambda x, y: PointJet((x, y), (0.0, 0.0), (0.0, 0.0))  # noqa: E731
    origin = fixed(0.0, 0.0)
    crank_tip = _along(origin, config.l1, q1, 1.0, 0.0)
    rocker_pivot = fixed(config.l4, 0.0)
    pts = {
        "crank_pivot": origin,
        "crank_tip": crank_tip,
        "rocker_pivot": rocker_pivot,
        "rocker_tip": _along(rocker_pivot, config.l3, q3, dq3, ddq3),
        "coupler_end": _along(crank_tip, config.l2, q2, dq2, ddq2),
    }

    def resolve(ref: str) -> PointJet:
        if ref in pts:
            return pts[ref]
        frac = coupler_ref_fraction(ref)
        if frac is None:
            raise KeyError(ref)
        return _along(crank_tip, frac * config.l2, q2, dq2, ddq2)

    masses = config.masses
    bodies = [
        Body(1, masses.get(1, 0.0), config.l1, _midpoint(origin, crank_tip), 1.0, 0.0),
        Body(2, masses.get(2, 0.0), config.l2, _along(crank_tip, config.l2 / 2, q2, dq2, ddq2), dq2, ddq2),
        Body(3, masses.get(3, 0.0), config.l3, _midpoint(rocker_pivot, pts["rocker_tip"]), dq3, ddq3),
    ]

    for dyad, label in zip(config.extra_links, config.dyad_labels()):
        a, b = resolve(dyad.parent_a), resolve(dyad.parent_b)
        try:
            apex = solve_dyad(a.p, b.p, dyad.len_a, dyad.len_b, dyad.branch)
            d, dd = _dyad_rates(apex, a, b)
        except KinematicsError as exc:
            raise type(exc)(f"dyad {label!r}: {exc}") from None
        pts[label] = jet = PointJet(apex, d, dd)
        for link_id, parent, _ in dyad.segments():
            bodies.append(_rod_body(link_id, masses.get(link_id, 0.0), resolve(parent), jet))

    for body in bodies:
        pts[f"com{body.link_id}"] = body.com
    return Construction(q1, q2, q3, dq2, dq3, ddq2, ddq3, pts, tuple(bodies))


@dataclass(frozen=True)
class LinkageState:
    q1: float
    q2: float
    q3: float
    w1: float
    w2: float
    w3: float
    a1: float
    a2: float
    a3: float
    points: dict[str, Vec]


def full_pose(config: MechanismConfig, q1: float, w1: float = 0.0, a1: float = 0.0) -> LinkageState:
    """Angles, rates and every joint/COM position at one instant."""
    try:
        cons = construct_points(config, q1)
    except KinematicsError as exc:
        raise type(exc)(f"q1 = {q1:.6f}: {exc}") from None
    return pose_from_construction(config, cons, w1, a1)


def pose_from_construction(config: MechanismConfig, cons: Construction, w1: float, a1: float) -> LinkageState:
    q1 = cons.q1
    w2, w3 = cons.dq2 * w1, cons.dq3 * w1
    a2, a3 = solve_acceleration(config, q1, cons.q2, cons.q3, w1, w2, w3, a1)
    points = {label: jet.p for label, jet in cons.points.items()}
    return LinkageState(q1, cons.q2, cons.q3, w1, w2, w3, a1, a2, a3, points)


def point_labels(config: MechanismConfig) -> list[str]:
    labels = list(BASE_POINTS) + config.dyad_labels()
    labels += [f"com{i}" for i in (1, 2, 3)]
    labels += [f"com{i}" for d in config.extra_links for i, _, _ in d.segments()]
    return labels


def trace_point(config: MechanismConfig, label: str, q1_samples) -> list[tuple[float, float | None, float | None]]:
    """Position of one labelled point over crank samples.

    Samples where the pose cannot be built come back as ``(q1, None, None)``.
    """
    label = canonical_point(label)
    if label not in point_labels(config) and coupler_ref_fraction(label) is None:
        raise KeyError(f"unknown point label {label!r}")
    out = []
    for q1 in q1_samples:
        q1 = float(q1)
        try:
            cons = construct_points(config, q1)
        except KinematicsError:
            out.append((q1, None, None))
            continue
        if label in cons.points:
            x, y = cons.points[label].p
        else:
            frac = coupler_ref_fraction(label)
            p = cons.points["crank_tip"].p
            x = p[0] + frac * config.l2 * math.cos(cons.q2)
            y = p[1] + frac * config.l2 * math.sin(cons.q2)
        out.append((q1, x, y))
    return out
