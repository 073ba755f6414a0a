"""Reduced one-coordinate Lagrangian dynamics of the closed chain.

The constrained chain is projected onto the crank angle::

    M(q1) * a1 + 0.5 * M'(q1) * w1**2 + V'(q1) = tau

with ``M`` the effective inertia seen by the motor and ``V`` the total
gravitational potential. Derivatives along ``q1`` come straight from the
exact kinematic construction.
"""
from __future__ import annotations

from typing import NamedTuple

from .kinematics import Construction, construct_points
from .mechanism import MechanismConfig

MIN_INERTIA = 1e-12


class DynamicsError(ArithmeticError):
    pass


class DynamicsTerms(NamedTuple):
    m_eff: float
    c_eff: float
    g_eff: float


def dynamics_terms(config: MechanismConfig, q1: float, cons: Construction | None = None) -> DynamicsTerms:
    """Effective inertia, velocity coupling ``M'/2`` and gravity torque ``V'`` at ``q1``."""
    if cons is None:
        cons = construct_points(config, q1)
    m_eff = c_eff = g_eff = 0.0
    for body in cons.bodies:
        if body.mass == 0.0:
            continue
        inertia = body.mass * body.length**2 / 12.0
        (dx, dy), (ddx, ddy) = body.com.d, body.com.dd
        m_eff += body.mass * (dx * dx + dy * dy) + inertia * body.dtheta**2
        c_eff += body.mass * (dx * ddx + dy * ddy) + inertia * body.dtheta * body.ddtheta
        g_eff += body.mass * config.gravity * dy
    return DynamicsTerms(m_eff, c_eff, g_eff)


def potential_energy(config: MechanismConfig, q1: float) -> float:
    cons = construct_points(config, q1)
    return sum(b.mass * config.gravity * b.com.p[1] for b in cons.bodies)


def kinetic_energy(config: MechanismConfig, q1: float, w1: float) -> float:
    return 0.5 * dynamics_terms(config, q1).m_eff * w1 * w1


def inverse_dynamics(config: MechanismConfig, q1: float, w1: float, a1: float, terms: DynamicsTerms | None = None) -> float:
    """Motor torque needed for crank acceleration ``a1`` at ``(q1, w1)``."""
    m, c, g = terms or dynamics_terms(config, q1)
    return m * a1 + c * w1 * w1 + g


def forward_dynamics(config: MechanismConfig, q1: float, w1: float, torque: float, terms: DynamicsTerms | None = None) -> float:
    """Crank acceleration produced by ``torque`` at ``(q1, w1)``."""
    m, c, g = terms or dynamics_terms(config, q1)
    if m <= MIN_INERTIA:
        raise DynamicsError(f"effective inertia {m:.3e} too small at q1 = {q1:.6f}")
    return (torque - c * w1 * w1 - g) / m
