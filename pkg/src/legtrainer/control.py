"""Computed-torque tracking of the crank angle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import DynamicsTerms, dynamics_terms
from .mechanism import MechanismConfig


@dataclass(frozen=True)
class GainSet:
    kp: float = 100.0
    kv: float = 20.0

    def __post_init__(self):
        if not (self.kp > 0 and self.kv > 0):
            raise ValueError(f"gains must be positive, got kp={self.kp!r}, kv={self.kv!r}")


def critically_damped_gains(kp: float) -> GainSet:
    if not kp > 0:
        raise ValueError(f"kp must be positive, got {kp!r}")
    return GainSet(kp, 2.0 * math.sqrt(kp))


class ControlOutput(NamedTuple):
    torque: float
    v: float
    e: float
    e_dot: float


def computed_torque(
    config: MechanismConfig,
    gains: GainSet,
    state: tuple[float, float],
    desired: tuple[float, float, float],
    terms: DynamicsTerms | None = None,
) -> ControlOutput:
    """Feedback-linearising torque; ``terms`` may be passed if already known at ``state``."""
    q, w = state
    q_d, qd_d, qdd_d = desired[:3]
    e, e_dot = q_d - q, qd_d - w
    v = qdd_d + gains.kv * e_dot + gains.kp * e
    m, c, g = terms or dynamics_terms(config, q)
    return ControlOutput(m * v + c * w * w + g, v, e, e_dot)


def error_envelope(kp: float, kv: float, e0: float, edot0: float, t):
    """Solution of ``e'' + kv e' + kp e = 0``; ``t`` may be an array.

    Takes raw gains so the undamped and unstable cases stay available.
    """
    t = np.asarray(t, dtype=float)
    disc = kv * kv - 4.0 * kp
    alpha = -kv / 2.0
    if abs(disc) <= 1e-12 * max(kv * kv, 4.0 * abs(kp), 1.0):
        out = (e0 + (edot0 - alpha * e0) * t) * np.exp(alpha * t)
    elif disc > 0:
        r = math.sqrt(disc) / 2.0
        s1, s2 = alpha + r, alpha - r
        c1 = (edot0 - s2 * e0) / (s1 - s2)
        c2 = e0 - c1
        out = c1 * np.exp(s1 * t) + c2 * np.exp(s2 * t)
    else:
        wd = math.sqrt(-disc) / 2.0
        out = np.exp(alpha * t) * (e0 * np.cos(wd * t) + (edot0 - alpha * e0) / wd * np.sin(wd * t))
    return float(out) if out.ndim == 0 else out
