"""Rest-to-rest quintic crank trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

PAPER_START = 0.7752
PAPER_DURATION = 2.0


@dataclass(frozen=True)
class TrajectorySpec:
    """``q(t) = q0 + c3 t^3 + c4 t^4 + c5 t^5`` on ``[0, T]``."""

    q0: float
    c3: float
    c4: float
    c5: float
    T: float

    @property
    def qf(self) -> float:
        T = self.T
        return self.q0 + self.c3 * T**3 + self.c4 * T**4 + self.c5 * T**5


class DesiredState(NamedTuple):
    q: float
    qd: float
    qdd: float
    clamped: bool = False


def fit_quintic(q0: float, qf: float, T: float) -> TrajectorySpec:
    if not T > 0:
        raise ValueError(f"duration must be positive, got {T!r}")
    delta = qf - q0
    return TrajectorySpec(q0, 10 * delta / T**3, -15 * delta / T**4, 6 * delta / T**5, T)


def paper_trajectory() -> TrajectorySpec:
    """One crank revolution from 0.7752 rad in 2 s."""
    return TrajectorySpec(PAPER_START, 2.5 * math.pi, -1.875 * math.pi, 0.375 * math.pi, PAPER_DURATION)


def evaluate(spec: TrajectorySpec, t: float) -> DesiredState:
    """Desired angle, rate and acceleration; ``t`` outside ``[0, T]`` is clamped."""
    clamped = not 0.0 <= t <= spec.T
    if clamped:
        t = min(max(t, 0.0), spec.T)
    c3, c4, c5 = spec.c3, spec.c4, spec.c5
    t2 = t * t
    return DesiredState(
        spec.q0 + t2 * t * (c3 + t * (c4 + t * c5)),
        t2 * (3 * c3 + t * (4 * c4 + t * 5 * c5)),
        t * (6 * c3 + t * (12 * c4 + t * 20 * c5)),
        clamped,
    )


def cycle_sample(spec: TrajectorySpec, t: float, cycles: int = 1) -> DesiredState:
    """Desired state for repeated cycles; cycle ``n`` starts at ``q0 + 2*pi*n``.

    A time exactly on a cycle boundary belongs to the cycle that ends there.
    """
    n = min(max(math.ceil(t / spec.T) - 1, 0), cycles - 1)
    q, qd, qdd, clamped = evaluate(spec, t - n * spec.T)
    return DesiredState(q + 2 * math.pi * n, qd, qdd, clamped)
