"""Fixed-step RK4 simulation of the crank-driven chain and its per-step log."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .control import GainSet, computed_torque
from .dynamics import DynamicsError, dynamics_terms, forward_dynamics, inverse_dynamics, potential_energy
from .kinematics import KinematicsError, construct_points, full_pose, pose_from_construction
from .mechanism import MechanismConfig
from .trajectory import TrajectorySpec, cycle_sample, evaluate

MODES = ("closed_loop", "open_loop_torque", "kinematic_sweep")
COLUMNS = (
    "t", "q1", "q2", "q3", "w1", "w2", "w3", "a1", "a2", "a3",
    "qd", "qd_dot", "qd_ddot", "e", "tau", "xB", "yB", "xA", "yA",
)  # fmt: skip
KNEE, ANKLE = "knee_B", "ankle_A"
MAX_RATE = 1e4


class SimulationError(RuntimeError):
    def __init__(self, message: str, step: int | None = None, t: float | None = None):
        self.step, self.t = step, t
        where = "" if step is None else f"step {step} (t = {t:.6g} s): "
        super().__init__(where + message)


@dataclass(frozen=True)
class SimSettings:
    dt: float = 1e-3
    duration: float | None = None  # None: cycles * trajectory duration
    cycles: int = 1
    mode: str = "closed_loop"
    initial_q1: float | None = None  # None: on the trajectory
    initial_w1: float | None = None  # None: on the trajectory; sweeps use one turn per cycle

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.duration is not None and not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration!r}")
        if int(self.cycles) != self.cycles or self.cycles < 1:
            raise ValueError(f"cycles must be a positive integer, got {self.cycles!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    def total_time(self, spec: TrajectorySpec) -> float:
        return self.duration if self.duration is not None else self.cycles * spec.T

    def n_steps(self, spec: TrajectorySpec) -> int:
        return int(round(self.total_time(spec) / self.dt))


@dataclass
class SimLog:
    """Column-oriented per-step record, one array per CSV column."""

    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["t"]) if self.columns else 0

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "SimLog":
        data = np.asarray(rows, dtype=float).reshape(-1, len(COLUMNS))
        return cls({name: data[:, i].copy() for i, name in enumerate(COLUMNS)})


def rk4_step(derivative: Callable, t: float, y: Sequence[float], dt: float, k1=None) -> tuple[float, ...]:
    """One classical Runge-Kutta step for a small state tuple.

    ``k1`` may be passed when ``derivative(t, y)`` is already known.
    """
    if k1 is None:
        k1 = derivative(t, y)
    k2 = derivative(t + dt / 2, tuple(yi + dt / 2 * ki for yi, ki in zip(y, k1)))
    k3 = derivative(t + dt / 2, tuple(yi + dt / 2 * ki for yi, ki in zip(y, k2)))
    k4 = derivative(t + dt, tuple(yi + dt * ki for yi, ki in zip(y, k3)))
    return tuple(yi + dt / 6 * (a + 2 * b + 2 * c + d) for yi, a, b, c, d in zip(y, k1, k2, k3, k4))


def mechanical_energy(config: MechanismConfig, q1: float, w1: float) -> float:
    m_eff = dynamics_terms(config, q1).m_eff
    return 0.5 * m_eff * w1 * w1 + potential_energy(config, q1)


def _row(config, t, q, w, a, desired, tau, cons=None):
    pose = full_pose(config, q, w, a) if cons is None else pose_from_construction(config, cons, w, a)
    knee = pose.points.get(KNEE, (math.nan, math.nan))
    ankle = pose.points.get(ANKLE, (math.nan, math.nan))
    qd, qd_dot, qd_ddot = desired
    return (
        t, pose.q1, pose.q2, pose.q3, pose.w1, pose.w2, pose.w3, pose.a1, pose.a2, pose.a3,
        qd, qd_dot, qd_ddot, qd - q, tau, knee[0], knee[1], ankle[0], ankle[1],
    )  # fmt: skip


def _torque_law(config, settings, spec, gains, torque_series, model):
    if settings.mode == "closed_loop":
        gains = gains or GainSet()
        model = model or config
        cycles = settings.cycles

        def torque_at(t, q, w, terms):
            desired = cycle_sample(spec, t, cycles)
            return computed_torque(model, gains, (q, w), desired, terms if model is config else None).torque

        return torque_at
    if torque_series is None:
        raise ValueError("open_loop_torque mode needs a torque series")
    times = np.asarray(torque_series[0], dtype=float)
    values = np.asarray(torque_series[1], dtype=float)

    def torque_at(t, q, w, terms):
        return float(np.interp(t, times, values))

    return torque_at


def _plant(config, torque_at):
    def derivative(t, y):
        q, w = y
        terms = dynamics_terms(config, q)
        return (w, forward_dynamics(config, q, w, torque_at(t, q, w, terms), terms))

    return derivative


def run(
    config: MechanismConfig,
    settings: SimSettings,
    spec: TrajectorySpec,
    gains: GainSet | None = None,
    torque_series: tuple[Sequence[float], Sequence[float]] | None = None,
    model: MechanismConfig | None = None,
) -> SimLog:
    """Integrate the chain and log every step.

    ``closed_loop`` tracks ``spec`` with computed torque built on ``model``
    (the plant itself by default). ``open_loop_torque`` replays
    ``torque_series = (times, torques)``, linearly interpolated.
    ``kinematic_sweep`` turns the crank at constant rate with no dynamics.
    """
    cycles = settings.cycles
    dt = settings.dt
    n = settings.n_steps(spec)
    start = cycle_sample(spec, 0.0, cycles)
    q = start.q if settings.initial_q1 is None else settings.initial_q1
    rows = []

    if settings.mode == "kinematic_sweep":
        w = settings.initial_w1
        if w is None:
            w = 2 * math.pi * cycles / settings.total_time(spec)
        for k in range(n + 1):
            t = k * dt
            qk = q + w * t
            try:
                rows.append(_row(config, t, qk, w, 0.0, (qk, w, 0.0), math.nan))
            except KinematicsError as exc:
                raise SimulationError(str(exc), k, t) from None
        return SimLog.from_rows(rows)

    w = start.qd if settings.initial_w1 is None else settings.initial_w1
    torque_at = _torque_law(config, settings, spec, gains, torque_series, model)
    derivative = _plant(config, torque_at)

    for k in range(n + 1):
        t = k * dt
        try:
            cons = construct_points(config, q)
            terms = dynamics_terms(config, q, cons)
            tau = torque_at(t, q, w, terms)
            a = forward_dynamics(config, q, w, tau, terms)
            rows.append(_row(config, t, q, w, a, cycle_sample(spec, t, cycles)[:3], tau, cons))
            if k < n:
                q, w = rk4_step(derivative, t, (q, w), dt, k1=(w, a))
        except (KinematicsError, DynamicsError) as exc:
            raise SimulationError(str(exc), k, t) from None
        if not (math.isfinite(q) and math.isfinite(w)) or abs(w) > MAX_RATE:
            raise SimulationError(f"unstable state q1={q!r}, w1={w!r}", k + 1, (k + 1) * dt)
    return SimLog.from_rows(rows)


def terminal_state(
    config: MechanismConfig,
    settings: SimSettings,
    spec: TrajectorySpec,
    gains: GainSet | None = None,
    torque_series=None,
    model: MechanismConfig | None = None,
) -> tuple[float, float]:
    """Final ``(q1, w1)`` of the same integration as :func:`run`, without logging."""
    if settings.mode == "kinematic_sweep":
        raise ValueError("a kinematic sweep has no integrated state")
    dt, n = settings.dt, settings.n_steps(spec)
    start = cycle_sample(spec, 0.0, settings.cycles)
    q = start.q if settings.initial_q1 is None else settings.initial_q1
    w = start.qd if settings.initial_w1 is None else settings.initial_w1
    torque_at = _torque_law(config, settings, spec, gains, torque_series, model)
    derivative = _plant(config, torque_at)

    for k in range(n):
        try:
            q, w = rk4_step(derivative, k * dt, (q, w), dt)
        except (KinematicsError, DynamicsError) as exc:
            raise SimulationError(str(exc), k, k * dt) from None
        if not (math.isfinite(q) and math.isfinite(w)) or abs(w) > MAX_RATE:
            raise SimulationError(f"unstable state q1={q!r}, w1={w!r}", k + 1, (k + 1) * dt)
    return q, w


def torque_profile(config: MechanismConfig, spec: TrajectorySpec, n_samples: int) -> list[tuple[float, float]]:
    """Feed-forward motor torque along the desired trajectory, endpoints included."""
    if n_samples < 2:
        raise ValueError("need at least two samples")
    out = []
    for t in np.linspace(0.0, spec.T, n_samples):
        d = evaluate(spec, float(t))
        try:
            out.append((float(t), inverse_dynamics(config, d.q, d.qd, d.qdd)))
        except KinematicsError as exc:
            raise SimulationError(str(exc), None, None) from None
    return out


def desired_log(config: MechanismConfig, spec: TrajectorySpec, dt: float, cycles: int = 1) -> SimLog:
    """Log of the mechanism moving exactly on the trajectory, torque by inverse dynamics."""
    n = int(round(cycles * spec.T / dt))
    rows = []
    for k in range(n + 1):
        t = k * dt
        d = cycle_sample(spec, t, cycles)
        try:
            tau = inverse_dynamics(config, d.q, d.qd, d.qdd)
            rows.append(_row(config, t, d.q, d.qd, d.qdd, d[:3], tau))
        except KinematicsError as exc:
            raise SimulationError(str(exc), k, t) from None
    return SimLog.from_rows(rows)
