"""Kinematics, dynamics and computed-torque simulation of a single-motor leg trainer."""

__version__ = "0.1.0"

from .control import ControlOutput, GainSet, computed_torque, critically_damped_gains, error_envelope
from .dynamics import DynamicsTerms, dynamics_terms, forward_dynamics, inverse_dynamics
from .kinematics import (
    LinkageState,
    full_pose,
    solve_acceleration,
    solve_dyad,
    solve_position,
    solve_velocity,
    trace_point,
)
from .mechanism import DyadSpec, MechanismConfig, from_leg_length, paper_config, validate
from .simulate import SimLog, SimSettings, rk4_step, run, torque_profile
from .trajectory import TrajectorySpec, evaluate, fit_quintic, paper_trajectory

__all__ = [
    "ControlOutput", "DynamicsTerms", "DyadSpec", "GainSet", "LinkageState", "MechanismConfig",
    "SimLog", "SimSettings", "TrajectorySpec", "computed_torque", "critically_damped_gains",
    "dynamics_terms", "error_envelope", "evaluate", "fit_quintic", "forward_dynamics", "from_leg_length",
    "full_pose", "inverse_dynamics", "paper_config", "paper_trajectory", "rk4_step", "run",
    "solve_acceleration", "solve_dyad", "solve_position", "solve_velocity", "torque_profile",
    "trace_point", "validate",
]  # fmt: skip
