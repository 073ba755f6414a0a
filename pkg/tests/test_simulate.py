import math

import numpy as np
import pytest

from legtrainer.control import GainSet, error_envelope
from legtrainer.dynamics import inverse_dynamics
from legtrainer.mechanism import MechanismConfig
from legtrainer.simulate import (
    COLUMNS,
    SimLog,
    SimSettings,
    SimulationError,
    desired_log,
    mechanical_energy,
    rk4_step,
    run,
    terminal_state,
    torque_profile,
)
from legtrainer.trajectory import evaluate


def test_rk4_exponential():
    (y,) = rk4_step(lambda t, y: (y[0],), 0.0, (1.0,), 0.1)
    assert abs(y - math.exp(0.1)) <= 1e-7


def test_rk4_oscillator_energy():
    dt, y = 1e-3, (1.0, 0.0)
    for k in range(int(round(10 * 2 * math.pi / dt))):
        y = rk4_step(lambda t, s: (s[1], -s[0]), k * dt, y, dt)
    assert abs(0.5 * (y[0] ** 2 + y[1] ** 2) - 0.5) / 0.5 <= 1e-6


@pytest.mark.parametrize(
    "kwargs",
    [{"dt": 0}, {"dt": -1e-3}, {"duration": 0.0}, {"cycles": 0}, {"cycles": 1.5}, {"mode": "fast"}],
)
def test_settings_rejected(kwargs):
    with pytest.raises(ValueError):
        SimSettings(**kwargs)


def test_step_count(spec):
    assert SimSettings().n_steps(spec) == 2000
    assert SimSettings(cycles=3).n_steps(spec) == 6000
    assert SimSettings(duration=0.5, dt=0.01).n_steps(spec) == 50


def test_closed_loop_log(paper, spec):
    log = run(paper, SimSettings(), spec)
    assert len(log) == 2001
    assert set(log.columns) == set(COLUMNS)
    assert log["q1"][0] == 0.7752
    assert abs(log["q1"][-1] - 7.0584) <= 5e-4
    assert np.max(np.abs(log["e"])) <= 1e-6
    assert np.all(np.isfinite(log["tau"]))


def test_closed_loop_matches_envelope(paper, spec):
    log = run(paper, SimSettings(initial_q1=spec.q0 - 0.1), spec, GainSet(100, 20))
    env = error_envelope(100, 20, 0.1, 0.0, log["t"])
    assert np.max(np.abs(log["e"] - env)) <= 0.05 * 0.1


def test_stiffer_gains_settle_no_slower(paper, spec):
    def settle(kp):
        g = GainSet(kp, 2 * math.sqrt(kp))
        log = run(paper, SimSettings(initial_q1=spec.q0 - 0.1), spec, g)
        above = np.flatnonzero(np.abs(log["e"]) >= 1e-3)
        return log["t"][above[-1] + 1]

    assert settle(200) <= settle(100)


def test_mismatched_model_leaves_error(paper, spec):
    heavy = MechanismConfig(
        paper.l1, paper.l2, paper.l3, paper.l4, paper.extra_links,
        {k: 1.5 * v for k, v in paper.masses.items()}, coupler_fraction=paper.coupler_fraction,
    )  # fmt: skip
    log = run(heavy, SimSettings(), spec, model=paper)
    assert np.max(np.abs(log["e"])) > 1e-6


def test_open_loop_replays_feed_forward(paper, spec):
    prof = torque_profile(paper, spec, 4001)
    t, tau = zip(*prof)
    log = run(paper, SimSettings(mode="open_loop_torque"), spec, torque_series=(t, tau))
    # no feedback, so only integration and interpolation error separate it from the plan
    assert np.max(np.abs(log["e"])) < 1e-3


def test_open_loop_energy_audit(paper, spec):
    prof = torque_profile(paper, spec, 4001)
    t, tau = zip(*prof)
    log = run(paper, SimSettings(mode="open_loop_torque", dt=1e-4), spec, torque_series=(t, tau))
    power = log["tau"] * log["w1"]
    work = float(np.sum((power[1:] + power[:-1]) / 2 * np.diff(log["t"])))
    e0 = mechanical_energy(paper, log["q1"][0], log["w1"][0])
    e1 = mechanical_energy(paper, log["q1"][-1], log["w1"][-1])
    gross = float(np.sum(np.abs(power[1:] + power[:-1]) / 2 * np.diff(log["t"])))
    assert abs(work - (e1 - e0)) <= 1e-3 * gross


def test_open_loop_needs_series(paper, spec):
    with pytest.raises(ValueError):
        run(paper, SimSettings(mode="open_loop_torque"), spec)


def test_kinematic_sweep(paper, spec):
    log = run(paper, SimSettings(mode="kinematic_sweep", dt=2e-3), spec)
    assert log["w1"][0] == pytest.approx(math.pi)
    assert log["q1"][-1] - log["q1"][0] == pytest.approx(2 * math.pi, abs=1e-12)
    assert np.all(np.isnan(log["tau"]))
    assert abs(log["xA"][-1] - log["xA"][0]) < 1e-6 and abs(log["yA"][-1] - log["yA"][0]) < 1e-6


def test_cycle_closure(paper, spec):
    log = run(paper, SimSettings(cycles=2, initial_q1=spec.q0 - 0.1), spec)
    k = 2000
    assert log["t"][k] == pytest.approx(2.0)
    assert abs(log["q1"][k] - (spec.q0 + 2 * math.pi)) <= 1e-5
    assert abs(log["w1"][k]) <= 1e-5


def test_deterministic(paper, spec):
    a = run(paper, SimSettings(dt=4e-3), spec)
    b = run(paper, SimSettings(dt=4e-3), spec)
    for name in COLUMNS:
        assert a[name].tobytes() == b[name].tobytes()


def test_terminal_state_agrees_with_log(paper, spec):
    s = SimSettings(dt=4e-3, initial_q1=spec.q0 + 0.05)
    log = run(paper, s, spec)
    assert terminal_state(paper, s, spec) == (log["q1"][-1], log["w1"][-1])


def test_instability_raises(paper, spec):
    with pytest.raises(SimulationError) as info:
        run(paper, SimSettings(dt=1e-2, initial_q1=spec.q0 - 0.1), spec, GainSet(1e6, 2e3))
    assert info.value.step is not None


def test_torque_profile_endpoints(paper, spec):
    prof = torque_profile(paper, spec, 201)
    assert prof[0][0] == 0.0 and prof[-1][0] == 2.0
    # rest at the same pose one turn apart: both ends hold the same static load
    assert prof[0][1] == pytest.approx(prof[-1][1], abs=1e-12)
    mid = evaluate(spec, 1.0)
    assert prof[100][1] == pytest.approx(inverse_dynamics(paper, mid.q, mid.qd, mid.qdd))


def test_torque_profile_massless(paper, spec):
    cfg = MechanismConfig(
        paper.l1, paper.l2, paper.l3, paper.l4, paper.extra_links,
        dict.fromkeys(paper.masses, 0.0), coupler_fraction=paper.coupler_fraction,
    )  # fmt: skip
    assert all(tau == 0.0 for _, tau in torque_profile(cfg, spec, 11))


def test_desired_log(paper, spec):
    log = desired_log(paper, spec, 1e-2)
    assert len(log) == 201
    assert np.all(log["e"] == 0.0)
    assert log["q1"][-1] == pytest.approx(spec.q0 + 2 * math.pi)


def test_from_rows_shape():
    log = SimLog.from_rows([list(range(len(COLUMNS)))] * 3)
    assert len(log) == 3 and log["tau"][0] == COLUMNS.index("tau")
