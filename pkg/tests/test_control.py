import math

import numpy as np
import pytest

from legtrainer.control import GainSet, computed_torque, critically_damped_gains, error_envelope
from legtrainer.dynamics import dynamics_terms, forward_dynamics, inverse_dynamics


def test_default_gains_are_critical():
    g = GainSet()
    assert (g.kp, g.kv) == (100.0, 20.0)
    assert g.kv**2 == 4 * g.kp


@pytest.mark.parametrize("kp, kv", [(0, 20), (100, 0), (-1, 2), (float("nan"), 1)])
def test_bad_gains(kp, kv):
    with pytest.raises(ValueError):
        GainSet(kp, kv)


def test_critically_damped():
    assert critically_damped_gains(49.0) == GainSet(49.0, 14.0)


def test_zero_error_is_feed_forward(paper):
    out = computed_torque(paper, GainSet(), (1.1, 2.0), (1.1, 2.0, 0.7))
    assert out.e == 0 and out.e_dot == 0 and out.v == 0.7
    assert out.torque == pytest.approx(inverse_dynamics(paper, 1.1, 2.0, 0.7), rel=1e-14)


def test_closed_loop_error_dynamics(paper):
    # the plant under computed torque obeys e'' + kv e' + kp e = 0 exactly
    gains = GainSet(64.0, 10.0)
    q, w, desired = 2.0, 1.0, (2.2, 1.5, -0.4)
    tau = computed_torque(paper, gains, (q, w), desired).torque
    a = forward_dynamics(paper, q, w, tau)
    e, e_dot = desired[0] - q, desired[1] - w
    e_ddot = desired[2] - a
    assert e_ddot + gains.kv * e_dot + gains.kp * e == pytest.approx(0.0, abs=1e-10)


def test_terms_reused(paper):
    terms = dynamics_terms(paper, 0.9)
    a = computed_torque(paper, GainSet(), (0.9, 1.0), (1.0, 1.0, 0.0), terms)
    b = computed_torque(paper, GainSet(), (0.9, 1.0), (1.0, 1.0, 0.0))
    assert a == b


@pytest.mark.parametrize("kp, kv", [(100, 20), (100, 30), (100, 5)])
def test_envelope_solves_ode(kp, kv):
    t = np.linspace(0.01, 2, 50)
    h = 1e-5
    e = error_envelope(kp, kv, 0.1, -0.3, t)
    ep = (error_envelope(kp, kv, 0.1, -0.3, t + h) - error_envelope(kp, kv, 0.1, -0.3, t - h)) / (2 * h)
    epp = (error_envelope(kp, kv, 0.1, -0.3, t + h) - 2 * e + error_envelope(kp, kv, 0.1, -0.3, t - h)) / h**2
    assert np.allclose(epp + kv * ep + kp * e, 0, atol=1e-3)
    assert error_envelope(kp, kv, 0.1, -0.3, 0.0) == pytest.approx(0.1)


def test_envelope_critical_closed_form():
    assert error_envelope(100, 20, 0.1, 0.0, 0.3) == pytest.approx(0.1 * (1 + 10 * 0.3) * math.exp(-3), rel=1e-14)


def test_envelope_scalar_and_array():
    assert isinstance(error_envelope(100, 20, 1, 0, 0.5), float)
    assert error_envelope(100, 20, 1, 0, [0.5, 1.0]).shape == (2,)
