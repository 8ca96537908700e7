import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from usvswarm import dynamics as dyn
from usvswarm.dynamics import (ActuatorCommand, DynamicsParams, NumericalBlowUp, VesselState,
                               rotation, saturate, state_derivative, step)

P = DynamicsParams.identified()


def test_rotation_identity_and_quarter_turn():
    assert np.allclose(rotation(0.0), np.eye(2), atol=0, rtol=0)
    assert np.allclose(rotation(math.pi / 2), [[0, -1], [1, 0]], atol=1e-15)


@given(st.floats(-50, 50, allow_nan=False))
def test_rotation_is_orthogonal(a):
    S = rotation(a)
    assert np.allclose(S @ S.T, np.eye(2), atol=1e-12)
    assert math.isclose(np.linalg.det(S), 1.0, abs_tol=1e-12)


def test_zero_state_zero_command_is_equilibrium():
    d = state_derivative(VesselState(), ActuatorCommand(), P)
    assert d.as_array().tolist() == [0.0] * 6


def test_surge_decay_substitution():
    d = state_derivative(VesselState(w=1.0), ActuatorCommand(), P)
    assert d.w == pytest.approx(-0.098, abs=1e-15)
    assert d.v == 0.0 and d.r == 0.0
    assert (d.x, d.y) == (1.0, 0.0)


def test_sway_yaw_coupling_in_surge():
    d = state_derivative(VesselState(v=1.0, r=0.5), ActuatorCommand(), P)
    assert d.w == pytest.approx(0.0015, abs=1e-15)


def test_non_finite_state_rejected():
    with pytest.raises(ValueError):
        state_derivative(VesselState(w=math.nan), ActuatorCommand(), P)


def test_step_keeps_equilibrium():
    for dt in (0.001, 0.01, 0.5):
        assert step(VesselState(x=3.0, y=-1.0, psi=2.0), ActuatorCommand(), P, dt) == \
            VesselState(x=3.0, y=-1.0, psi=2.0)


def _integrate(s, u, seconds, dt=0.01):
    for _ in range(int(round(seconds / dt))):
        s = step(s, u, P, dt)
    return s


def test_free_surge_decay_matches_exponential():
    s = _integrate(VesselState(w=1.0), ActuatorCommand(), 10.0)
    assert s.w == pytest.approx(math.exp(P.k1 * 10.0), abs=1e-6)


def test_free_yaw_decay_matches_exponential():
    s = _integrate(VesselState(r=0.1), ActuatorCommand(), 10.0)
    assert s.r == pytest.approx(0.1 * math.exp(P.k4 * 10.0), abs=1e-6)


def test_saturate_steering_clamped_and_flagged():
    out = saturate(ActuatorCommand(1000.0, 0.5), P)
    assert out.tau2 == pytest.approx(0.3491, abs=1e-4)
    assert out.saturated == (0, 1) and out.flagged


def test_saturate_inside_unchanged():
    out = saturate(ActuatorCommand(1000.0, 0.1), P)
    assert (out.tau1, out.tau2, out.flagged) == (1000.0, 0.1, False)


def test_saturate_propeller_lower_bound():
    out = saturate(ActuatorCommand(0.0, 0.0), P)
    assert out.tau1 == 600.0 and out.saturated == (-1, 0)


@given(st.floats(-1e5, 1e5), st.floats(-5, 5))
def test_saturate_output_always_in_range(t1, t2):
    out = saturate(ActuatorCommand(t1, t2), P)
    assert P.tau1_range[0] <= out.tau1 <= P.tau1_range[1]
    assert P.tau2_range[0] <= out.tau2 <= P.tau2_range[1]
    assert out.flagged == (out.tau1 != t1 or out.tau2 != t2)


def test_steering_units():
    assert DynamicsParams.identified("rad").k5 == 0.019
    assert DynamicsParams.identified("deg").k5 == pytest.approx(0.019 * 180 / math.pi)
    with pytest.raises(ValueError):
        DynamicsParams.identified("grad")


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        DynamicsParams.identified(k3=0.0)
    with pytest.raises(ValueError):
        DynamicsParams.identified(tau1_range=(5.0, 5.0))


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    states = rng.normal(size=(4, 6))
    taus = rng.normal(size=(4, 2)) * [100, 0.2]
    stacked = dyn.step_array(states, taus, P, 0.01)
    for i in range(4):
        one = step(VesselState.from_array(states[i]), ActuatorCommand(*taus[i]), P, 0.01)
        assert np.array_equal(one.as_array(), stacked[i])


def test_blow_up_reports_time_and_vessel():
    states = np.zeros((2, 6))
    states[1, 3] = 1e308
    with pytest.raises(NumericalBlowUp) as info:
        dyn.step_array(states, np.array([[0, 0], [1e308, 0]]), P, 1.0, t=4.2)
    assert info.value.time == 4.2 and info.value.vessel == 1


@settings(max_examples=30)
@given(st.floats(0, 196), st.floats(-0.3, 0.3))
def test_turning_circle_geometry(t1, t2):
    # with constant commands the steady yaw rate is -k5 tau2 / k4
    s = _integrate(VesselState(), ActuatorCommand(t1, t2), 60.0, dt=0.05)
    assert s.r == pytest.approx(-P.k5 * t2 / P.k4, rel=1e-2, abs=1e-6)
