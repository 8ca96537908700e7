import math

import numpy as np
import pytest

from usvswarm.conversion import ReferenceSignal
from usvswarm.dynamics import TAU1_MODEL_RANGE, DynamicsParams, VesselState
from usvswarm.regulation import (ErrorCoordinates, RegGains, RegulatorState, backstepping_tau1,
                                 backstepping_tau2, error_subsystem_monitor, pid_tau1, pid_tau2,
                                 simulate_tracking)
from usvswarm.verify import smooth_reference

P = DynamicsParams.identified("rad")
G = RegGains()


def test_gain_validation():
    with pytest.raises(ValueError):
        RegGains(kappa4=0.0)
    with pytest.raises(ValueError):
        RegGains(kappa1=0.01, kappa2=1.0)


def test_tau1_feedforward_holds_speed():
    ref = ReferenceSignal(w_r=2.0, psi_r=0.0)
    tau1, _ = backstepping_tau1(VesselState(w=2.0), ref, RegulatorState(), G, P, 0.2)
    assert tau1 == pytest.approx(-P.k1 * 2.0 / P.k3)


def test_tau1_zero():
    tau1, _ = backstepping_tau1(VesselState(), ReferenceSignal(0.0, 0.0), RegulatorState(), G, P, 0.2)
    assert tau1 == 0.0


def test_tau1_substitution():
    s = VesselState(w=2.0, v=0.1, r=0.2)
    ref = ReferenceSignal(w_r=1.5, psi_r=0.0)
    tau1, _ = backstepping_tau1(s, ref, RegulatorState(), G, P, 0.2)
    assert tau1 == pytest.approx((0.098 * 2 - 0.003 * 0.02 - 0.0005) / 0.005, rel=1e-12)


def test_tau2_equilibrium():
    ref = ReferenceSignal(w_r=1.0, psi_r=0.4)
    assert backstepping_tau2(VesselState(psi=0.4), ref, G, P) == 0.0


def test_tau2_substitution():
    k3, k4 = G.kappa3, G.kappa4
    tau2 = backstepping_tau2(VesselState(psi=0.1), ReferenceSignal(1.0, 0.0), G, P)
    expected = (-k3 ** 2 * 0.1 + (k3 + k4) * k3 * 0.1) / (-0.019)
    assert tau2 == pytest.approx(expected, rel=1e-12)
    assert k3 ** 2 * 0.1 == pytest.approx(0.0005776)
    assert (k3 + k4) * k3 * 0.1 == pytest.approx(0.0037544)


def test_pid_tau1_zero_and_integral():
    rs = RegulatorState()
    tau1, rs = pid_tau1(VesselState(), ReferenceSignal(0.0, 0.0), rs, G, P, 0.2)
    assert tau1 == 0.0
    # constant unit error for T seconds accumulates -kappa1 T / k3
    T, dt = 10.0, 0.2
    ref = ReferenceSignal(w_r=-1.0, psi_r=0.0)
    rs = RegulatorState()
    for _ in range(int(T / dt) + 1):
        tau1, rs = pid_tau1(VesselState(), ref, rs, G, P, dt)
    assert rs.integral_w_error == pytest.approx(T)
    assert tau1 - (-G.kappa2 * 1.0 / P.k3) == pytest.approx(-G.kappa1 * T / P.k3)


def test_pid_tau2():
    assert pid_tau2(VesselState(), ReferenceSignal(0.0, 0.0), G, P) == 0.0
    out = pid_tau2(VesselState(r=0.1), ReferenceSignal(0.0, 0.0), G, P)
    assert out == pytest.approx(-(-0.1055 + 0.076 + 0.418) / 0.019 * 0.1)


def test_pid_speed_step_steady_state():
    # lightly damped surge pair: average over whole oscillation periods sits on the reference
    g = RegGains()
    p = DynamicsParams.identified(tau1_range=TAU1_MODEL_RANGE)
    res = simulate_tracking(VesselState(), lambda t: ReferenceSignal(w_r=2.0, psi_r=0.0), g, p,
                            duration=900.0, dt=0.05, law="pid", control_period=0.2,
                            saturate_output=True, record_every=1)
    period = 2 * math.pi / math.sqrt(g.kappa1 - g.kappa2 ** 2 / 4)
    t, w = res.t, res.states[:, 3]
    window = (t >= t[-1] - 10 * period)
    assert np.mean(w[window]) == pytest.approx(2.0, rel=0.01)


def test_r_tilde_decay_exact():
    p = DynamicsParams.identified(tau1_range=TAU1_MODEL_RANGE)
    res = simulate_tracking(VesselState(psi=0.3, w=0.5, r=0.1), smooth_reference, G, p, 10.0)
    rt = np.array([c.r_tilde for c in res.coords])
    assert np.allclose(rt, rt[0] * np.exp(-G.kappa4 * res.t), rtol=1e-6, atol=0)
    rep = error_subsystem_monitor(res.t, res.coords, G)
    assert rep["r_tilde"].rel_error < 0.02
    assert rep["surge"].rel_error < 0.02
    assert rep["surge"].expected == pytest.approx(G.kappa2 / 2)


def test_monitor_unit_r_tilde():
    t = np.linspace(0, 10, 101)
    coords = [ErrorCoordinates(0.0, 0.0, 0.0, math.exp(-0.418 * tk), 0.0) for tk in t]
    rep = error_subsystem_monitor(t, coords, G)
    assert rep["r_tilde"].fitted == pytest.approx(0.418, rel=0.02)


def test_monitor_zero_error_exact_convergence():
    t = np.linspace(0, 10, 20)
    coords = [ErrorCoordinates(0.0, 0.0, 0.0, 0.0, 0.0) for _ in t]
    rep = error_subsystem_monitor(t, coords, G)
    assert all(f.exact_convergence and f.rel_error == 0.0 for f in rep.fits.values())


def test_monitor_needs_ten_samples():
    with pytest.raises(ValueError):
        error_subsystem_monitor(np.arange(5.0), [ErrorCoordinates(0, 0, 0, 0)] * 5, G)


def test_anti_windup_freezes_integrator():
    # speed far below reference: the integrand pushes tau1 further up
    ref = ReferenceSignal(w_r=5.0, psi_r=0.0)
    rs = RegulatorState(last_rate=0.1, sat_dir=1)
    _, rs2 = backstepping_tau1(VesselState(), ref, rs, G, P, 0.2)
    assert rs2.eta == rs.eta
    _, rs3 = backstepping_tau1(VesselState(), ref, RegulatorState(last_rate=0.1), G, P, 0.2)
    assert rs3.eta > 0
    # pushing back out of the clamp is always allowed
    _, rs4 = backstepping_tau1(VesselState(w=9.0), ref, RegulatorState(last_rate=-0.1, sat_dir=1), G, P, 0.2)
    assert rs4.eta < 0
