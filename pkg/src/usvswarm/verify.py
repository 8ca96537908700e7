"""Property-verification suites behind ``usvswarm verify``.

Every check compares a measured number against a tolerance and yields a
verdict. A suite passes only if all of its checks pass.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import dynamics as dyn
from .conversion import (InfeasibleCommand, ReferenceSignal, cartesian_to_polar,
                         cartesian_to_reference, polar_to_cartesian_command)
from .dynamics import DynamicsParams, VesselState
from .engine import Scenario, ideal_mode_run
from .geometry import hull_distance
from .oracles import central_gradient, grounded_laplacian_rate, simplex_grid_distance
from .protocols import (EstimatorState, SwarmConfig, estimator_step, lyapunov_V,
                        surrounding_control)
from .regulation import RegGains, error_subsystem_monitor, fit_decay_rate, simulate_tracking


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool

    @classmethod
    def at_most(cls, name: str, measured: float, tolerance: float) -> "Check":
        return cls(name, float(measured), float(tolerance), bool(measured <= tolerance))


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed,
                "checks": [{**asdict(c), "verdict": "pass" if c.passed else "fail"} for c in self.checks]}


# --- geometry --------------------------------------------------------------


def hull_oracle_check(instances: int = 200, seed: int = 1) -> tuple[float, int]:
    """Largest |hull_distance - brute force| and number of containment disagreements."""
    rng = np.random.default_rng(seed)
    worst, mismatches = 0.0, 0
    for _ in range(instances):
        n = int(rng.integers(1, 7))
        pts = rng.uniform(0.0, 40.0, size=(n, 2))
        x_o = rng.uniform(0.0, 40.0, size=2)
        d = hull_distance(x_o, pts)
        ref, _ = simplex_grid_distance(x_o, pts)
        worst = max(worst, abs(d - ref))
        # the oracle's inside verdict: distance at the level of its search resolution
        mismatches += (d == 0.0) != (ref < 1e-6)
    return worst, mismatches


def suite_geometry() -> list[Check]:
    worst, mismatches = hull_oracle_check()
    return [Check.at_most("hull distance vs simplex oracle (200 instances)", worst, 1e-3),
            Check.at_most("containment verdict mismatches", mismatches, 0)]


# --- gradient --------------------------------------------------------------


def gradient_check(configs: int = 100, seed: int = 2, margin: float = 1e-2) -> float:
    """Worst relative gap between the surrounding control and -1/2 grad V."""
    rng = np.random.default_rng(seed)
    cfg_base = SwarmConfig()
    worst = 0.0
    done = 0
    while done < configs:
        n = int(rng.integers(2, 7))
        cfg = SwarmConfig(N=n, mu=cfg_base.mu, gamma1=cfg_base.gamma1, gamma2=cfg_base.gamma2)
        x = rng.uniform(0.0, 25.0, size=(n, 2))
        x_o = rng.uniform(0.0, 25.0, size=2)
        dists = [np.linalg.norm(x[i] - x[j]) for i in range(n) for j in range(i + 1, n)]
        if min(abs(d - cfg.mu) for d in dists) < margin * cfg.mu:
            continue
        grad = central_gradient(lambda z: lyapunov_V(z, x_o, cfg), x, h=1e-5)
        for i in range(n):
            u = surrounding_control(x, i, x_o, cfg)
            g = -0.5 * grad[i]
            worst = max(worst, float(np.linalg.norm(u - g) / max(np.linalg.norm(u), 1e-12)))
        done += 1
    return worst


def suite_gradient() -> list[Check]:
    return [Check.at_most("surrounding control vs -1/2 grad V (100 configs)", gradient_check(), 1e-5)]


# --- lyapunov --------------------------------------------------------------


def _ideal(protocol: str, n: int, seed: int, duration: float) -> Scenario:
    return Scenario(swarm=SwarmConfig(N=n), protocol=protocol, duration=duration, seed=seed)


def descent_check(runs: int = 20, duration: float = 40.0) -> tuple[float, float]:
    """Worst per-tick increase of V (Cartesian protocol) and P (polar protocol), relative to the max value."""
    worst_v = worst_p = 0.0
    for k in range(runs // 2):
        n = 3 + k % 4
        tr = ideal_mode_run(_ideal("approach1-centralized", n, 100 + k, duration))
        v = np.array([r.V for r in tr])
        worst_v = max(worst_v, float(np.max(np.diff(v), initial=0.0) / max(v.max(), 1e-300)))
    for k in range(runs - runs // 2):
        n = 3 + k % 4
        tr = ideal_mode_run(_ideal("approach2", n, 200 + k, duration))
        p = np.array([r.P for r in tr])
        if p.max() > 0:
            worst_p = max(worst_p, float(np.max(np.diff(p), initial=0.0) / p.max()))
    return worst_v, worst_p


def centroid_check(seed: int = 3) -> float:
    """Relative gap between the centroid distance and its predicted exponential over 5/gamma2 s."""
    cfg = SwarmConfig()
    sc = Scenario(swarm=cfg, protocol="approach1-centralized", duration=5.0 / cfg.gamma2, seed=seed)
    tr = ideal_mode_run(sc)
    t = np.array([r.t for r in tr])
    d = np.array([np.linalg.norm(r.positions.mean(axis=0) - r.target) for r in tr])
    pred = d[0] * np.exp(-cfg.gamma2 * t)
    return float(np.max(np.abs(d - pred) / pred))


def suite_lyapunov() -> list[Check]:
    wv, wp = descent_check()
    return [Check.at_most("V per-tick increase / max V (ideal mode)", wv, 1e-6),
            Check.at_most("P per-tick increase / max P (ideal mode)", wp, 1e-6),
            Check.at_most("centroid distance vs exp(-gamma2 t)", centroid_check(), 1e-2)]


# --- regulation ------------------------------------------------------------


def smooth_reference(t: float) -> ReferenceSignal:
    vp = 1.5 + 0.2 * math.sin(0.3 * t)
    return ReferenceSignal(
        w_r=1.0 + 0.1 * math.sin(0.2 * t), dw_r=0.02 * math.cos(0.2 * t),
        ddw_r=-0.004 * math.sin(0.2 * t), psi_r=0.5 * math.sin(0.1 * t),
        dpsi_r=0.05 * math.cos(0.1 * t), ddpsi_r=-0.005 * math.sin(0.1 * t),
        varpi=vp, dvarpi=0.06 * math.cos(0.3 * t), ddvarpi=-0.018 * math.sin(0.3 * t))


def regulation_check(duration: float = 10.0):
    """Closed-loop backstepping on a smooth reference; returns (r_tilde gap, report)."""
    g = RegGains()
    p = DynamicsParams.identified(tau1_range=dyn.TAU1_MODEL_RANGE)
    res = simulate_tracking(VesselState(psi=0.3, w=0.5, r=0.1), smooth_reference, g, p, duration)
    rt = np.array([c.r_tilde for c in res.coords])
    pred = rt[0] * np.exp(-g.kappa4 * res.t)
    gap = float(np.max(np.abs(rt - pred) / np.abs(pred)))
    return gap, error_subsystem_monitor(res.t, res.coords, g)


def suite_regulation() -> list[Check]:
    gap, rep = regulation_check()
    return [Check.at_most("r_tilde vs r_tilde(0) exp(-kappa4 t)", gap, 1e-4),
            Check.at_most("r_tilde fitted rate vs kappa4", rep["r_tilde"].rel_error, 0.02),
            Check.at_most("phi fitted rate vs kappa3", rep["phi"].rel_error, 0.02),
            Check.at_most("surge pair rate vs root real part", rep["surge"].rel_error, 0.02)]


# --- estimator -------------------------------------------------------------

LINE_GRAPH = ((1,), (0, 2), (1,))


def estimator_rate_check(duration: float = 60.0, dt: float = 0.01, seed: int = 4) -> tuple[float, float]:
    """Fitted decay rate of max_i |y_i - x_o| on the line graph and its predicted value."""
    cfg = SwarmConfig(comm_graph=LINE_GRAPH, leaders=frozenset({0}))
    rng = np.random.default_rng(seed)
    x_o = np.array([20.0, 20.0])
    est = EstimatorState(rng.uniform(0.0, 40.0, size=(3, 2)))
    ts, errs = [], []
    for k in range(int(round(duration / dt)) + 1):
        ts.append(k * dt)
        errs.append(np.max(np.linalg.norm(est.y - x_o, axis=1)))
        est = estimator_step(est, x_o, cfg, dt)
    ts, errs = np.array(ts), np.array(errs)
    tail = ts >= duration / 3.0
    fitted = fit_decay_rate(ts[tail], errs[tail])
    expected = grounded_laplacian_rate([(0, 1), (1, 2)], 3, [0], cfg.gamma3)
    return fitted, expected


def _rejected(make) -> bool:
    try:
        make()
    except ValueError:
        return True
    return False


def suite_estimator() -> list[Check]:
    fitted, expected = estimator_rate_check()
    disc = lambda: Scenario(swarm=SwarmConfig(comm_graph=((1,), (0,), ()), leaders=frozenset({0})),
                            protocol="approach1-decentralized")
    empty = lambda: Scenario(swarm=SwarmConfig(comm_graph=LINE_GRAPH, leaders=frozenset()),
                             protocol="approach1-decentralized")
    return [Check.at_most("estimator rate vs gamma3 * lambda_min", abs(fitted - expected) / expected, 0.05),
            Check.at_most("disconnected graph accepted", 0.0 if _rejected(disc) else 1.0, 0),
            Check.at_most("empty leader set accepted", 0.0 if _rejected(empty) else 1.0, 0)]


# --- dynamics --------------------------------------------------------------


def steady_state_gaps(duration: float = 150.0, dt: float = 0.01) -> tuple[float, float]:
    p = DynamicsParams.identified(tau1_range=dyn.TAU1_MODEL_RANGE)
    tau = np.array([100.0, 0.0])
    s = np.zeros(6)
    for k in range(int(round(duration / dt))):
        s = dyn.step_array(s, tau, p, dt)
    w_gap = abs(s[dyn.W] - (-p.k3 * tau[0] / p.k1))
    tau = np.array([0.0, math.radians(5.0)])
    s = np.zeros(6)
    for k in range(int(round(duration / dt))):
        s = dyn.step_array(s, tau, p, dt)
    r_gap = abs(s[dyn.R] - (-p.k5 * tau[1] / p.k4))
    return float(w_gap), float(r_gap)


def rk4_order(horizon: float = 5.0) -> float:
    """Observed convergence order of the integrator on a turning, accelerating hull."""
    p = DynamicsParams.identified(tau1_range=dyn.TAU1_MODEL_RANGE)
    s0 = np.array([0.0, 0.0, 0.2, 1.0, 0.1, 0.3])
    tau = np.array([120.0, math.radians(10.0)])

    def final(dt):
        s = s0.copy()
        for _ in range(int(round(horizon / dt))):
            s = dyn.step_array(s, tau, p, dt)
        return s

    ref = final(0.0025)
    e1 = np.linalg.norm(final(0.1) - ref)
    e2 = np.linalg.norm(final(0.05) - ref)
    return float(math.log2(e1 / e2))


def suite_dynamics() -> list[Check]:
    w_gap, r_gap = steady_state_gaps()
    order = rk4_order()
    return [Check.at_most("steady surge speed vs -k3 tau1 / k1", w_gap, 1e-4),
            Check.at_most("steady yaw rate vs -k5 tau2 / k4", r_gap, 1e-4),
            Check.at_most("integrator order deviation from 4", abs(order - 4.0), 0.2)]


# --- conversion ------------------------------------------------------------


def conversion_roundtrip(samples: int = 1000, seed: int = 5) -> tuple[float, float, int]:
    """Worst velocity reconstruction error, worst polar round-trip error, infeasible acceptances."""
    rng = np.random.default_rng(seed)
    worst_vel = worst_polar = 0.0
    accepted = 0
    for _ in range(samples):
        u = rng.normal(size=2) * 3.0
        speed = float(np.linalg.norm(u))
        v_r = rng.uniform(-0.9, 0.9) * speed
        w_r, psi_r = cartesian_to_reference(u, v_r, prev_psi_r=rng.uniform(-10, 10))
        rebuilt = dyn.rotation(psi_r) @ np.array([w_r, v_r])
        worst_vel = max(worst_vel, float(np.linalg.norm(rebuilt - u)))
        try:
            cartesian_to_reference(u, speed * rng.uniform(1.0, 2.0), None)
            accepted += 1
        except InfeasibleCommand:
            pass
        x_o = rng.uniform(0.0, 40.0, size=2)
        x_i = x_o + rng.uniform(1.0, 20.0) * np.array([math.cos(a := rng.uniform(-math.pi, math.pi)),
                                                       math.sin(a)])
        ps = cartesian_to_polar(x_i, x_o, None)
        back = x_o + ps.rho * np.array([math.cos(ps.theta), math.sin(ps.theta)])
        worst_polar = max(worst_polar, float(np.linalg.norm(back - x_i)))
        eta, om = rng.normal(size=2)
        uc = polar_to_cartesian_command(eta, om, ps.rho, ps.theta)
        radial = np.array([math.cos(ps.theta), math.sin(ps.theta)])
        worst_polar = max(worst_polar, abs(uc @ radial - eta),
                          abs((radial[0] * uc[1] - radial[1] * uc[0]) - ps.rho * om))
    return worst_vel, worst_polar, accepted


def suite_conversion() -> list[Check]:
    vel, polar, accepted = conversion_roundtrip()
    return [Check.at_most("S(psi_r)[w_r; v_r] reproduces u_r", vel, 1e-9),
            Check.at_most("polar round trips", polar, 1e-9),
            Check.at_most("infeasible commands accepted", accepted, 0)]


SUITES = {
    "geometry": suite_geometry,
    "gradient": suite_gradient,
    "lyapunov": suite_lyapunov,
    "regulation": suite_regulation,
    "estimator": suite_estimator,
    "dynamics": suite_dynamics,
    "conversion": suite_conversion,
}


def run_suite(name: str) -> list[SuiteReport]:
    if name == "all":
        return [SuiteReport(n, fn()) for n, fn in SUITES.items()]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join([*SUITES, 'all'])}")
    return [SuiteReport(name, SUITES[name]())]


def report_json(reports: list[SuiteReport]) -> str:
    return json.dumps({"passed": all(r.passed for r in reports),
                       "suites": [r.to_dict() for r in reports]}, indent=2)
