"""Lower-level surge and heading regulators and their error-decay monitors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .conversion import ReferenceSignal
from .dynamics import (ActuatorCommand, DynamicsParams, VesselState, derivatives, rk4,
                       saturate, step_array)


@dataclass(frozen=True)
class RegGains:
    kappa1: float = 0.02
    kappa2: float = 0.001
    kappa3: float = 0.076
    kappa4: float = 0.418

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "kappa3", "kappa4"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.kappa1 > 0.25 * self.kappa2 ** 2:
            raise ValueError("kappa1 must exceed kappa2**2 / 4")

    @property
    def surge_roots(self) -> np.ndarray:
        """Roots of s^2 + kappa2 s + kappa1 (closed-loop surge error pair)."""
        return np.roots([1.0, self.kappa2, self.kappa1])


@dataclass(frozen=True)
class RegulatorState:
    """Integrator memory of the surge loop.

    ``last_rate`` / ``last_w_tilde`` hold the previous integrand for the
    trapezoidal update; ``sat_dir`` is the clamp direction of the previous
    propeller command (anti-windup).
    """

    eta: float = 0.0
    integral_w_error: float = 0.0
    last_rate: float | None = None
    last_w_tilde: float | None = None
    sat_dir: int = 0

    def with_saturation(self, cmd: ActuatorCommand) -> "RegulatorState":
        return replace(self, sat_dir=cmd.saturated[0])


@dataclass(frozen=True)
class ErrorCoordinates:
    w_tilde: float
    psi_tilde: float
    phi: float
    r_tilde: float
    eta_tilde: float = math.nan


def error_coordinates(s: VesselState, ref: ReferenceSignal, g: RegGains,
                      eta: float | None = None) -> ErrorCoordinates:
    psi_t = s.psi - ref.psi_r
    r_t = (s.r - ref.dpsi_r) * ref.varpi + psi_t * ref.dvarpi + g.kappa3 * psi_t * ref.varpi
    eta_t = math.nan if eta is None else eta - ref.dw_r
    return ErrorCoordinates(s.w - ref.w_r, psi_t, psi_t * ref.varpi, r_t, eta_t)


def _blocked(sat_dir: int, push: float) -> bool:
    return sat_dir != 0 and push * sat_dir > 0


def backstepping_tau1(s: VesselState, ref: ReferenceSignal, rs: RegulatorState, g: RegGains,
                      p: DynamicsParams, dt: float) -> tuple[float, RegulatorState]:
    w_t = s.w - ref.w_r
    rate = -g.kappa1 * w_t + ref.ddw_r
    eta = rs.eta
    if rs.last_rate is not None:
        incr = 0.5 * dt * (rs.last_rate + rate)
        if not _blocked(rs.sat_dir, incr / p.k3):
            eta += incr
    tau1 = (-p.k1 * s.w - p.k2 * s.v * s.r + eta - g.kappa2 * w_t) / p.k3
    return tau1, replace(rs, eta=eta, last_rate=rate)


def backstepping_tau2(s: VesselState, ref: ReferenceSignal, g: RegGains, p: DynamicsParams) -> float:
    vp, dvp, ddvp = ref.varpi, ref.dvarpi, ref.ddvarpi
    psi_t = s.psi - ref.psi_r
    r_t = (s.r - ref.dpsi_r) * vp + psi_t * dvp + g.kappa3 * psi_t * vp
    num = (p.k4 * s.r * vp + 2.0 * s.r * dvp - ref.ddpsi_r * vp - 2.0 * ref.dpsi_r * dvp
           + psi_t * ddvp - g.kappa3 ** 2 * psi_t * vp + (g.kappa3 + g.kappa4) * r_t)
    return num / (-p.k5 * vp)


def pid_tau1(s: VesselState, ref: ReferenceSignal, rs: RegulatorState, g: RegGains,
             p: DynamicsParams, dt: float) -> tuple[float, RegulatorState]:
    """PI surge law with feedforward; integral is trapezoidal with anti-windup."""
    w_t = s.w - ref.w_r
    integral = rs.integral_w_error
    if rs.last_w_tilde is not None:
        incr = 0.5 * dt * (rs.last_w_tilde + w_t)
        if not _blocked(rs.sat_dir, -g.kappa1 * incr / p.k3):
            integral += incr
    tau1 = (-p.k1 * s.w - p.k2 * s.v * s.r - g.kappa1 * integral - g.kappa2 * w_t) / p.k3
    return tau1, replace(rs, integral_w_error=integral, last_w_tilde=w_t)


def pid_tau2(s: VesselState, ref: ReferenceSignal, g: RegGains, p: DynamicsParams) -> float:
    psi_t = s.psi - ref.psi_r
    k3, k4 = g.kappa3, g.kappa4
    return -(p.k4 + k3 + k4) / p.k5 * s.r + (k3 ** 2 - (k3 + k4) * k3) / p.k5 * psi_t


# --- decay monitors -------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    name: str
    fitted: float | None
    expected: float
    exact_convergence: bool = False

    @property
    def rel_error(self) -> float:
        if self.exact_convergence:
            return 0.0
        if self.fitted is None:
            return math.inf
        return abs(self.fitted - self.expected) / abs(self.expected)


@dataclass
class DecayReport:
    fits: dict[str, DecayFit] = field(default_factory=dict)

    def __getitem__(self, key: str) -> DecayFit:
        return self.fits[key]


def fit_decay_rate(t, values, floor: float = 1e-12) -> float | None:
    """Least-squares slope of ``-log|values|`` against ``t``; None if nothing to fit."""
    t = np.asarray(t, dtype=float)
    a = np.abs(np.asarray(values, dtype=float))
    keep = a > floor * max(float(a.max(initial=0.0)), 1e-300)
    if keep.sum() < 2:
        return None
    slope = np.polyfit(t[keep], np.log(a[keep]), 1)[0]
    return float(-slope)


def fit_driven_rate(t, x, drive) -> float:
    """Least-squares ``k`` in ``x' = -k x + drive`` using central differences of ``x``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    drive = np.asarray(drive, dtype=float)
    dx = np.gradient(x, t, edge_order=2)
    resid = drive - dx
    return float(resid @ x / (x @ x))


def surge_modal_norm(w_tilde, eta_tilde, g: RegGains) -> np.ndarray:
    """Norm of the surge error pair in modal coordinates; decays as exp(-kappa2 t / 2)."""
    w_tilde = np.asarray(w_tilde, dtype=float)
    eta_tilde = np.asarray(eta_tilde, dtype=float)
    omega_d = math.sqrt(g.kappa1 - 0.25 * g.kappa2 ** 2)
    return np.hypot(omega_d * w_tilde, eta_tilde - 0.5 * g.kappa2 * w_tilde)


def error_subsystem_monitor(t, coords: list[ErrorCoordinates], g: RegGains) -> DecayReport:
    """Fit exponential rates of the regulation error channels and compare with theory.

    ``phi`` is driven by ``r_tilde``, so its rate is identified from
    ``phi' = -k phi + r_tilde`` rather than from a pure exponential.
    """
    t = np.asarray(t, dtype=float)
    if len(t) < 10:
        raise ValueError("need at least 10 samples")
    r_t = np.array([c.r_tilde for c in coords])
    phi = np.array([c.phi for c in coords])
    w_t = np.array([c.w_tilde for c in coords])
    eta_t = np.array([c.eta_tilde for c in coords])
    report = DecayReport()

    def add(name, tt, vals, expected):
        if np.max(np.abs(vals), initial=0.0) == 0.0:
            report.fits[name] = DecayFit(name, None, expected, exact_convergence=True)
        else:
            report.fits[name] = DecayFit(name, fit_decay_rate(tt, vals), expected)

    add("r_tilde", t, r_t, g.kappa4)
    if np.max(np.abs(phi)) == 0.0:
        report.fits["phi"] = DecayFit("phi", None, g.kappa3, exact_convergence=True)
    else:
        report.fits["phi"] = DecayFit("phi", fit_driven_rate(t, phi, r_t), g.kappa3)
    if np.all(np.isfinite(eta_t)):
        add("surge", t, surge_modal_norm(w_t, eta_t, g), -float(np.max(g.surge_roots.real)))
    return report


# --- closed-loop tracking harness ----------------------------------------


@dataclass
class TrackingResult:
    t: np.ndarray
    states: np.ndarray
    taus: np.ndarray
    coords: list[ErrorCoordinates]
    saturated: np.ndarray


def simulate_tracking(s0: VesselState, reference: Callable[[float], ReferenceSignal],
                      g: RegGains, p: DynamicsParams, duration: float, dt: float = 0.01,
                      law: str = "backstepping", control_period: float | None = None,
                      saturate_output: bool = False, record_every: int = 1,
                      eta0: float | None = None) -> TrackingResult:
    """Single-vessel closed loop tracking a reference given as a function of time.

    With ``control_period=None`` the regulator is evaluated inside every
    Runge-Kutta stage and its integrator is part of the ODE state, so the
    continuous-time error dynamics are reproduced to integration accuracy.
    Otherwise the discrete regulator runs every ``control_period`` seconds
    with zero-order hold, as in the swarm simulation.
    """
    if law not in ("backstepping", "pid"):
        raise ValueError(f"unknown law {law!r}")
    n_steps = int(round(duration / dt))
    ts, states, taus, coords, sats = [], [], [], [], []

    if control_period is None:
        def controls(t, z):
            s = VesselState.from_array(z[:6])
            ref = reference(t)
            if law == "backstepping":
                w_t = s.w - ref.w_r
                tau1 = (-p.k1 * s.w - p.k2 * s.v * s.r + z[6] - g.kappa2 * w_t) / p.k3
                tau2 = backstepping_tau2(s, ref, g, p)
            else:
                w_t = s.w - ref.w_r
                tau1 = (-p.k1 * s.w - p.k2 * s.v * s.r - g.kappa1 * z[7] - g.kappa2 * w_t) / p.k3
                tau2 = pid_tau2(s, ref, g, p)
            cmd = ActuatorCommand(tau1, tau2)
            if saturate_output:
                cmd = saturate(cmd, p)
            return s, ref, cmd

        def f(t, z):
            s, ref, cmd = controls(t, z)
            dz = np.empty_like(z)
            dz[:6] = derivatives(z[:6], np.array([cmd.tau1, cmd.tau2]), p)
            dz[6] = -g.kappa1 * (s.w - ref.w_r) + ref.ddw_r
            dz[7] = s.w - ref.w_r
            return dz

        ref0 = reference(0.0)
        z = np.concatenate([s0.as_array(), [ref0.dw_r if eta0 is None else eta0, 0.0]])
        for k in range(n_steps + 1):
            t = k * dt
            if k % record_every == 0:
                s, ref, cmd = controls(t, z)
                ts.append(t)
                states.append(z[:6].copy())
                taus.append((cmd.tau1, cmd.tau2))
                sats.append(cmd.saturated)
                coords.append(error_coordinates(s, ref, g, eta=z[6]))
            if k < n_steps:
                z = rk4(f, t, z, dt)
        return TrackingResult(np.array(ts), np.array(states), np.array(taus), coords, np.array(sats))

    sub = int(round(control_period / dt))
    if sub < 1 or not math.isclose(sub * dt, control_period, rel_tol=1e-9):
        raise ValueError("control_period must be an integer multiple of dt")
    x = s0.as_array()
    rs = RegulatorState(eta=reference(0.0).dw_r if eta0 is None else eta0)
    n_ticks = n_steps // sub
    for k in range(n_ticks + 1):
        t = k * control_period
        s = VesselState.from_array(x)
        ref = reference(t)
        if law == "backstepping":
            tau1, rs = backstepping_tau1(s, ref, rs, g, p, control_period)
            tau2 = backstepping_tau2(s, ref, g, p)
        else:
            tau1, rs = pid_tau1(s, ref, rs, g, p, control_period)
            tau2 = pid_tau2(s, ref, g, p)
        cmd = ActuatorCommand(tau1, tau2)
        if saturate_output:
            cmd = saturate(cmd, p)
        rs = rs.with_saturation(cmd)
        if k % record_every == 0:
            ts.append(t)
            states.append(x.copy())
            taus.append((cmd.tau1, cmd.tau2))
            sats.append(cmd.saturated)
            eta = rs.eta if law == "backstepping" else -g.kappa1 * rs.integral_w_error
            coords.append(error_coordinates(s, ref, g, eta=eta))
        if k < n_ticks:
            tau = np.array([cmd.tau1, cmd.tau2])
            for _ in range(sub):
                x = step_array(x, tau, p, dt, t=t)
    return TrackingResult(np.array(ts), np.array(states), np.array(taus), coords, np.array(sats))
