"""Planar kinematics and identified surge/yaw/sway dynamics of a waterjet USV.

State vector layout used by the array routines: ``[x, y, psi, w, v, r]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

X, Y, PSI, W, V, R = range(6)

K5_IDENTIFIED = 0.019
# propeller command that holds the 10 m/s top speed in steady surge
TAU1_MODEL_RANGE = (0.0, 196.0)


class NumericalBlowUp(FloatingPointError):
    """Raised when integration produces non-finite values."""

    def __init__(self, message: str, time: float | None = None, vessel: int | None = None):
        super().__init__(message)
        self.time = time
        self.vessel = vessel


def rotation(a: float) -> np.ndarray:
    """Counterclockwise planar rotation matrix by angle ``a`` (radians)."""
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class VesselState:
    """Position (m), unwrapped heading (rad), surge/sway (m/s), yaw rate (rad/s)."""

    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0
    w: float = 0.0
    v: float = 0.0
    r: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi, self.w, self.v, self.r], dtype=float)

    @classmethod
    def from_array(cls, a) -> "VesselState":
        a = np.asarray(a, dtype=float)
        return cls(*(float(val) for val in a[:6]))


@dataclass(frozen=True)
class DynamicsParams:
    """Coefficients of the identified model and actuator limits.

    ``tau1_range`` is in the propeller-speed units that ``k3`` scales;
    ``tau2_range`` is the steering angle in radians.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    k7: float
    tau1_range: tuple[float, float] = (600.0, 11000.0)
    tau2_range: tuple[float, float] = (-np.deg2rad(20.0), np.deg2rad(20.0))

    def __post_init__(self):
        if self.k3 == 0 or self.k5 == 0:
            raise ValueError("k3 and k5 must be nonzero")
        for name in ("tau1_range", "tau2_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must be a nonempty interval, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))

    @classmethod
    def identified(cls, steering_units: str = "deg", **overrides) -> "DynamicsParams":
        """Coefficients identified from zigzag runs on a small waterjet hull.

        The steering gain was identified against the nozzle angle; with
        ``steering_units="deg"`` it is read as per degree and rescaled so that
        ``tau2`` stays in radians. ``"rad"`` uses the raw number per radian.
        """
        if steering_units not in ("deg", "rad"):
            raise ValueError("steering_units must be 'deg' or 'rad'")
        k5 = K5_IDENTIFIED * (180.0 / np.pi if steering_units == "deg" else 1.0)
        values = dict(k1=-0.098, k2=0.003, k3=0.005, k4=-0.1055, k5=k5,
                      k6=-0.091, k7=-0.0175)
        values.update(overrides)
        return cls(**values)

    @property
    def k(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3, self.k4, self.k5, self.k6, self.k7])


@dataclass(frozen=True)
class ActuatorCommand:
    """Propeller speed ``tau1`` and steering angle ``tau2`` (rad).

    ``saturated`` holds the clamp direction per channel: -1 (low bound),
    0 (inside), +1 (high bound).
    """

    tau1: float = 0.0
    tau2: float = 0.0
    saturated: tuple[int, int] = (0, 0)

    @property
    def flagged(self) -> bool:
        return any(self.saturated)


def saturate(u: ActuatorCommand, p: DynamicsParams) -> ActuatorCommand:
    out, flags = [], []
    for val, (lo, hi) in ((u.tau1, p.tau1_range), (u.tau2, p.tau2_range)):
        if val > hi:
            out.append(hi)
            flags.append(1)
        elif val < lo:
            out.append(lo)
            flags.append(-1)
        else:
            out.append(float(val))
            flags.append(0)
    return ActuatorCommand(out[0], out[1], (flags[0], flags[1]))


def derivatives(states: np.ndarray, taus: np.ndarray, p: DynamicsParams) -> np.ndarray:
    """Vectorized right-hand side for ``states`` of shape (..., 6) and ``taus`` (..., 2)."""
    psi, w, v, r = states[..., PSI], states[..., W], states[..., V], states[..., R]
    c, s = np.cos(psi), np.sin(psi)
    out = np.empty_like(states)
    out[..., X] = c * w - s * v
    out[..., Y] = s * w + c * v
    out[..., PSI] = r
    out[..., W] = p.k1 * w + p.k2 * v * r + p.k3 * taus[..., 0]
    out[..., V] = p.k6 * v + p.k7 * w * r
    out[..., R] = p.k4 * r + p.k5 * taus[..., 1]
    return out


def state_derivative(s: VesselState, u: ActuatorCommand, p: DynamicsParams) -> VesselState:
    """Time derivative of ``s`` under command ``u``, packed as a VesselState."""
    a = s.as_array()
    tau = np.array([u.tau1, u.tau2], dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(tau))):
        raise ValueError("non-finite state or command")
    return VesselState.from_array(derivatives(a, tau, p))


def rk4(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_array(states: np.ndarray, taus: np.ndarray, p: DynamicsParams, dt: float,
               t: float | None = None) -> np.ndarray:
    """RK4 advance of stacked vessel states with zero-order-hold commands."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    # overflow shows up as non-finite output, reported below with time and vessel
    with np.errstate(over="ignore", invalid="ignore"):
        out = rk4(lambda _t, y: derivatives(y, taus, p), 0.0, states, dt)
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(np.atleast_2d(out)))[0][0]
        raise NumericalBlowUp(f"non-finite state after step at t={t}", time=t, vessel=int(bad))
    return out


def step(s: VesselState, u: ActuatorCommand, p: DynamicsParams, dt: float) -> VesselState:
    tau = np.array([u.tau1, u.tau2], dtype=float)
    return VesselState.from_array(step_array(s.as_array(), tau, p, dt))
