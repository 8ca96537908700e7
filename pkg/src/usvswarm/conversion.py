"""Bridging collective velocity commands to per-vessel speed/heading references.

Cartesian commands are turned into a surge speed and an unwrapped heading
that absorbs the sway-induced drift angle; polar (radial, angular) commands
are mapped to Cartesian first. The tracking perturbation ``e`` measures how
far the realised velocity is from the commanded one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import VesselState, rotation
from .geometry import unwrap
from .protocols import RHO_MIN, DegenerateRadius, PolarState

REF_FILTER_TC = 0.4
VARPI_TC = 0.4


class InfeasibleCommand(ValueError):
    """Commanded speed does not exceed the sway speed, so no surge/heading pair exists."""


@dataclass(frozen=True)
class ReferenceSignal:
    w_r: float = 0.0
    psi_r: float = 0.0
    v_r: float = 0.0
    dw_r: float = 0.0
    ddw_r: float = 0.0
    dpsi_r: float = 0.0
    ddpsi_r: float = 0.0
    varpi: float = 1.0
    dvarpi: float = 0.0
    ddvarpi: float = 0.0


@dataclass(frozen=True)
class PerturbationRecord:
    e: np.ndarray
    eta_tilde_r: float
    omega_tilde_r: float


def cartesian_to_reference(u_r, v_r: float, prev_psi_r: float | None) -> tuple[float, float]:
    """Surge reference and unwrapped heading reference realising velocity ``u_r``.

    Raises InfeasibleCommand when ``|v_r| >= |u_r|``.
    """
    u = np.asarray(u_r, dtype=float)
    speed = math.hypot(u[0], u[1])
    if not speed > abs(v_r):
        raise InfeasibleCommand(f"|u_r|={speed:.6g} does not exceed |v_r|={abs(v_r):.6g}")
    w_r = math.sqrt(speed * speed - v_r * v_r)
    raw = math.atan2(u[1], u[0]) - math.atan(v_r / w_r)
    return w_r, unwrap(prev_psi_r, raw)


def polar_to_cartesian_command(eta_r: float, omega_r: float, rho: float, theta: float) -> np.ndarray:
    return rotation(theta) @ np.array([eta_r, rho * omega_r])


def cartesian_to_polar(x_i, x_o, prev_theta: float | None) -> PolarState:
    d = np.asarray(x_i, dtype=float) - np.asarray(x_o, dtype=float)
    rho = math.hypot(d[0], d[1])
    if rho <= RHO_MIN:
        raise DegenerateRadius(f"rho={rho} below {RHO_MIN}")
    return PolarState(rho, unwrap(prev_theta, math.atan2(d[1], d[0])))


def perturbation(s: VesselState, ref: ReferenceSignal, rho: float | None = None,
                 theta: float | None = None) -> PerturbationRecord:
    """Velocity mismatch ``e`` and, when ``rho`` is usable, its polar components."""
    a = np.array([ref.w_r, ref.v_r])
    e = (rotation(s.psi) - rotation(ref.psi_r)) @ a \
        + rotation(s.psi) @ np.array([s.w - ref.w_r, s.v - ref.v_r])
    if rho is None or theta is None or rho <= RHO_MIN:
        return PerturbationRecord(e, math.nan, math.nan)
    radial, tangential = rotation(-theta) @ e
    return PerturbationRecord(e, float(radial), float(tangential / rho))


def _backward_diff(hist: list[float], dt: float) -> float:
    if len(hist) >= 3:
        return (3.0 * hist[-1] - 4.0 * hist[-2] + hist[-3]) / (2.0 * dt)
    if len(hist) == 2:
        return (hist[-1] - hist[-2]) / dt
    return 0.0


class _FilteredDerivative:
    """Causal first and second derivative of a sampled signal, low-passed."""

    def __init__(self, tc: float):
        self.tc = tc
        self.samples: list[float] = []
        self.d1_hist: list[float] = []
        self.d1 = 0.0
        self.d2 = 0.0

    def update(self, value: float, dt: float) -> tuple[float, float]:
        alpha = 1.0 - math.exp(-dt / self.tc)
        self.samples = (self.samples + [value])[-3:]
        self.d1 += alpha * (_backward_diff(self.samples, dt) - self.d1)
        self.d1_hist = (self.d1_hist + [self.d1])[-3:]
        self.d2 += alpha * (_backward_diff(self.d1_hist, dt) - self.d2)
        return self.d1, self.d2


class ReferenceShaper:
    """Builds a full ReferenceSignal from per-tick speed and heading references.

    The bounding signal ``varpi`` rises instantly to ``max(1, |w_r|)`` and
    relaxes with time constant ``varpi_tc`` otherwise, so it never drops
    below the bound.
    """

    def __init__(self, filter_tc: float = REF_FILTER_TC, varpi_tc: float = VARPI_TC):
        self._w = _FilteredDerivative(filter_tc)
        self._psi = _FilteredDerivative(filter_tc)
        self._varpi = _FilteredDerivative(filter_tc)
        self.varpi_tc = varpi_tc
        self.envelope: float | None = None

    def update(self, w_r: float, psi_r: float, v_r: float, dt: float) -> ReferenceSignal:
        bound = max(1.0, abs(w_r))
        if self.envelope is None:
            self.envelope = bound
        else:
            relaxed = self.envelope + (1.0 - math.exp(-dt / self.varpi_tc)) * (bound - self.envelope)
            self.envelope = max(bound, relaxed)
        dw, ddw = self._w.update(w_r, dt)
        dpsi, ddpsi = self._psi.update(psi_r, dt)
        dvp, ddvp = self._varpi.update(self.envelope, dt)
        return ReferenceSignal(w_r, psi_r, v_r, dw, ddw, dpsi, ddpsi, self.envelope, dvp, ddvp)
