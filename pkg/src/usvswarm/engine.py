"""Scenario runner: two-rate closed loop, traces, monitors, outcome detection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn
from .conversion import (InfeasibleCommand, PerturbationRecord, ReferenceShaper, ReferenceSignal,
                         cartesian_to_reference, perturbation, polar_to_cartesian_command)
from .dynamics import ActuatorCommand, DynamicsParams, NumericalBlowUp, VesselState, saturate
from .geometry import hull_distance, unwrap, wrapped_diff
from .protocols import (RHO_MIN, EstimatorState, SwarmConfig, equal_surround_control,
                        estimator_rhs, estimator_step, lyapunov_P, lyapunov_V, phase_rate,
                        surrounding_controls, PolarState)
from .regulation import (RegGains, RegulatorState, backstepping_tau1, backstepping_tau2,
                         fit_decay_rate, pid_tau1, pid_tau2)

PROTOCOLS = ("approach1-centralized", "approach1-decentralized", "approach2")
REGULATORS = ("backstepping", "pid")
EPS_HULL = 0.1
EPS_RHO = 0.2
EPS_PHASE = math.radians(5.0)
SUSTAIN_WINDOW = 5.0


@dataclass(frozen=True)
class TargetSpec:
    """Kinematic target: static, constant velocity, or piecewise-linear waypoints."""

    kind: str = "static"
    position: tuple[float, float] = (20.0, 20.0)
    velocity: tuple[float, float] = (0.0, 0.0)
    waypoints: tuple[tuple[float, float], ...] = ()
    speeds: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("static", "constant_velocity", "waypoints"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.kind == "waypoints":
            if len(self.waypoints) < 1:
                raise ValueError("waypoint target needs at least one waypoint")
            if len(self.speeds) != len(self.waypoints) or any(s <= 0 for s in self.speeds):
                raise ValueError("need one positive speed per waypoint leg")

    def position_at(self, t: float) -> np.ndarray:
        p0 = np.asarray(self.position, dtype=float)
        if self.kind == "static":
            return p0
        if self.kind == "constant_velocity":
            return p0 + t * np.asarray(self.velocity, dtype=float)
        here, remaining = p0, t
        for wp, speed in zip(self.waypoints, self.speeds):
            wp = np.asarray(wp, dtype=float)
            leg = float(np.hypot(*(wp - here)))
            duration = leg / speed
            if remaining <= duration:
                return here + (wp - here) * (remaining / duration if duration > 0 else 1.0)
            remaining -= duration
            here = wp
        return here


@dataclass(frozen=True)
class Scenario:
    swarm: SwarmConfig
    target: TargetSpec = TargetSpec()
    protocol: str = "approach2"
    regulator: str = "backstepping"
    gains: RegGains = RegGains()
    params: DynamicsParams = field(default_factory=lambda: DynamicsParams.identified(tau1_range=dyn.TAU1_MODEL_RANGE))
    duration: float = 200.0
    dt_phys: float = 0.01
    dt_ctrl: float = 0.2
    seed: int = 0
    area: tuple[float, float, float, float] = (0.0, 0.0, 40.0, 40.0)
    vessels: tuple[VesselState, ...] | None = None

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}; expected one of {PROTOCOLS}")
        if self.regulator not in REGULATORS:
            raise ValueError(f"unknown regulator {self.regulator!r}; expected one of {REGULATORS}")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not (self.dt_phys > 0 and self.dt_ctrl > 0):
            raise ValueError("time steps must be positive")
        ratio = self.dt_ctrl / self.dt_phys
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("dt_ctrl must be an integer multiple of dt_phys")
        self.swarm.check_theorem_hypotheses()
        if self.protocol == "approach1-decentralized":
            self.swarm.check_estimator_graph()
        if self.vessels is not None and len(self.vessels) != self.swarm.N:
            raise ValueError(f"{len(self.vessels)} vessels given but swarm.N={self.swarm.N}")

    @property
    def substeps(self) -> int:
        return int(round(self.dt_ctrl / self.dt_phys))

    @property
    def n_ticks(self) -> int:
        return int(math.floor(self.duration / self.dt_ctrl + 1e-9))

    def initial_states(self) -> np.ndarray:
        if self.vessels is not None:
            return np.array([s.as_array() for s in self.vessels])
        rng = np.random.default_rng(self.seed)
        x0, y0, x1, y1 = self.area
        n = self.swarm.N
        out = np.zeros((n, 6))
        out[:, 0] = rng.uniform(x0, x1, n)
        out[:, 1] = rng.uniform(y0, y1, n)
        out[:, 2] = rng.uniform(-math.pi, math.pi, n)
        return out


@dataclass
class TraceRecord:
    t: float
    states: np.ndarray            # (N, 6)
    taus: np.ndarray              # (N, 2), after saturation
    saturated: np.ndarray         # (N, 2) clamp directions
    refs: list[ReferenceSignal]
    perturbations: list[PerturbationRecord]
    estimates: np.ndarray         # (N, 2)
    target: np.ndarray            # (2,)
    hull_distance: float
    V: float
    P: float
    rho: np.ndarray               # (N,)
    theta: np.ndarray             # (N,) unwrapped
    theta_pairs: np.ndarray       # wrapped theta_ij for i < j
    infeasible: np.ndarray        # (N,) bool

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :2]


@dataclass
class OutcomeReport:
    surrounded_at: float | None
    equally_surrounded_at: float | None
    final_hull_distance: float
    final_rho_error: float
    final_phase_error: float
    rates: dict[str, float | None] = field(default_factory=dict)


def adjacent_gaps(thetas) -> np.ndarray:
    """Angular gaps between circularly consecutive vessels, summing to 2*pi."""
    a = np.sort(np.mod(np.asarray(thetas, dtype=float), 2 * math.pi))
    return np.diff(np.concatenate([a, [a[0] + 2 * math.pi]]))


def _pairs(thetas) -> np.ndarray:
    n = len(thetas)
    return np.array([wrapped_diff(thetas[i], thetas[j]) for i in range(n) for j in range(i + 1, n)])


class _Monitor:
    """Tracks unwrapped bearings about the target and evaluates energy monitors."""

    def __init__(self, cfg: SwarmConfig):
        self.cfg = cfg
        self.theta: list[float | None] = [None] * cfg.N

    def polar(self, pos: np.ndarray, x_o: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = pos - x_o
        rho = np.hypot(d[:, 0], d[:, 1])
        for i in range(len(pos)):
            self.theta[i] = unwrap(self.theta[i], math.atan2(d[i, 1], d[i, 0]))
        return rho, np.array(self.theta, dtype=float)

    def record(self, t, states, taus, sats, refs, perts, y, x_o, rho, theta, infeasible) -> TraceRecord:
        pos = states[:, :2]
        return TraceRecord(
            t=t, states=states.copy(), taus=taus.copy(), saturated=sats.copy(), refs=list(refs),
            perturbations=list(perts), estimates=y.copy(), target=x_o.copy(),
            hull_distance=hull_distance(x_o, pos), V=lyapunov_V(pos, x_o, self.cfg),
            P=lyapunov_P(theta, self.cfg), rho=rho.copy(), theta=theta.copy(),
            theta_pairs=_pairs(theta), infeasible=infeasible.copy())


def run(sc: Scenario) -> tuple[list[TraceRecord], OutcomeReport]:
    """Full-stack simulation: protocols, conversion, regulation, saturation, dynamics.

    Per control tick: sense, estimate, protocol, convert, regulate, saturate;
    then the vessel dynamics advance ``substeps`` RK4 steps with the commands held.
    """
    cfg, p, g = sc.swarm, sc.params, sc.gains
    n = cfg.N
    states = sc.initial_states()
    est = EstimatorState.from_positions(states[:, :2])
    prev_psi_r: list[float] = list(states[:, 2])
    shapers = [ReferenceShaper() for _ in range(n)]
    regs = [RegulatorState() for _ in range(n)]
    last_w_r = [0.0] * n
    monitor = _Monitor(cfg)
    trace: list[TraceRecord] = []
    decentral = sc.protocol == "approach1-decentralized"

    for k in range(sc.n_ticks + 1):
        t = k * sc.dt_ctrl
        x_o = sc.target.position_at(t)
        pos = states[:, :2]
        if decentral and k > 0:
            est = estimator_step(est, x_o, cfg, sc.dt_ctrl)
        rho, theta = monitor.polar(pos, x_o)

        commands: list[np.ndarray | None]
        if sc.protocol == "approach2":
            commands = []
            for i in range(n):
                if rho[i] <= RHO_MIN:
                    commands.append(None)
                    continue
                eta_r, omega_r = equal_surround_control(PolarState(rho[i], theta[i]), i, theta, cfg)
                commands.append(polar_to_cartesian_command(eta_r, omega_r, rho[i], theta[i]))
        else:
            targets = est.y if decentral else x_o
            commands = list(surrounding_controls(pos, targets, cfg))

        taus = np.zeros((n, 2))
        sats = np.zeros((n, 2), dtype=int)
        infeasible = np.zeros(n, dtype=bool)
        refs, perts = [], []
        for i in range(n):
            s = VesselState.from_array(states[i])
            v_r = s.v
            if commands[i] is None:
                w_r, psi_r = last_w_r[i], prev_psi_r[i]
            else:
                try:
                    w_r, psi_r = cartesian_to_reference(commands[i], v_r, prev_psi_r[i])
                except InfeasibleCommand:
                    w_r, psi_r = 0.0, prev_psi_r[i]
                    infeasible[i] = True
            prev_psi_r[i], last_w_r[i] = psi_r, w_r
            ref = shapers[i].update(w_r, psi_r, v_r, sc.dt_ctrl)
            if sc.regulator == "backstepping":
                tau1, regs[i] = backstepping_tau1(s, ref, regs[i], g, p, sc.dt_ctrl)
                tau2 = backstepping_tau2(s, ref, g, p)
            else:
                tau1, regs[i] = pid_tau1(s, ref, regs[i], g, p, sc.dt_ctrl)
                tau2 = pid_tau2(s, ref, g, p)
            cmd = saturate(ActuatorCommand(tau1, tau2), p)
            regs[i] = regs[i].with_saturation(cmd)
            taus[i] = cmd.tau1, cmd.tau2
            sats[i] = cmd.saturated
            refs.append(ref)
            perts.append(perturbation(s, ref, rho[i], theta[i]))

        trace.append(monitor.record(t, states, taus, sats, refs, perts, est.y, x_o, rho, theta, infeasible))
        if k == sc.n_ticks:
            break
        for sub in range(sc.substeps):
            try:
                states = dyn.step_array(states, taus, p, sc.dt_phys, t=t + sub * sc.dt_phys)
            except NumericalBlowUp as exc:
                raise NumericalBlowUp(f"numerical blow-up at t={exc.time:.2f}s, vessel {exc.vessel}",
                                      time=exc.time, vessel=exc.vessel) from None
    return trace, detect_outcomes(trace, cfg.rho_o)


def ideal_mode_run(sc: Scenario) -> list[TraceRecord]:
    """Kinematic oracle: integrate the commanded motion directly (zero perturbation).

    Approach 1 integrates positions (and estimates, when decentralized);
    Approach 2 integrates radius and bearing about the target. Commands are
    re-evaluated inside every RK4 stage.
    """
    cfg = sc.swarm
    n = cfg.N
    init = sc.initial_states()
    decentral = sc.protocol == "approach1-decentralized"
    monitor = _Monitor(cfg)
    zeros2 = np.zeros((n, 2))
    trace: list[TraceRecord] = []

    if sc.protocol == "approach2":
        x_o0 = sc.target.position_at(0.0)
        d = init[:, :2] - x_o0
        z = np.concatenate([np.hypot(d[:, 0], d[:, 1]), np.arctan2(d[:, 1], d[:, 0])])

        def f(_t, zz):
            rho, th = zz[:n], zz[n:]
            om = [phase_rate(th, i, cfg) for i in range(n)]
            return np.concatenate([cfg.beta1 * (cfg.rho_o - rho), om])

        def positions(t, zz):
            rho, th = zz[:n], zz[n:]
            return sc.target.position_at(t) + rho[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1)

        def velocity(t, zz):
            dz = f(t, zz)
            rho, th = zz[:n], zz[n:]
            c, s = np.cos(th), np.sin(th)
            return np.stack([c * dz[:n] - s * rho * dz[n:], s * dz[:n] + c * rho * dz[n:]], axis=1)

        estimates = lambda zz: zeros2
    else:
        z = init[:, :2].ravel().copy()
        if decentral:
            z = np.concatenate([z, init[:, :2].ravel()])

        def f(t, zz):
            x = zz[:2 * n].reshape(n, 2)
            x_o = sc.target.position_at(t)
            if decentral:
                y = zz[2 * n:].reshape(n, 2)
                return np.concatenate([surrounding_controls(x, y, cfg).ravel(),
                                       estimator_rhs(y, x_o, cfg).ravel()])
            return surrounding_controls(x, x_o, cfg).ravel()

        positions = lambda t, zz: zz[:2 * n].reshape(n, 2).copy()
        velocity = lambda t, zz: f(t, zz)[:2 * n].reshape(n, 2)
        estimates = (lambda zz: zz[2 * n:].reshape(n, 2)) if decentral else (lambda zz: zeros2)

    for k in range(sc.n_ticks + 1):
        t = k * sc.dt_ctrl
        x_o = sc.target.position_at(t)
        pos = positions(t, z)
        vel = velocity(t, z)
        states = np.zeros((n, 6))
        states[:, :2] = pos
        states[:, 2] = np.arctan2(vel[:, 1], vel[:, 0])
        states[:, 3] = np.hypot(vel[:, 0], vel[:, 1])
        rho, theta = monitor.polar(pos, x_o)
        if sc.protocol == "approach2":
            theta = z[n:].copy()
            monitor.theta = list(theta)
        refs = [ReferenceSignal(w_r=states[i, 3], psi_r=states[i, 2]) for i in range(n)]
        perts = [PerturbationRecord(np.zeros(2), 0.0, 0.0) for _ in range(n)]
        trace.append(monitor.record(t, states, np.zeros((n, 2)), np.zeros((n, 2), dtype=int), refs,
                                    perts, np.array(estimates(z)), x_o, rho, theta,
                                    np.zeros(n, dtype=bool)))
        if k == sc.n_ticks:
            break
        for sub in range(sc.substeps):
            z = dyn.rk4(f, t + sub * sc.dt_phys, z, sc.dt_phys)
            if not np.all(np.isfinite(z)):
                raise NumericalBlowUp(f"numerical blow-up at t={t:.2f}s", time=t)
    return trace


def _sustained_start(times: np.ndarray, ok: np.ndarray, window: float) -> float | None:
    """First time from which ``ok`` holds continuously for at least ``window`` seconds."""
    start = None
    for t, good in zip(times, ok):
        if good:
            if start is None:
                start = t
            if t - start >= window - 1e-9:
                return float(start)
        else:
            start = None
    return None


def detect_outcomes(trace: list[TraceRecord], rho_o: float, window: float = SUSTAIN_WINDOW,
                    eps_hull: float = EPS_HULL, eps_rho: float = EPS_RHO,
                    eps_phase: float = EPS_PHASE) -> OutcomeReport:
    if not trace:
        raise ValueError("empty trace")
    times = np.array([r.t for r in trace])
    hull = np.array([r.hull_distance for r in trace])
    rho_err = np.array([np.max(np.abs(r.rho - rho_o)) for r in trace])
    n = len(trace[0].rho)
    phase_err = np.array([np.max(np.abs(adjacent_gaps(r.theta) - 2 * math.pi / n)) for r in trace])
    surrounded = hull < eps_hull
    equal = surrounded & (rho_err <= eps_rho) & (phase_err <= eps_phase)

    rates = {"rho_error": fit_decay_rate(times, rho_err, floor=1e-9),
             "hull_distance": fit_decay_rate(times, hull, floor=1e-9)}
    return OutcomeReport(
        surrounded_at=_sustained_start(times, surrounded, window),
        equally_surrounded_at=_sustained_start(times, equal, window),
        final_hull_distance=float(hull[-1]), final_rho_error=float(rho_err[-1]),
        final_phase_error=float(phase_err[-1]), rates=rates)
