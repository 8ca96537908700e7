"""Collective laws: surrounding control, target estimator, equally-surrounding control.

Also hosts the two energy functions whose decrease certifies the collective
behaviour (pairwise-repulsion plus attraction energy ``V`` and the phase
potential ``P``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .geometry import wrapped_diff

RHO_MIN = 0.1
# phases closer to the 2*pi/N gap than this count as separated (absorbs degree->radian rounding)
PHASE_TOL = 1e-12


class DegenerateRadius(ValueError):
    """Vessel is too close to the target for polar coordinates to be meaningful."""


@dataclass(frozen=True)
class SwarmConfig:
    """Gains and graphs of the upper-level protocols.

    ``comm_graph[i]`` lists the communication neighbours of vessel ``i``;
    ``None`` means complete graph. ``leaders`` are the vessels that sense the
    target directly (defaults to all).
    """

    N: int = 3
    mu: float = 12.0
    gamma1: float = 7.5e-4
    gamma2: float = 0.1
    gamma3: float = 0.5
    beta1: float = 0.13
    beta2: float = 0.06
    rho_o: float = 10.0
    comm_graph: tuple[tuple[int, ...], ...] | None = None
    leaders: frozenset[int] | None = field(default=None)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        for name in ("mu", "gamma1", "gamma2", "gamma3", "beta1", "beta2", "rho_o"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        graph = self.comm_graph
        if graph is None:
            graph = tuple(tuple(j for j in range(self.N) if j != i) for i in range(self.N))
        graph = tuple(tuple(sorted(set(int(j) for j in nbrs))) for nbrs in graph)
        if len(graph) != self.N:
            raise ValueError("comm_graph must list neighbours for every vessel")
        for i, nbrs in enumerate(graph):
            for j in nbrs:
                if not 0 <= j < self.N or j == i:
                    raise ValueError(f"invalid neighbour {j} of vessel {i}")
                if i not in graph[j]:
                    raise ValueError(f"comm_graph not symmetric: {i}->{j} without {j}->{i}")
        object.__setattr__(self, "comm_graph", graph)
        leaders = frozenset(range(self.N)) if self.leaders is None else frozenset(int(i) for i in self.leaders)
        if any(not 0 <= i < self.N for i in leaders):
            raise ValueError("leader index out of range")
        object.__setattr__(self, "leaders", leaders)

    def check_theorem_hypotheses(self) -> None:
        """Raise unless every gain is strictly positive and N >= 3."""
        if self.N < 3:
            raise ValueError("need at least 3 vessels")
        for name in ("mu", "gamma1", "gamma2", "gamma3", "beta1", "beta2", "rho_o"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def check_estimator_graph(self) -> None:
        """The decentralized estimator needs a connected graph and at least one leader."""
        if not self.leaders:
            raise ValueError("leader set is empty: no vessel senses the target")
        n_comp, _ = connected_components(self.adjacency(), directed=False)
        if n_comp != 1:
            raise ValueError(f"communication graph is disconnected ({n_comp} components)")

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.N, self.N))
        for i, nbrs in enumerate(self.comm_graph):
            A[i, list(nbrs)] = 1.0
        return A

    def leader_mask(self) -> np.ndarray:
        m = np.zeros(self.N)
        m[list(self.leaders)] = 1.0
        return m


def proximity_neighbors(x, i: int, mu: float) -> list[int]:
    x = np.asarray(x, dtype=float)
    d = np.hypot(*(x - x[i]).T)
    return [j for j in range(len(x)) if j != i and d[j] < mu]


def surrounding_control(x, i: int, target_est, cfg: SwarmConfig) -> np.ndarray:
    """Commanded velocity of vessel ``i``: short-range repulsion plus attraction."""
    x = np.asarray(x, dtype=float)
    u = np.zeros(2)
    for j in proximity_neighbors(x, i, cfg.mu):
        xij = x[i] - x[j]
        u += (cfg.mu ** 2 - xij @ xij) * xij
    return cfg.gamma1 * u + cfg.gamma2 * (np.asarray(target_est, dtype=float) - x[i])


def surrounding_controls(x: np.ndarray, targets: np.ndarray, cfg: SwarmConfig) -> np.ndarray:
    """All vessels at once; ``targets`` is one point or one estimate per vessel."""
    diff = x[:, None, :] - x[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    mask = d2 < cfg.mu ** 2
    np.fill_diagonal(mask, False)
    weight = np.where(mask, cfg.mu ** 2 - d2, 0.0)
    return cfg.gamma1 * np.einsum("ij,ijk->ik", weight, diff) + cfg.gamma2 * (targets - x)


@dataclass
class EstimatorState:
    y: np.ndarray

    @classmethod
    def from_positions(cls, x) -> "EstimatorState":
        return cls(np.array(x, dtype=float, copy=True))


def grounded_laplacian(cfg: SwarmConfig) -> np.ndarray:
    A = cfg.adjacency()
    return np.diag(A.sum(axis=1)) - A + np.diag(cfg.leader_mask())


def estimator_rhs(y: np.ndarray, x_o, cfg: SwarmConfig) -> np.ndarray:
    A = cfg.adjacency()
    consensus = A @ y - A.sum(axis=1)[:, None] * y
    innovation = cfg.leader_mask()[:, None] * (np.asarray(x_o, dtype=float) - y)
    return cfg.gamma3 * (consensus + innovation)


def estimator_step(e: EstimatorState, x_o, cfg: SwarmConfig, dt: float) -> EstimatorState:
    """RK4 advance of the consensus estimator with the target held over ``dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = e.y
    f = lambda z: estimator_rhs(z, x_o, cfg)
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return EstimatorState(y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


@dataclass(frozen=True)
class PolarState:
    rho: float
    theta: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")


def angular_neighbors(thetas, i: int, N: int | None = None) -> list[int]:
    N = len(thetas) if N is None else N
    gap = 2.0 * math.pi / N
    return [j for j in range(len(thetas))
            if j != i and abs(wrapped_diff(thetas[i], thetas[j])) < gap - PHASE_TOL]


def _sign(theta_ij: float, i: int, j: int) -> float:
    if theta_ij > 0:
        return 1.0
    if theta_ij < 0:
        return -1.0
    # coincident phases: split deterministically by index
    return 1.0 if i < j else -1.0


def phase_rate(thetas, i: int, cfg: SwarmConfig) -> float:
    """Angular rate command of vessel ``i`` (repulsion among close phases)."""
    N = len(thetas)
    gap = 2.0 * math.pi / N
    total = 0.0
    for j in angular_neighbors(thetas, i, N):
        tij = wrapped_diff(thetas[i], thetas[j])
        total += (gap - abs(tij)) * _sign(tij, i, j)
    return cfg.beta2 * total


def equal_surround_control(ps: PolarState, i: int, thetas, cfg: SwarmConfig) -> tuple[float, float]:
    """Radial speed and angular rate commands ``(eta_r, omega_r)`` for vessel ``i``."""
    if ps.rho <= RHO_MIN:
        raise DegenerateRadius(f"rho={ps.rho} below {RHO_MIN}")
    return cfg.beta1 * (cfg.rho_o - ps.rho), phase_rate(thetas, i, cfg)


def lyapunov_V(x, x_o, cfg: SwarmConfig) -> float:
    x = np.asarray(x, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    inside = d2 < cfg.mu ** 2
    np.fill_diagonal(inside, False)
    v1 = 0.25 * cfg.gamma1 * float(np.sum(np.where(inside, (d2 - cfg.mu ** 2) ** 2, 0.0)))
    v2 = cfg.gamma2 * float(np.sum((np.asarray(x_o, dtype=float) - x) ** 2))
    return v1 + v2


def lyapunov_P(thetas, cfg: SwarmConfig) -> float:
    N = len(thetas)
    gap = 2.0 * math.pi / N
    total = 0.0
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            a = abs(wrapped_diff(thetas[i], thetas[j]))
            if a < gap - PHASE_TOL:
                total += 0.5 * cfg.beta2 * (a - gap) ** 2
    return total
