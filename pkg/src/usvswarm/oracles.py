"""Brute-force reference computations used by the verification suites.

Each routine takes a deliberately different path from the production code
it checks: the hull distance is minimised directly over convex-combination
weights rather than built from hull edges, gradients come from central differences, convergence rates from
an eigen-decomposition.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def simplex_grid(n: int, resolution: int) -> np.ndarray:
    """All weight vectors on the ``n``-simplex with entries in multiples of 1/resolution."""
    rows = []
    for cuts in itertools.combinations(range(resolution + n - 1), n - 1):
        prev, parts = -1, []
        for c in cuts:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + n - 1 - prev - 1)
        rows.append(parts)
    return np.array(rows, dtype=float) / resolution


def _face_minimum(x_o: np.ndarray, pts: np.ndarray, idx: tuple[int, ...]) -> tuple[float, np.ndarray] | None:
    """Closest point to ``x_o`` in the simplex spanned by ``pts[idx]``, if its
    unconstrained optimum has nonnegative weights."""
    base = pts[idx[0]]
    if len(idx) == 1:
        lam = np.ones(1)
    else:
        A = np.stack([pts[k] - base for k in idx[1:]], axis=1)
        G = A.T @ A
        if abs(np.linalg.det(G)) < 1e-12 * max(float(np.trace(G)), 1.0) ** len(idx[1:]):
            return None
        c = np.linalg.solve(G, A.T @ (x_o - base))
        lam = np.concatenate([[1.0 - c.sum()], c])
        if np.any(lam < -1e-12):
            return None
    point = lam @ pts[list(idx)]
    return float(np.hypot(*(x_o - point))), lam


def simplex_grid_distance(x_o, points, resolution: int = 12) -> tuple[float, np.ndarray]:
    """Minimise ``|x_o - sum(l_i p_i)|`` over simplex weights ``l``.

    A lattice over the weight simplex gives an upper bound. The exact value
    then comes from enumerating every face of at most three vertices: in
    the plane each point of the hull is a convex combination of three of
    them, so the minimum over those faces is the minimum over the simplex.
    """
    x_o = np.asarray(x_o, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    grid = simplex_grid(n, resolution)
    d2 = np.sum((grid @ pts - x_o) ** 2, axis=1)
    best_lam = grid[int(np.argmin(d2))].copy()
    best = math.sqrt(float(d2.min()))
    for size in (1, 2, 3):
        for idx in itertools.combinations(range(n), size):
            hit = _face_minimum(x_o, pts, idx)
            if hit is not None and hit[0] < best:
                best = hit[0]
                best_lam = np.zeros(n)
                best_lam[list(idx)] = hit[1]
    return best, best_lam


def central_gradient(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[idx] = h
        g[idx] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def grounded_laplacian_rate(edges, n: int, leaders, gain: float) -> float:
    """``gain`` times the smallest eigenvalue of Laplacian plus leader indicators."""
    M = np.zeros((n, n))
    for i, j in edges:
        M[i, j] -= 1.0
        M[j, i] -= 1.0
        M[i, i] += 1.0
        M[j, j] += 1.0
    for i in leaders:
        M[i, i] += 1.0
    return gain * float(np.linalg.eigvalsh(M)[0])
