"""Convex-hull distance and angle bookkeeping."""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi
ORIENT_TOL = 1e-12


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Counterclockwise hull vertices by Andrew's monotone chain.

    Collinear input collapses to its two extreme points, coincident input
    to a single point.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("need at least one point")
    uniq = sorted(set(map(tuple, pts)))
    if len(uniq) == 1:
        return np.array(uniq)

    def half(seq):
        chain: list[tuple[float, float]] = []
        for p in seq:
            # exact sign: a tolerance here could discard a vertex of a thin sliver
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0.0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(uniq)
    upper = half(reversed(uniq))
    hull = lower[:-1] + upper[:-1]
    return np.array(hull)


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        # zero or underflowing length: nearest endpoint
        return float(min(np.hypot(*(p - a)), np.hypot(*(p - b))))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    # clamped projections use the endpoint itself; a + 1.0 * (b - a) need not round to b
    closest = a if t == 0.0 else b if t == 1.0 else a + t * ab
    return float(np.hypot(*(p - closest)))


def hull_distance(x_o, points) -> float:
    """Euclidean distance from ``x_o`` to the convex hull of ``points``; 0 inside."""
    p = np.asarray(x_o, dtype=float)
    hull = convex_hull(points)
    if len(hull) == 1:
        return float(np.hypot(*(p - hull[0])))
    if len(hull) == 2:
        a, b = hull
        if _cross(a, b, p) == 0.0 and np.all(np.minimum(a, b) <= p) and np.all(p <= np.maximum(a, b)):
            return 0.0
        return _segment_distance(p, a, b)
    edges = list(zip(hull, np.roll(hull, -1, axis=0)))
    scale = max(1.0, float(np.max(np.abs(hull))), float(np.max(np.abs(p))))
    if all(_cross(a, b, p) >= -ORIENT_TOL * scale * scale for a, b in edges):
        return 0.0
    return min(_segment_distance(p, a, b) for a, b in edges)


def wrap(angle: float) -> float:
    """Reduce into [-pi, pi)."""
    out = (angle + math.pi) % TWO_PI - math.pi
    # float modulo can land exactly on +pi for tiny negative inputs
    return -math.pi if out >= math.pi else out


def wrapped_diff(a: float, b: float) -> float:
    return wrap(a - b)


def unwrap(prev: float | None, raw: float) -> float:
    """Representative of ``raw`` (mod 2*pi) closest to ``prev``.

    With no previous value the raw angle is returned unchanged.
    """
    if prev is None:
        return float(raw)
    return prev + wrap(raw - prev)
