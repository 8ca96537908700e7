"""Metric extraction from traces and deterministic SVG plots."""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .engine import TraceRecord


def _per_vessel(trace, fn, label):
    vals = np.array([fn(r) for r in trace])
    return {f"{label}{i}": vals[:, i] for i in range(vals.shape[1])}


def _phase(trace):
    n = len(trace[0].rho)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    vals = np.array([r.theta_pairs for r in trace])
    deg = np.degrees((vals + np.pi) % (2 * np.pi) - np.pi)
    return {f"theta_{i}{j}": deg[:, k] for k, (i, j) in enumerate(pairs)}


# name -> (axis label, extractor returning {series label: values})
METRICS = {
    "rho": ("distance to target (m)", lambda tr: _per_vessel(tr, lambda r: r.rho, "rho_")),
    "phase": ("inter-vessel phase (deg)", _phase),
    "hull": ("hull distance (m)", lambda tr: {"P_xo": np.array([r.hull_distance for r in tr])}),
    "V": ("V", lambda tr: {"V": np.array([r.V for r in tr])}),
    "P": ("P", lambda tr: {"P": np.array([r.P for r in tr])}),
    "w": ("surge speed (m/s)", lambda tr: _per_vessel(tr, lambda r: r.states[:, 3], "w_")),
    "psi": ("heading (deg)", lambda tr: _per_vessel(tr, lambda r: np.degrees(r.states[:, 2]), "psi_")),
    "tau1": ("propeller command", lambda tr: _per_vessel(tr, lambda r: r.taus[:, 0], "tau1_")),
    "tau2": ("steering angle (deg)", lambda tr: _per_vessel(tr, lambda r: np.degrees(r.taus[:, 1]), "tau2_")),
}


def metric_series(trace: list[TraceRecord], name: str) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Time base and labelled series for metric ``name``."""
    if name not in METRICS:
        raise KeyError(f"unknown metric {name!r}; available: {', '.join(METRICS)}")
    if not trace:
        raise ValueError("empty trace")
    t = np.array([r.t for r in trace])
    return t, METRICS[name][1](trace)


def render_svg(trace: list[TraceRecord], name: str) -> bytes:
    """SVG bytes for one metric. Identical traces give identical bytes."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t, series = metric_series(trace, name)
    with matplotlib.rc_context({"svg.hashsalt": "usvswarm", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for label, values in series.items():
            ax.plot(t, values, label=label, lw=1.2)
        ax.set_xlabel("time (s)")
        ax.set_ylabel(METRICS[name][0])
        if name == "phase":
            ax.set_ylim(-180, 180)
        ax.legend(loc="best", fontsize="small")
        ax.grid(alpha=0.3)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def write_plots(trace: list[TraceRecord], names, out_dir: str | Path) -> list[Path]:
    # validate everything before touching the filesystem
    for name in names:
        metric_series(trace, name)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in names:
        p = out_dir / f"{name}.svg"
        p.write_bytes(render_svg(trace, name))
        paths.append(p)
    return paths
