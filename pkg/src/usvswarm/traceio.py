"""CSV trace format (one row per control tick) and its exact round trip.

Column order is fixed. Global columns come first::

    t, target_x, target_y, hull_distance, V, P

then, for each vessel ``i`` (0-based), the block of ``VESSEL_FIELDS`` with
suffix ``_i``, then the wrapped pairwise bearings ``theta_i_j`` for ``i < j``.
Floats are written with 17 significant digits, so parsing reproduces them
bit for bit.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .conversion import PerturbationRecord, ReferenceSignal
from .engine import TraceRecord

GLOBAL_FIELDS = ["t", "target_x", "target_y", "hull_distance", "V", "P"]
STATE_FIELDS = ["x", "y", "psi", "w", "v", "r"]
REF_FIELDS = ["w_r", "psi_r", "v_r", "dw_r", "ddw_r", "dpsi_r", "ddpsi_r",
              "varpi", "dvarpi", "ddvarpi"]
VESSEL_FIELDS = (STATE_FIELDS + ["tau1", "tau2", "sat1", "sat2", "infeasible"] + REF_FIELDS
                 + ["e_x", "e_y", "eta_tilde", "omega_tilde", "y_x", "y_y", "rho", "theta"])
INT_FIELDS = {"sat1", "sat2", "infeasible"}


def columns(n: int) -> list[str]:
    cols = list(GLOBAL_FIELDS)
    for i in range(n):
        cols += [f"{name}_{i}" for name in VESSEL_FIELDS]
    cols += [f"theta_{i}_{j}" for i in range(n) for j in range(i + 1, n)]
    return cols


def _fmt(x: float) -> str:
    return "%.17g" % x


def _row(rec: TraceRecord) -> list[str]:
    out = [_fmt(rec.t), _fmt(rec.target[0]), _fmt(rec.target[1]), _fmt(rec.hull_distance),
           _fmt(rec.V), _fmt(rec.P)]
    for i in range(len(rec.rho)):
        ref, pert = rec.refs[i], rec.perturbations[i]
        out += [_fmt(v) for v in rec.states[i]]
        out += [_fmt(rec.taus[i, 0]), _fmt(rec.taus[i, 1]), str(int(rec.saturated[i, 0])),
                str(int(rec.saturated[i, 1])), str(int(rec.infeasible[i]))]
        out += [_fmt(getattr(ref, f)) for f in REF_FIELDS]
        out += [_fmt(pert.e[0]), _fmt(pert.e[1]), _fmt(pert.eta_tilde_r), _fmt(pert.omega_tilde_r),
                _fmt(rec.estimates[i, 0]), _fmt(rec.estimates[i, 1]), _fmt(rec.rho[i]),
                _fmt(rec.theta[i])]
    out += [_fmt(v) for v in rec.theta_pairs]
    return out


def dumps(trace: list[TraceRecord]) -> str:
    if not trace:
        raise ValueError("empty trace")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns(len(trace[0].rho)))
    for rec in trace:
        w.writerow(_row(rec))
    return buf.getvalue()


def write_trace(trace: list[TraceRecord], path: str | Path) -> None:
    Path(path).write_text(dumps(trace))


def vessel_count(header: list[str]) -> int:
    return sum(1 for c in header if c.startswith("x_"))


def loads(text: str) -> list[TraceRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("trace file has no header")
    header = rows[0]
    n = vessel_count(header)
    if header != columns(n):
        raise ValueError("trace header does not match the documented column order")
    trace = []
    per = len(VESSEL_FIELDS)
    for row in rows[1:]:
        g = [float(v) for v in row[:6]]
        states = np.zeros((n, 6))
        taus = np.zeros((n, 2))
        sats = np.zeros((n, 2), dtype=int)
        infeasible = np.zeros(n, dtype=bool)
        y = np.zeros((n, 2))
        rho = np.zeros(n)
        theta = np.zeros(n)
        refs, perts = [], []
        for i in range(n):
            block = row[6 + i * per: 6 + (i + 1) * per]
            vals = dict(zip(VESSEL_FIELDS, block))
            states[i] = [float(vals[f]) for f in STATE_FIELDS]
            taus[i] = float(vals["tau1"]), float(vals["tau2"])
            sats[i] = int(vals["sat1"]), int(vals["sat2"])
            infeasible[i] = bool(int(vals["infeasible"]))
            refs.append(ReferenceSignal(**{f: float(vals[f]) for f in REF_FIELDS}))
            perts.append(PerturbationRecord(np.array([float(vals["e_x"]), float(vals["e_y"])]),
                                            float(vals["eta_tilde"]), float(vals["omega_tilde"])))
            y[i] = float(vals["y_x"]), float(vals["y_y"])
            rho[i] = float(vals["rho"])
            theta[i] = float(vals["theta"])
        pairs = np.array([float(v) for v in row[6 + n * per:]])
        trace.append(TraceRecord(
            t=g[0], states=states, taus=taus, saturated=sats, refs=refs, perturbations=perts,
            estimates=y, target=np.array(g[1:3]), hull_distance=g[3], V=g[4], P=g[5], rho=rho,
            theta=theta, theta_pairs=pairs, infeasible=infeasible))
    return trace


def read_trace(path: str | Path) -> list[TraceRecord]:
    return loads(Path(path).read_text())
