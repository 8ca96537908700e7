"""
Equally surrounding a static target
===================================

Three vessels start at random in a 40 x 40 m box and are asked to sit on
a 10 m circle around the target, 120 degrees apart. We run the same
scenario twice: once integrating the commanded velocities directly (the
kinematic baseline) and once through the full hull model with
backstepping regulation.
"""

import dataclasses
from pathlib import Path

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from usvswarm import detect_outcomes, ideal_mode_run, load_preset, run
from usvswarm.engine import adjacent_gaps

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

sc = dataclasses.replace(load_preset("surround-baseline"), duration=600.0)

# kinematic baseline: every vessel moves exactly as commanded
ideal = ideal_mode_run(sc)
print("kinematic:", detect_outcomes(ideal, sc.swarm.rho_o))

# full stack: references, regulation, saturation, hull dynamics
trace, report = run(sc)
print("full stack:", report)

###############################################################################
# Distances to the target and adjacent phase gaps

fig, ax = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
for label, tr, style in (("kinematic", ideal, "--"), ("hull model", trace, "-")):
    t = np.array([r.t for r in tr])
    rho = np.array([r.rho for r in tr])
    gaps = np.degrees([adjacent_gaps(r.theta) for r in tr])
    ax[0].plot(t, rho, style, lw=1)
    ax[1].plot(t, gaps, style, lw=1)
ax[0].axhline(sc.swarm.rho_o, color="k", lw=0.5)
ax[1].axhline(120, color="k", lw=0.5)
ax[0].set_ylabel("rho (m)")
ax[1].set_ylabel("adjacent gap (deg)")
ax[1].set_xlabel("time (s)")
fig.savefig(out / "equal_surround.png", dpi=120)

###############################################################################
# Paths in the plane

fig, ax = plt.subplots(figsize=(5, 5))
xy = np.array([r.positions for r in trace])
for i in range(xy.shape[1]):
    ax.plot(xy[:, i, 0], xy[:, i, 1], lw=0.8)
    ax.plot(*xy[-1, i], "o")
ax.plot(*trace[0].target, "k*", ms=10)
ax.add_patch(plt.Circle(trace[0].target, sc.swarm.rho_o, fill=False, ls=":"))
ax.set_aspect("equal")
fig.savefig(out / "equal_surround_paths.png", dpi=120)
