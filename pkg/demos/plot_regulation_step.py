"""
Speed and heading steps with the identified gains
=================================================

A single hull at rest is asked for 2 m/s and a 300 degree heading. With
kappa1 = 0.02 and kappa2 = 0.001 the surge error obeys
s^2 + 0.001 s + 0.02 = 0, whose damping ratio is only 0.0035, so the speed
rings for a long time. Heading poles sit at -kappa3 and -kappa4; the slow
one (-0.076) sets a settling time of about a minute.

For contrast we repeat the step with better-damped gains.
"""

import math
from pathlib import Path

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from usvswarm import RegGains, VesselState, load_preset
from usvswarm.conversion import ReferenceSignal
from usvswarm.regulation import simulate_tracking

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

sc = load_preset("surround-baseline")
step = lambda t: ReferenceSignal(w_r=2.0, psi_r=math.radians(300.0))

g = sc.gains
zeta = g.kappa2 / (2 * math.sqrt(g.kappa1))
print(f"surge damping ratio {zeta:.4f}, roots {g.surge_roots}")

fig, ax = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
for label, gains in (("identified gains", g), ("damped gains", RegGains(0.1, 0.5, 0.5, 1.0))):
    res = simulate_tracking(VesselState(), step, gains, sc.params, duration=200.0, law="pid",
                            control_period=sc.dt_ctrl, saturate_output=True)
    ax[0].plot(res.t, res.states[:, 3], label=label)
    ax[1].plot(res.t, np.degrees(res.states[:, 2]))
ax[0].axhline(2.0, color="k", lw=0.5)
ax[1].axhline(300.0, color="k", lw=0.5)
ax[0].set_ylabel("surge (m/s)")
ax[1].set_ylabel("heading (deg)")
ax[1].set_xlabel("time (s)")
ax[0].legend()
fig.savefig(out / "regulation_step.png", dpi=120)
