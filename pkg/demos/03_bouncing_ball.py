"""
Events: the bouncing ball
=========================

A continuous callback flips the velocity when the height crosses zero.
Every event restarts the integrator, which sends BDF back to order 1;
a one-step Rosenbrock method does not pay that price.
"""

# %%
import math

import numpy as np

from confedsolve import solve
from confedsolve.problems import bouncing_ball
from confedsolve.svgplot import line_plot

from _common import out_dir

prob, floor = bouncing_ball()
tol = dict(reltol=1e-6, abstol=1e-8)
ros = solve(prob, "rosenbrock23", callbacks=[floor], **tol)
bdf = solve(prob, "bdf", callbacks=[floor], **tol)

# %%
t = np.asarray(ros.t)
events = t[1:][np.diff(t) == 0]
exact = (2 * np.arange(1, len(events) + 1) - 1) * math.sqrt(2 / 9.8)
print("event times :", np.round(events, 6))
print("closed form :", np.round(exact, 6))
print("steps       : rosenbrock23", ros.stats.naccept, " bdf", bdf.stats.naccept)

# %%
# BDF's order trace drops to 1 after every bounce.
print("bdf orders  :", "".join(map(str, bdf.stats.metadata["order_trace"])))

ts = np.linspace(0, 5, 1000)
svg = line_plot({"rosenbrock23": (ts, ros(ts)[:, 0]), "bdf": (ts, bdf(ts)[:, 0])},
                "t", "height", "bouncing ball")
(out_dir() / "bouncing_ball.svg").write_text(svg)
