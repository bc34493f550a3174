"""
Solving a problem by name
=========================

One call, any registered method. The Lorenz system is defined in place,
solved with ``tsit5``, sampled through the continuous extension, and then
re-solved with new parameters via ``remake``.
"""

# %%
import numpy as np

from confedsolve import ODEProblem, remake, solve
from confedsolve.svgplot import line_plot

from _common import out_dir


def lorenz(du, u, p, t):
    du[0] = p[0] * (u[1] - u[0])
    du[1] = u[0] * (p[1] - u[2]) - u[1]
    du[2] = u[0] * u[1] - p[2] * u[2]


prob = ODEProblem(lorenz, [1.0, 0.0, 0.0], (0.0, 100.0), [10.0, 28.0, 8 / 3])
sol = solve(prob, "tsit5")
print(sol.retcode.value, "after", sol.stats.naccept, "steps,", sol.stats.nf, "f-evaluations")

# %%
# The solution object is callable anywhere in tspan.
ts = np.linspace(0, 100, 20001)
xyz = sol(ts)
print("u(50.5) =", sol(50.5))

# %%
# Same problem, new parameters; nothing else changes.
calm = solve(remake(prob, p=[10.0, 10.0, 8 / 3]), "tsit5")
print("rho = 10 settles to", calm.u[-1])

svg = line_plot({"x": (ts, xyz[:, 0]), "z": (ts, xyz[:, 2])}, "t", "state", "Lorenz, tsit5")
(out_dir() / "lorenz.svg").write_text(svg)
