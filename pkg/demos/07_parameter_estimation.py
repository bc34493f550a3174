"""
A loss function for parameter estimation
========================================

``parameter_l2loss`` turns (problem, method, data) into ``loss(p)``.
Any optimizer can drive it; here a plain grid search does.
"""

# %%
import numpy as np

from confedsolve import remake, solve
from confedsolve.estimation import parameter_l2loss
from confedsolve.problems import lorenz

rng = np.random.default_rng(0)
prob = remake(lorenz(), tspan=(0.0, 2.0))
times = np.linspace(0.1, 2.0, 40)
truth = solve(prob, "dp5", reltol=1e-10, abstol=1e-12, saveat=times, save_everystep=False)
data = truth.u + 0.01 * rng.standard_normal(truth.u.shape)

loss = parameter_l2loss(prob, "tsit5", times, data, reltol=1e-8, abstol=1e-10)

# %%
grid = np.linspace(24.0, 32.0, 33)
values = [loss([10.0, rho, 8 / 3]) for rho in grid]
print("best rho on the grid:", grid[int(np.argmin(values))])

# %%
# Swapping the method changes nothing about the loss interface.
for alg in ("dp5", "rosenbrock23", "autoswitch(tsit5,rosenbrock23)"):
    other = parameter_l2loss(prob, alg, times, data, reltol=1e-8, abstol=1e-10)
    print(f"{alg:>31s}: loss at rho = 28 is {other([10.0, 28.0, 8 / 3]):.4f}")
