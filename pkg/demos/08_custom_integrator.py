"""
Adding a method from outside the package
========================================

An integrator is a class with ``attempt``; registering it under a name
makes it available to ``solve``, the CLI's ``list`` and the devtools.
"""

# %%
import numpy as np

from confedsolve import (AlgorithmDescriptor, Family, Integrator, ProblemKind, Registry, Step,
                         register_algorithm, solve)
from confedsolve.builtins import register_builtins
from confedsolve.devtools import convergence_order
from confedsolve.problems import linear_decay


class Heun(Integrator):
    """Trapezoidal predictor-corrector, with an Euler step as error estimate."""

    order = 2
    adaptive = True

    def attempt(self, t, u, dt):
        k1 = self.rhs(u, t)
        k2 = self.rhs(u + dt * k1, t + dt)
        u_new = u + 0.5 * dt * (k1 + k2)
        scale = self.opts.abstol + self.opts.reltol * np.maximum(np.abs(u), np.abs(u_new))
        err = float(np.sqrt(np.mean((0.5 * dt * (k2 - k1) / scale) ** 2)))
        interp = lambda tq: u + (tq - t) / dt * (u_new - u)  # noqa: E731
        return Step(t, dt, u, u_new, err, interp)

    def propose_dt(self, step, accepted):
        if not self.opts.adaptive:
            return step.dt
        return step.dt * min(5.0, max(0.2, 0.9 * max(step.err, 1e-10) ** -0.5))


registry = Registry()
register_builtins(registry)
register_algorithm(registry, AlgorithmDescriptor("heun", {ProblemKind.FIRST_ORDER},
                                                 Family.EXPLICIT_RK, adaptive=True,
                                                 stiff_capable=False, order=2),
                   Heun)

# %%
sol = solve(linear_decay(), "heun", registry=registry, reltol=1e-6)
print("heun:", sol.retcode.value, sol.stats.naccept, "steps, error", abs(sol.u[-1][0] - np.exp(-1)))
print("observed order:",
      round(convergence_order(linear_decay(), "heun", [0.1, 0.05, 0.025, 0.0125], registry=registry), 2))
