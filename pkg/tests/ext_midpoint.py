"""A third-party integrator that lives outside the package.

Explicit midpoint (second order, fixed step) written only against the
public contract: subclass ``Integrator``, return ``Step`` objects, and
register a descriptor plus factory.
"""

import numpy as np

from confedsolve import AlgorithmDescriptor, Family, Integrator, ProblemKind, Step, register_algorithm

NAME = "ext_midpoint"


class Midpoint(Integrator):
    order = 2

    def attempt(self, t, u, dt):
        k1 = self.rhs(u, t)
        k2 = self.rhs(u + 0.5 * dt * k1, t + 0.5 * dt)
        u_new = u + dt * k2

        def interp(tq, t=t, dt=dt, u=u, u_new=u_new):
            th = (tq - t) / dt
            return (1 - th) * u + th * u_new

        return Step(t, dt, u, u_new, 0.0, interp)


DESCRIPTOR = AlgorithmDescriptor(NAME, {ProblemKind.FIRST_ORDER}, Family.EXPLICIT_RK,
                                 adaptive=False, stiff_capable=False, order=2,
                                 description="explicit midpoint (external plug-in)")


def register(registry):
    register_algorithm(registry, DESCRIPTOR, Midpoint)


def midpoint_error(dt):
    """Final error of the plug-in on u' = -u over [0, 1]."""
    from confedsolve import solve
    from confedsolve.problems import linear_decay

    sol = solve(linear_decay(), NAME, dt=dt)
    return abs(sol.u[-1][0] - np.exp(-1.0))
