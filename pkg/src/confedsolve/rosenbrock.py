"""Rosenbrock23: the L-stable 2(3) linearly implicit pair of Shampine & Reichelt.

Coefficients follow "The MATLAB ODE Suite" (SIAM J. Sci. Comput. 18, 1997):
``d = 1/(2 + sqrt(2))``, ``e32 = 6 + sqrt(2)``. The second-order solution
is propagated and the third-order stage provides the error estimate.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .control import error_norm
from .errors import NonFiniteJacobian, SingularMatrix
from .integrator import OneStepIntegrator, Step
from .linalg import SQRT_EPS, JacobianWorkspace, fd_jacobian, lu_factor, lu_solve

D = 1.0 / (2.0 + math.sqrt(2.0))
E32 = 6.0 + math.sqrt(2.0)

LARGE_SYSTEM = 10_000


def warn_if_large(n: int, name: str) -> None:
    if n > LARGE_SYSTEM:
        warnings.warn(
            f"{name}: dense {n}x{n} Jacobian for a system of size {n} may not fit in memory",
            RuntimeWarning,
            stacklevel=3,
        )


def time_derivative(rhs, u, t, f0):
    """Forward difference of ``rhs`` in ``t`` (one evaluation)."""
    dt = SQRT_EPS * max(abs(t), 1.0)
    t1 = t + dt
    return (rhs(u, t1) - f0) / (t1 - t)


def rosenbrock23_step(rhs, u, t, dt, J, f0=None, dT=None, stats=None):
    """One Rosenbrock23 step from ``(t, u)`` with Jacobian approximation ``J``.

    Returns ``(u_new, err_est, data)``; ``data`` holds the stages ``k1``,
    ``k2`` used by the continuous extension and ``f_new = f(t + dt, u_new)``.
    Raises :class:`SingularMatrix` when ``I - d*dt*J`` cannot be factorized.
    """
    n = u.size
    if f0 is None:
        f0 = rhs(u, t)
    if dT is None:
        dT = np.zeros(n)
    W = np.eye(n) - (D * dt) * J
    lu = lu_factor(W)
    if stats is not None:
        stats.nfactor += 1
        stats.nsolve += 3
    k1 = lu_solve(lu, f0 + (dt * D) * dT)
    f1 = rhs(u + (0.5 * dt) * k1, t + 0.5 * dt)
    k2 = lu_solve(lu, f1 - k1) + k1
    u_new = u + dt * k2
    f2 = rhs(u_new, t + dt)
    k3 = lu_solve(lu, f2 - E32 * (k2 - f1) - 2.0 * (k1 - f0) + (dt * D) * dT)
    err_est = (dt / 6.0) * (k1 - 2.0 * k2 + k3)
    return u_new, err_est, {"k1": k1, "k2": k2, "f_new": f2, "lu": lu}


class RosenbrockInterp:
    """Second-order continuous extension built from the first two stages."""

    __slots__ = ("t0", "dt", "u0", "u1", "k1", "k2")

    def __init__(self, t0, dt, u0, u1, k1, k2):
        self.t0, self.dt, self.u0, self.u1, self.k1, self.k2 = t0, dt, u0, u1, k1, k2

    def __call__(self, tq):
        th = (tq - self.t0) / self.dt
        if th == 0.0:
            return self.u0.copy()
        if th == 1.0:
            return self.u1.copy()
        c = 1.0 / (1.0 - 2.0 * D)
        w1 = th * (1.0 - th) * c
        w2 = th * (th - 2.0 * D) * c
        return self.u0 + self.dt * (w1 * self.k1 + w2 * self.k2)


class Rosenbrock23(OneStepIntegrator):
    """Adaptive Rosenbrock23 integrator.

    By default the Jacobian is refreshed at the start of every step (and
    reused across rejections of that step). ``jac_reuse=True`` keeps it for
    up to ``jac_max_age`` accepted steps, refreshing early after a
    rejection; the method stays second order for any Jacobian.
    """

    order = 2
    adaptive = True
    error_order = 3

    def __init__(self, prob, opts, stats, jac_reuse: bool = False, jac_max_age: int = 20):
        super().__init__(prob, opts, stats)
        self.jac_reuse = jac_reuse
        self.jac_max_age = jac_max_age
        self.workspace = JacobianWorkspace(prob.u0.size)
        warn_if_large(prob.u0.size, "rosenbrock23")
        self.J = None
        self.dT = None
        self.jac_at = None
        self.jac_age = 0

    @property
    def jacobian(self):
        return self.J

    def reset(self, t, u):
        super().reset(t, u)
        self.J = None
        self.jac_at = None
        self.jac_age = 0

    def _refresh(self, t, u):
        self.J = fd_jacobian(self.rhs, u, t, self.workspace, f0=self.fcur, stats=self.stats)
        self.dT = time_derivative(self.rhs, u, t, self.fcur)
        self.jac_at = t
        self.jac_age = 0

    def attempt(self, t, u, dt):
        if self.J is None:
            need = True
        elif self.jac_reuse:
            need = self.jac_age >= self.jac_max_age
        else:
            need = self.jac_at != t
        try:
            if need:
                self._refresh(t, u)
            u_new, err_est, data = rosenbrock23_step(
                self.rhs, u, t, dt, self.J, f0=self.fcur, dT=self.dT, stats=self.stats)
        except (SingularMatrix, NonFiniteJacobian):
            return Step(t, dt, u, u, math.inf, None, False, None)
        if self.opts.adaptive:
            err = error_norm(u, u_new, err_est, self.opts.abstol, self.opts.reltol)
        else:
            err = 0.0
        interp = RosenbrockInterp(t, dt, u, u_new, data["k1"], data["k2"])
        return Step(t, dt, u, u_new, err, interp, True, data)

    def accept(self, step):
        super().accept(step)
        self.jac_age += 1

    def reject(self, step):
        if self.jac_reuse and self.jac_at != step.t:
            self.J = None

    def propose_dt(self, step, accepted):
        if not step.ok:
            return 0.5 * step.dt
        return super().propose_dt(step, accepted)
