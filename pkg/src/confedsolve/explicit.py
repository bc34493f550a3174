"""Explicit integrators: Euler, RK4, Tsit5, DP5 and velocity Verlet.

Tableau coefficients for Tsit5 are from Tsitouras (2011), "Runge-Kutta
pairs of order 5(4) satisfying only the first column simplifying
assumption"; DP5 and its continuous extension are the Dormand-Prince
5(4) pair as printed in Hairer, Norsett & Wanner, Solving ODEs I.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .control import error_norm
from .integrator import HermiteInterp, Integrator, OneStepIntegrator, Step


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    bhat: Optional[np.ndarray] = None
    embedded_order: Optional[int] = None
    fsal: bool = False

    @property
    def stages(self) -> int:
        return len(self.b)

    @property
    def btilde(self) -> Optional[np.ndarray]:
        return None if self.bhat is None else self.b - self.bhat

    def check(self, tol: float = 1e-14) -> None:
        """Raise ``AssertionError`` if the coefficients are inconsistent."""
        a, b, c = self.a, self.b, self.c
        assert np.allclose(np.triu(a), 0.0, atol=0), f"{self.name}: not explicit"
        assert np.allclose(a.sum(axis=1), c, rtol=0, atol=tol), f"{self.name}: c != row sums of a"
        assert abs(b.sum() - 1.0) <= tol, f"{self.name}: sum(b) != 1"
        if self.bhat is not None:
            assert abs(self.bhat.sum() - 1.0) <= tol, f"{self.name}: sum(bhat) != 1"
        if self.fsal:
            assert c[-1] == 1.0 and np.array_equal(a[-1], b), f"{self.name}: FSAL flag inconsistent"


def _tableau(name, rows, b, c, order, bhat=None, embedded_order=None, fsal=False):
    s = len(b)
    a = np.zeros((s, s))
    for i, row in enumerate(rows, start=1):
        a[i, : len(row)] = row
    tab = ButcherTableau(
        name, a, np.array(b, float), np.array(c, float), order,
        None if bhat is None else np.array(bhat, float), embedded_order, fsal,
    )
    for arr in (tab.a, tab.b, tab.c) + (() if tab.bhat is None else (tab.bhat,)):
        arr.setflags(write=False)
    return tab


EULER = _tableau("euler", [], [1.0], [0.0], 1)

RK4 = _tableau(
    "rk4",
    [[0.5], [0.0, 0.5], [0.0, 0.0, 1.0]],
    [1 / 6, 1 / 3, 1 / 3, 1 / 6],
    [0.0, 0.5, 0.5, 1.0],
    4,
)

DP5 = _tableau(
    "dp5",
    [
        [1 / 5],
        [3 / 40, 9 / 40],
        [44 / 45, -56 / 15, 32 / 9],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0],
    [0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0],
    5,
    bhat=[5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40],
    embedded_order=4,
    fsal=True,
)

_TSIT5_B = [
    0.09646076681806523, 0.01, 0.4798896504144996, 1.379008574103742,
    -3.290069515436081, 2.324710524099774, 0.0,
]
_TSIT5_BTILDE = [
    -0.00178001105222577714, -0.0008164344596567469, 0.007880878010261995,
    -0.1447110071732629, 0.5823571654525552, -0.45808210592918697,
    0.015151515151515152,
]

TSIT5 = _tableau(
    "tsit5",
    [
        [0.161],
        [-0.008480655492356989, 0.335480655492357],
        [2.897153057105493, -6.359448489975075, 4.3622954328695815],
        [5.325864828439257, -11.748883564062828, 7.4955393428898365, -0.09249506636175525],
        [5.86145544294642, -12.92096931784711, 8.159367898576159, -0.071584973281401,
         -0.028269050394068383],
        _TSIT5_B[:6],
    ],
    _TSIT5_B,
    [0.0, 0.161, 0.327, 0.9, 0.9800255409045097, 1.0, 1.0],
    5,
    bhat=[b - e for b, e in zip(_TSIT5_B, _TSIT5_BTILDE)],
    embedded_order=4,
    fsal=True,
)

TABLEAUS = {t.name: t for t in (EULER, RK4, DP5, TSIT5)}

# Dormand-Prince continuous extension (4th order), coefficients d1..d7.
_DP5_DENSE = np.array([
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
    -10690763975 / 1880347072, 701980252875 / 199316789632,
    -1453857185 / 822651844, 69997945 / 29380423,
])


def euler_step(f, u, p, t, dt):
    """One forward Euler step for an in-place ``f(du, u, p, t)``."""
    du = np.zeros_like(u, dtype=float)
    f(du, u, p, t)
    return u + dt * du


def erk_step(tableau: ButcherTableau, rhs, u, t, dt, k1=None):
    """One explicit Runge-Kutta step.

    ``rhs(u, t)`` returns the derivative. Passing ``k1 = f(t, u)`` skips the
    first evaluation. Returns ``(u_new, err_est, data)`` where ``err_est``
    is ``dt * sum((b - bhat) * k)`` (zeros without an embedded pair) and
    ``data`` carries the stage derivatives ``K``, the stage states of the
    last two stages, and ``f_new`` for first-same-as-last tableaus.
    """
    a, b, c = tableau.a, tableau.b, tableau.c
    s = tableau.stages
    K = np.empty((s, u.size))
    K[0] = rhs(u, t) if k1 is None else k1
    g_prev = g = u
    for i in range(1, s):
        g_prev = g
        g = u + dt * (a[i, :i] @ K[:i])
        K[i] = rhs(g, t + c[i] * dt)
    if tableau.fsal:
        u_new = g
    else:
        u_new = u + dt * (b @ K)
    if tableau.bhat is not None:
        err_est = dt * (tableau.btilde @ K)
    else:
        err_est = np.zeros_like(u)
    data = {"K": K, "g_last": (g_prev, g), "f_new": K[-1] if tableau.fsal else None}
    return u_new, err_est, data


class DP5Interp:
    """Free 4th-order continuous extension of the DP5 pair."""

    __slots__ = ("t0", "dt", "u0", "ydiff", "bspl", "rc4", "rc5", "u1")

    def __init__(self, t0, dt, u0, u1, K):
        self.t0, self.dt, self.u0, self.u1 = t0, dt, u0, u1
        self.ydiff = u1 - u0
        self.bspl = dt * K[0] - self.ydiff
        self.rc4 = self.ydiff - dt * K[6] - self.bspl
        self.rc5 = dt * (_DP5_DENSE @ K)

    def __call__(self, tq):
        th = (tq - self.t0) / self.dt
        if th == 0.0:
            return self.u0.copy()
        if th == 1.0:
            return self.u1.copy()
        th1 = 1.0 - th
        return self.u0 + th * (self.ydiff + th1 * (self.bspl + th * (self.rc4 + th1 * self.rc5)))


class ERKIntegrator(OneStepIntegrator):
    """Generic driver-facing wrapper around :func:`erk_step`."""

    tableau: ButcherTableau = RK4

    def __init__(self, prob, opts, stats, tableau: Optional[ButcherTableau] = None):
        if tableau is not None:
            self.tableau = tableau
        tab = self.tableau
        self.order = tab.order
        self.adaptive = tab.bhat is not None
        self.error_order = min(tab.order, tab.embedded_order or tab.order) + 1
        super().__init__(prob, opts, stats)

    def attempt(self, t, u, dt):
        tab = self.tableau
        u_new, err_est, data = erk_step(tab, self.rhs, u, t, dt, k1=self.fcur)
        if data["f_new"] is None:
            data["f_new"] = self.rhs(u_new, t + dt)
        if self.adaptive and self.opts.adaptive:
            err = error_norm(u, u_new, err_est, self.opts.abstol, self.opts.reltol)
        else:
            err = 0.0 if np.all(np.isfinite(u_new)) else np.inf
        if tab is DP5:
            interp = DP5Interp(t, dt, u, u_new, data["K"])
        else:
            interp = HermiteInterp(t, dt, u, u_new, self.fcur, data["f_new"])
        return Step(t, dt, u, u_new, err, interp, True, data)


class Euler(ERKIntegrator):
    tableau = EULER


class RK4Integrator(ERKIntegrator):
    tableau = RK4


class Tsit5(ERKIntegrator):
    tableau = TSIT5


class DP5Integrator(ERKIntegrator):
    tableau = DP5


def verlet_step(f_accel, x, v, p, t, dt, a=None):
    """One kick-drift-kick velocity Verlet step.

    ``f_accel(dv, v, x, p, t)`` writes the acceleration. Pass ``a``, the
    acceleration at ``(x, v, t)``, to avoid re-evaluating it; the returned
    ``a_new`` can be fed to the next call. Returns ``(x_new, v_new, a_new)``.
    """
    if a is None:
        a = np.zeros_like(v)
        f_accel(a, v, x, p, t)
    v_half = v + 0.5 * dt * a
    x_new = x + dt * v_half
    a_new = np.zeros_like(v)
    f_accel(a_new, v_half, x_new, p, t + dt)
    v_new = v_half + 0.5 * dt * a_new
    return x_new, v_new, a_new


class Verlet(Integrator):
    """Fixed-step velocity Verlet on the combined ``[x, v]`` state.

    Velocity-dependent accelerations are evaluated at the half-step
    velocity, which keeps one evaluation per step but loses symplecticity.
    """

    order = 2
    adaptive = False

    def __init__(self, prob, opts, stats):
        self.prob = prob
        self.opts = opts
        self.stats = stats
        self.m = prob.x0.size
        self._p = np.array(prob.p, dtype=float, copy=True)
        self.acur = None

    @property
    def p(self):
        return self._p

    def _accel(self, dv, v, x, p, t):
        self.stats.nf += 1
        self.prob.f_accel(dv, v, x, p, t)

    def reset(self, t, u):
        m = self.m
        self.acur = np.zeros(m)
        self._accel(self.acur, u[m:], u[:m], self._p, t)

    def attempt(self, t, u, dt):
        m = self.m
        x_new, v_new, a_new = verlet_step(self._accel, u[:m], u[m:], self._p, t, dt, a=self.acur)
        u_new = np.concatenate([x_new, v_new])
        du0 = np.concatenate([u[m:], self.acur])
        du1 = np.concatenate([v_new, a_new])
        err = 0.0 if np.all(np.isfinite(u_new)) else np.inf
        return Step(t, dt, u, u_new, err, HermiteInterp(t, dt, u, u_new, du0, du1), True,
                    {"a_new": a_new})

    def accept(self, step):
        self.acur = step.data["a_new"]
