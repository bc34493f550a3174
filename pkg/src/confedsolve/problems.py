"""Built-in problem catalog used by the tests, benchmarks and CLI.

The Oregonator and Robertson parameterizations are the standard ones from
Hairer & Wanner, Solving ODEs II (problems OREGO and ROBER).
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .core import ODEProblem, SecondOrderODEProblem
from .events import ContinuousCallback, Direction

GRAVITY = 9.8


def _lorenz(du, u, p, t):
    du[0] = p[0] * (u[1] - u[0])
    du[1] = u[0] * (p[1] - u[2]) - u[1]
    du[2] = u[0] * u[1] - p[2] * u[2]


def lorenz() -> ODEProblem:
    return ODEProblem(_lorenz, [1.0, 0.0, 0.0], (0.0, 100.0), [10.0, 28.0, 8 / 3])


def _orego(du, u, p, t):
    s, q, w = p
    y1, y2, y3 = u
    du[0] = s * (y2 + y1 * (1.0 - q * y1 - y2))
    du[1] = (y3 - (1.0 + y1) * y2) / s
    du[2] = w * (y1 - y3)


def orego() -> ODEProblem:
    """Oregonator, 3 stiff equations, ``u0 = [1, 2, 3]`` on ``[0, 360]``."""
    return ODEProblem(_orego, [1.0, 2.0, 3.0], (0.0, 360.0), [77.27, 8.375e-6, 0.161])


def _robertson(du, u, p, t):
    k1, k2, k3 = p
    y1, y2, y3 = u
    du[0] = -k1 * y1 + k3 * y2 * y3
    du[1] = k1 * y1 - k3 * y2 * y3 - k2 * y2 * y2
    du[2] = k2 * y2 * y2


def robertson(tf: float = 1e5) -> ODEProblem:
    """Robertson chemical kinetics, ``u0 = [1, 0, 0]``."""
    return ODEProblem(_robertson, [1.0, 0.0, 0.0], (0.0, tf), [0.04, 3e7, 1e4])


def _ball(du, u, p, t):
    du[0] = u[1]
    du[1] = -p[0]


def _ball_analytic(u0, p, t):
    g = p[0]
    x0, v0 = u0
    vi = math.sqrt(v0 * v0 + 2 * g * x0)
    t1 = (v0 + vi) / g
    if t <= t1:
        return np.array([x0 + v0 * t - 0.5 * g * t * t, v0 - g * t])
    period = 2 * vi / g
    tau = math.fmod(t - t1, period)
    return np.array([vi * tau - 0.5 * g * tau * tau, vi - g * tau])


def _ball_floor(u, p, t):
    return u[0]


def _ball_bounce(u, p, t):
    u[1] = -u[1]


def bouncing_ball():
    """Ball dropped from ``x = 1`` at rest under gravity 9.8, elastic floor at 0.

    Returns ``(problem, callback)``. The callback fires on downward
    crossings of ``x = 0`` and flips the sign of the velocity.
    """
    prob = ODEProblem(_ball, [1.0, 0.0], (0.0, 5.0), [GRAVITY], _ball_analytic)
    cb = ContinuousCallback(_ball_floor, _ball_bounce, Direction.DOWN, name="floor")
    return prob, cb


def _linear(du, u, p, t):
    du[:] = p[0] * u


def _linear_analytic(u0, p, t):
    return u0 * math.exp(p[0] * t)


def linear_decay(lam: float = -1.0, u0: float = 1.0, tspan=(0.0, 1.0)) -> ODEProblem:
    """``u' = lam * u`` with analytic solution ``u0 * exp(lam * t)``."""
    return ODEProblem(_linear, [u0], tspan, [lam], _linear_analytic)


def _harmonic_accel(dv, v, x, p, t):
    dv[:] = -(p[0] ** 2) * x


def _harmonic_analytic(u0, p, t):
    w = p[0]
    x0, v0 = u0
    c, s = math.cos(w * t), math.sin(w * t)
    return np.array([x0 * c + v0 / w * s, -x0 * w * s + v0 * c])


def harmonic(omega: float = 1.0, tspan=(0.0, 10.0)) -> SecondOrderODEProblem:
    """``x'' = -omega^2 x`` from ``x = 1, v = 0``."""
    return SecondOrderODEProblem(_harmonic_accel, [0.0], [1.0], tspan, [omega], _harmonic_analytic)


def _vdp(du, u, p, t):
    mu = p[0]
    du[0] = u[1]
    du[1] = mu * (1.0 - u[0] * u[0]) * u[1] - u[0]


def van_der_pol(mu: float = 1e3, tspan=(0.0, 10.0)) -> ODEProblem:
    """Van der Pol oscillator ``x'' = mu (1 - x^2) x' - x`` from ``[2, 0]``.

    For large ``mu`` the solution creeps along a slow manifold while the
    Jacobian has an eigenvalue near ``-mu (x^2 - 1)``.
    """
    return ODEProblem(_vdp, [2.0, 0.0], tspan, [mu])


class CatalogEntry(NamedTuple):
    prob: object
    callbacks: tuple


def _entry(make: Callable) -> Callable[[], CatalogEntry]:
    def build():
        return CatalogEntry(make(), ())
    return build


def _ball_entry() -> CatalogEntry:
    prob, cb = bouncing_ball()
    return CatalogEntry(prob, (cb,))


CATALOG: dict[str, Callable[[], CatalogEntry]] = {
    "lorenz": _entry(lorenz),
    "orego": _entry(orego),
    "robertson": _entry(robertson),
    "bouncing_ball": _ball_entry,
    "linear_decay": _entry(linear_decay),
    "harmonic": _entry(harmonic),
    "van_der_pol": _entry(van_der_pol),
}


def catalog_entry(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(CATALOG)}") from None
