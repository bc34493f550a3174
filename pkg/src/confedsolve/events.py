"""Continuous callbacks: sign-change detection, root localization, restart."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class Direction(str, enum.Enum):
    ANY = "any"
    UP = "up_crossing"
    DOWN = "down_crossing"


def _noop(u, p, t):
    pass


@dataclass(frozen=True)
class ContinuousCallback:
    """Event fired when ``condition(u, p, t)`` changes sign inside a step.

    ``affect(u, p, t)`` modifies the post-event state (and parameters) in
    place. ``direction`` restricts which crossings count: ``up_crossing``
    means negative to positive. ``root_tol`` is an absolute time tolerance;
    ``None`` means ``1e-12`` times the problem's time span.

    A condition that is exactly zero at the start of a step never fires,
    which keeps an event from retriggering at its own location.
    """

    condition: Callable
    affect: Callable = _noop
    direction: Direction = Direction.ANY
    root_tol: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))


MAX_ROOT_ITERS = 64


def _crosses(g_a: float, g_b: float, direction: Direction) -> bool:
    if g_a == 0.0 or not (np.isfinite(g_a) and np.isfinite(g_b)):
        return False
    if g_b != 0.0 and (g_a > 0) == (g_b > 0):
        return False
    if direction is Direction.UP:
        return g_a < 0
    if direction is Direction.DOWN:
        return g_a > 0
    return True


def find_root(g, t_a, t_b, g_a, g_b, tol) -> float:
    """Illinois-modified regula falsi on ``[t_a, t_b]``.

    Returns the right end of the final bracket, i.e. a time at which ``g``
    already has the sign of ``g_b`` (or is exactly zero).
    """
    if g_b == 0.0:
        return t_b
    lo, hi, f_lo, f_hi = t_a, t_b, g_a, g_b
    side = 0
    for _ in range(MAX_ROOT_ITERS):
        if hi - lo <= tol:
            break
        c = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        if not lo < c < hi:
            c = 0.5 * (lo + hi)
        f_c = g(c)
        if f_c == 0.0:
            return c
        if (f_c > 0) == (f_hi > 0):
            hi, f_hi = c, f_c
            if side == 1:
                f_lo *= 0.5
            side = 1
        else:
            lo, f_lo = c, f_c
            if side == -1:
                f_hi *= 0.5
            side = -1
    return hi


def detect_event(callback: ContinuousCallback, t_a: float, t_b: float, dense_eval,
                 p, default_tol: float = 1e-12, g_a=None, g_b=None) -> Optional[float]:
    """Locate a sign change of ``callback.condition`` over one step.

    ``dense_eval(t)`` is the step's continuous extension. Returns the event
    time or ``None`` when the condition does not cross (in the requested
    direction) between the endpoints.
    """
    cond = callback.condition
    if g_a is None:
        g_a = float(cond(dense_eval(t_a), p, t_a))
    if g_b is None:
        g_b = float(cond(dense_eval(t_b), p, t_b))
    if not _crosses(g_a, g_b, callback.direction):
        return None
    tol = callback.root_tol if callback.root_tol is not None else default_tol
    tol = max(tol, 4 * np.finfo(float).eps * max(abs(t_a), abs(t_b)))
    return find_root(lambda s: float(cond(dense_eval(s), p, s)), t_a, t_b, g_a, g_b, tol)


def earliest_event(callbacks, t_a, t_b, dense_eval, p, default_tol, g_start, g_end):
    """Index and time of the first callback to fire in ``[t_a, t_b]``, or ``None``."""
    best = None
    for i, cb in enumerate(callbacks):
        ts = detect_event(cb, t_a, t_b, dense_eval, p, default_tol, g_start[i], g_end[i])
        if ts is not None and (best is None or ts < best[1]):
            best = (i, ts)
    return best


def apply_event(run, callback: ContinuousCallback, t_event: float, dense_eval) -> None:
    """Truncate the current step at ``t_event``, apply the effect, restart.

    ``run`` is the driver's in-flight state. The pre- and post-effect
    states are both recorded at ``t_event``; the integrator is reset so
    multistep methods start again from order 1 with a fresh step size.
    """
    u_pre = np.asarray(dense_eval(t_event), dtype=float)
    run.record_step_end(t_event, u_pre, dense_eval, event=True)
    u_post = u_pre.copy()
    callback.affect(u_post, run.integrator.p, t_event)
    run.stats.nevents += 1
    run.record_event_post(t_event, u_post)
    run.restart(t_event, u_post)
