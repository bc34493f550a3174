"""Integrator contract shared by every registered method.

A registered factory returns an :class:`Integrator`. The driver in
:mod:`confedsolve.driver` owns the time loop: it calls :meth:`attempt`,
decides acceptance from the returned error, and then calls
:meth:`accept` or :meth:`reject`. Step size proposals come back through
:meth:`propose_dt`. After an event the driver calls :meth:`reset`, which
must discard any multistep history.

Third-party methods subclass :class:`Integrator` (or
:class:`OneStepIntegrator`) and register a factory; nothing else in the
package has to change.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from .control import PIController, initial_dt


class RHS:
    """Allocating wrapper around an in-place ``f(du, u, p, t)``.

    Counts evaluations into ``stats.nf``. ``p`` is a private writable copy,
    so event effects may modify parameters without touching the problem.
    """

    def __init__(self, f: Callable, p, stats):
        self.f = f
        self.p = np.array(p, dtype=float, copy=True)
        self.stats = stats

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        self.stats.nf += 1
        du = np.zeros_like(u)
        self.f(du, u, self.p, t)
        return du


@dataclass
class Step:
    """One attempted step from ``t`` to ``t + dt``."""

    t: float
    dt: float
    u: np.ndarray
    u_new: np.ndarray
    err: float = 0.0
    interp: Optional[Callable[[float], np.ndarray]] = None
    ok: bool = True
    data: Any = None

    @property
    def t_new(self) -> float:
        return self.t + self.dt


class HermiteInterp:
    """Cubic Hermite interpolant from endpoint values and slopes."""

    __slots__ = ("t0", "dt", "u0", "u1", "f0", "f1")

    def __init__(self, t0, dt, u0, u1, f0, f1):
        self.t0, self.dt = t0, dt
        self.u0, self.u1, self.f0, self.f1 = u0, u1, f0, f1

    def __call__(self, tq):
        th = (tq - self.t0) / self.dt
        if th == 0.0:
            return self.u0.copy()
        if th == 1.0:
            return self.u1.copy()
        h = self.dt
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        return h00 * self.u0 + h10 * h * self.f0 + h01 * self.u1 + h11 * h * self.f1


class Integrator:
    """Base class for a stepping method.

    Subclasses set ``order`` (used by the starting-step heuristic) and
    ``adaptive`` (whether :meth:`attempt` returns a meaningful ``err``).
    """

    order: int = 1
    adaptive: bool = False

    def __init__(self, prob, opts, stats):
        self.prob = prob
        self.opts = opts
        self.stats = stats
        self.rhs = RHS(prob.f, prob.p, stats)

    @property
    def p(self) -> np.ndarray:
        return self.rhs.p

    def reset(self, t: float, u: np.ndarray) -> None:
        """(Re)start at ``(t, u)``, discarding history."""

    def initial_dt(self, t: float, u: np.ndarray) -> float:
        tf = self.prob.tspan[1]
        return initial_dt(self.rhs, t, u, tf, self.opts.abstol, self.opts.reltol,
                          self.order, f0=getattr(self, "fcur", None))

    def attempt(self, t: float, u: np.ndarray, dt: float) -> Step:
        raise NotImplementedError

    def accept(self, step: Step) -> None:
        pass

    def reject(self, step: Step) -> None:
        pass

    def propose_dt(self, step: Step, accepted: bool) -> float:
        return step.dt


class OneStepIntegrator(Integrator):
    """One-step method that caches ``f`` at the current point.

    ``fcur`` always holds ``f(t, u)`` for the last accepted state, which
    lets first-same-as-last methods and Hermite dense output reuse it.
    Adaptive subclasses get a :class:`PIController` tuned to
    ``error_order``.
    """

    error_order: int = 1

    def __init__(self, prob, opts, stats):
        super().__init__(prob, opts, stats)
        self.controller = PIController(self.error_order)
        self.fcur = None

    def reset(self, t, u):
        self.fcur = self.rhs(u, t)
        self.controller.reset()

    def accept(self, step):
        fnew = step.data.get("f_new") if isinstance(step.data, dict) else None
        self.fcur = fnew if fnew is not None else self.rhs(step.u_new, step.t_new)

    def propose_dt(self, step, accepted):
        if not self.adaptive or not self.opts.adaptive:
            return step.dt
        return self.controller.propose(step.dt, step.err, accepted)
