"""Variable-order, variable-step BDF (orders 1 to 3).

Fixed-leading-coefficient formulation: history is kept as backward
differences ``D[j]`` of the solution on an equally spaced grid with the
current step ``h``. When ``h`` changes the differences are re-interpolated
onto the new grid, so the formula coefficients never change. The corrector
is solved with modified Newton on ``I - (h/alpha_k) J``. This is the
arrangement used by Shampine's NDF codes with the NDF correction switched
off.

Every (re)start runs at order 1. The order may move by one after ``k+1``
consecutive accepted steps at the same ``h`` and order ``k``.
"""

from __future__ import annotations

import math

import numpy as np

from .control import scaled_rms
from .errors import NonFiniteJacobian, SingularMatrix
from .integrator import Integrator, Step
from .linalg import JacobianWorkspace, fd_jacobian, lu_factor, lu_solve
from .rosenbrock import warn_if_large

MAX_ORDER = 3
NEWTON_MAXITER = 4
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
JAC_MAX_AGE = 20
JAC_RATE_LIMIT = 0.25

_GAMMA = np.hstack((0.0, np.cumsum(1.0 / np.arange(1, MAX_ORDER + 2))))
_ALPHA = _GAMMA.copy()
_ERROR_CONST = 1.0 / np.arange(1, MAX_ORDER + 3)


def _interp_matrix(order: int, factor: float) -> np.ndarray:
    i = np.arange(1, order + 1)[:, None]
    j = np.arange(1, order + 1)
    m = np.zeros((order + 1, order + 1))
    m[1:, 1:] = (i - 1 - factor * j) / i
    m[0] = 1.0
    return np.cumprod(m, axis=0)


def rescale_differences(D: np.ndarray, order: int, factor: float) -> None:
    """Re-express backward differences for step ``h * factor`` (in place)."""
    R = _interp_matrix(order, factor)
    U = _interp_matrix(order, 1.0)
    D[: order + 1] = (R @ U).T @ D[: order + 1]


class BDFState:
    """History and counters for one BDF integration.

    ``D`` holds backward differences (row 0 is the current solution);
    ``order`` is the current order; ``n_equal`` counts accepted steps since
    the last change of step size or order.
    """

    def __init__(self, t, u, h, f0, max_order=MAX_ORDER):
        n = u.size
        self.t = t
        self.h = h
        self.order = 1
        self.n_equal = 0
        self.max_order = max_order
        self.D = np.zeros((MAX_ORDER + 3, n))
        self.D[0] = u
        self.D[1] = f0 * h

    def copy(self) -> "BDFState":
        other = object.__new__(BDFState)
        other.__dict__.update(self.__dict__)
        other.D = self.D.copy()
        return other

    def set_step(self, h: float) -> None:
        if h != self.h:
            rescale_differences(self.D, self.order, h / self.h)
            self.h = h
            self.n_equal = 0


class BDFInterp:
    """Backward-difference interpolating polynomial through recent points."""

    __slots__ = ("t_new", "h", "order", "D", "t_old", "u_old", "u_new")

    def __init__(self, t_old, u_old, t_new, u_new, h, order, D):
        self.t_old, self.u_old = t_old, u_old
        self.t_new, self.u_new = t_new, u_new
        self.h, self.order = h, order
        self.D = D[: order + 1].copy()

    def __call__(self, tq):
        if tq == self.t_new:
            return self.u_new.copy()
        if tq == self.t_old:
            return self.u_old.copy()
        k = np.arange(self.order)
        shift = self.t_new - self.h * k
        p = np.cumprod((tq - shift) / (self.h * (1 + k)))
        return self.D[0] + p @ self.D[1:]


def bdf_corrector(rhs, t_new, y_predict, c, psi, lu, scale, tol, stats=None):
    """Modified Newton on the BDF corrector equation.

    Solves ``d - c*f(t_new, y_predict + d) + psi = 0`` for the correction
    ``d``. Returns ``(converged, iterations, y, d, rate)``; a final pass
    whose correction only confirms convergence is not counted.
    """
    d = np.zeros_like(y_predict)
    y = y_predict.copy()
    dy_norm_old = None
    rate = None
    converged = False
    k = 0
    for k in range(NEWTON_MAXITER):
        f = rhs(y, t_new)
        if not np.all(np.isfinite(f)):
            break
        dy = lu_solve(lu, c * f - psi - d)
        if stats is not None:
            stats.nsolve += 1
        dy_norm = scaled_rms(dy, scale)
        rate = None if dy_norm_old is None else dy_norm / dy_norm_old
        if rate is not None and (rate >= 1 or rate ** (NEWTON_MAXITER - k) / (1 - rate) * dy_norm > tol):
            break
        y += dy
        d += dy
        if dy_norm == 0 or (rate is not None and rate / (1 - rate) * dy_norm < tol):
            converged = True
            break
        dy_norm_old = dy_norm
    iters = max(k, 1) if converged else k + 1
    return converged, iters, y, d, rate


def bdf_step(state: BDFState, rhs, J, dt, abstol, reltol, newton_tol, stats=None, lu_cache=None):
    """Attempt one BDF step of the current order from ``state``.

    ``state`` is not modified. Returns ``(u_new, err_norm, info)`` where
    ``info`` carries the correction ``d``, the Newton iteration count and
    rate, and the rescaled history to commit on acceptance. ``u_new`` is
    ``None`` when Newton fails.
    """
    st = state.copy()
    st.set_step(dt)
    order = st.order
    D = st.D
    t_new = st.t + dt
    y_predict = D[: order + 1].sum(axis=0)
    scale = abstol + reltol * np.abs(y_predict)
    psi = (D[1: order + 1].T @ _GAMMA[1: order + 1]) / _ALPHA[order]
    c = dt / _ALPHA[order]
    if lu_cache is not None and lu_cache.get("key") == (c, id(J)):
        lu = lu_cache["lu"]
    else:
        lu = lu_factor(np.eye(J.shape[0]) - c * J)
        if stats is not None:
            stats.nfactor += 1
        if lu_cache is not None:
            lu_cache.update(key=(c, id(J)), lu=lu)
    converged, iters, y_new, d, rate = bdf_corrector(
        rhs, t_new, y_predict, c, psi, lu, scale, newton_tol, stats)
    info = {"state": st, "iters": iters, "rate": rate, "d": d, "order": order}
    if not converged:
        return None, math.inf, info
    scale = abstol + reltol * np.maximum(np.abs(y_new), np.abs(D[0]))
    err = scaled_rms(_ERROR_CONST[order] * d, scale)
    info["scale"] = scale
    return y_new, err, info


class BDF(Integrator):
    """Adaptive variable-order BDF integrator (orders 1..``max_order``).

    In fixed-step mode (``adaptive=False``) the order still starts at 1 and
    climbs by one after each ``k+1`` steps until ``max_order``.
    """

    adaptive = True

    def __init__(self, prob, opts, stats, max_order: int = MAX_ORDER):
        super().__init__(prob, opts, stats)
        if not 1 <= max_order <= MAX_ORDER:
            raise ValueError(f"max_order must be in 1..{MAX_ORDER}")
        self.max_order = max_order
        self.order = 1
        self.workspace = JacobianWorkspace(prob.u0.size)
        warn_if_large(prob.u0.size, "bdf")
        rtol = opts.reltol
        self.newton_tol = max(10 * np.finfo(float).eps / max(rtol, 1e-300), min(0.03, rtol ** 0.5))
        self.state = None
        self.J = None
        self.jac_current = False
        self.jac_age = 0
        self.lu_cache = {}
        self.fcur = None
        self.stats.metadata.setdefault("order_trace", [])
        self.stats.metadata.setdefault("newton_iters", [])
        self._next = None

    def reset(self, t, u):
        self.fcur = self.rhs(u, t)
        self.state = None
        self.t_reset, self.u_reset = t, u
        self.J = None
        self.lu_cache = {}
        self.order = 1

    def _jacobian(self, t, u):
        self.J = fd_jacobian(self.rhs, u, t, self.workspace, f0=self.rhs(u, t), stats=self.stats)
        self.jac_current = True
        self.jac_age = 0
        self.lu_cache = {}

    def attempt(self, t, u, dt):
        if self.state is None:
            self.state = BDFState(t, u, dt, self.fcur, self.max_order)
        st = self.state
        try:
            if self.J is None or self.jac_age >= JAC_MAX_AGE:
                self._jacobian(t, u)
            while True:
                u_new, err, info = bdf_step(st, self.rhs, self.J, dt, self.opts.abstol,
                                            self.opts.reltol, self.newton_tol, self.stats,
                                            self.lu_cache)
                if u_new is not None or self.jac_current:
                    break
                self._jacobian(t, u)
        except (SingularMatrix, NonFiniteJacobian):
            return Step(t, dt, u, u, math.inf, None, False, None)
        if u_new is None:
            return Step(t, dt, u, u, math.inf, None, False, info)
        if not self.opts.adaptive:
            err = 0.0
        return Step(t, dt, u, u_new, err, None, True, info)

    def accept(self, step):
        info = step.data
        st = info["state"]
        order = st.order
        d = info["d"]
        D = st.D
        D[order + 2] = d - D[order + 1]
        D[order + 1] = d
        for i in reversed(range(order + 1)):
            D[i] += D[i + 1]
        D[0] = step.u_new
        st.t = step.t_new
        st.n_equal += 1
        step.interp = BDFInterp(step.t, step.u, step.t_new, step.u_new, st.h, order, D)
        self.stats.metadata["order_trace"].append(order)
        self.stats.metadata["newton_iters"].append(info["iters"])
        self.jac_current = False
        self.jac_age += 1
        rate = info["rate"]
        if rate is not None and rate > JAC_RATE_LIMIT:
            self.J = None
        self.state = st
        self._choose_next(step, st)

    def _choose_next(self, step, st):
        order = st.order
        self._next = None
        if st.n_equal < order + 1:
            return
        if not self.opts.adaptive:
            if order < st.max_order:
                st.order = order + 1
                st.n_equal = 0
            return
        scale = step.data["scale"]
        D = st.D
        err_cur = scaled_rms(_ERROR_CONST[order] * D[order + 1], scale)
        err_m = scaled_rms(_ERROR_CONST[order - 1] * D[order], scale) if order > 1 else math.inf
        err_p = (scaled_rms(_ERROR_CONST[order + 1] * D[order + 2], scale)
                 if order < st.max_order else math.inf)
        norms = np.array([err_m, err_cur, err_p])
        with np.errstate(divide="ignore"):
            factors = norms ** (-1.0 / np.arange(order, order + 3))
        delta = int(np.argmax(factors)) - 1
        iters = step.data["iters"]
        safety = 0.9 * (2 * NEWTON_MAXITER + 1) / (2 * NEWTON_MAXITER + iters)
        st.order = order + delta
        st.n_equal = 0
        self._next = min(MAX_FACTOR, safety * float(np.max(factors)))

    def reject(self, step):
        if not step.ok and self.state is not None:
            self.state.order = max(1, self.state.order - 1)

    def propose_dt(self, step, accepted):
        dt = step.dt
        if not self.opts.adaptive:
            return dt
        if not step.ok:
            return 0.5 * dt
        if accepted:
            if self._next is None:
                return dt
            return dt * min(MAX_FACTOR, max(MIN_FACTOR, self._next))
        iters = step.data["iters"]
        safety = 0.9 * (2 * NEWTON_MAXITER + 1) / (2 * NEWTON_MAXITER + iters)
        order = self.state.order
        factor = safety * step.err ** (-1.0 / (order + 1))
        return dt * min(1.0, max(MIN_FACTOR, factor))

    @property
    def current_order(self) -> int:
        return 1 if self.state is None else self.state.order
