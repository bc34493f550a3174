"""Dense linear algebra for the implicit methods.

LU with partial pivoting, finite-difference Jacobians, a (modified)
Newton iteration and a power-iteration spectral radius estimate. Systems
are small and dense here; sparse and Krylov variants are deliberately
absent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteJacobian, SingularMatrix

SQRT_EPS = math.sqrt(np.finfo(float).eps)


@dataclass
class LUFactor:
    lu: np.ndarray
    piv: np.ndarray

    @property
    def n(self) -> int:
        return self.lu.shape[0]


def lu_factor(A) -> LUFactor:
    """Doolittle LU with partial (row) pivoting.

    Returns the packed factors; ``piv[k]`` is the row swapped into position
    ``k`` at elimination step ``k``. Raises :class:`SingularMatrix` on a zero
    or non-finite pivot.
    """
    lu = np.array(A, dtype=float, copy=True)
    n = lu.shape[0]
    if lu.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {lu.shape}")
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        pivot = lu[p, k]
        if pivot == 0.0 or not math.isfinite(pivot):
            raise SingularMatrix(f"zero pivot in column {k}")
        piv[k] = p
        if p != k:
            lu[[k, p]] = lu[[p, k]]
        if k + 1 < n:
            lu[k + 1:, k] /= pivot
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return LUFactor(lu, piv)


def lu_solve(fac: LUFactor, b) -> np.ndarray:
    x = np.array(b, dtype=float, copy=True)
    lu, piv = fac.lu, fac.piv
    n = lu.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            x[k], x[p] = x[p], x[k]
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


@dataclass
class JacobianWorkspace:
    """Storage and perturbation policy for finite-difference Jacobians.

    The perturbation for component ``j`` is
    ``sqrt(eps) * max(|u_j|, threshold)``.
    """

    n: int
    threshold: float = 1.0
    matrix: np.ndarray = field(init=False)
    on_eval: Optional[Callable[[], None]] = None

    def __post_init__(self):
        self.matrix = np.zeros((self.n, self.n))


def fd_jacobian(rhs, u, t, workspace: Optional[JacobianWorkspace] = None, f0=None,
                stats=None) -> np.ndarray:
    """Forward-difference Jacobian of ``rhs(u, t)``.

    Column ``j`` is ``(rhs(u + h_j e_j) - rhs(u)) / h_j``. With ``f0`` given
    this costs exactly ``n`` evaluations. Raises :class:`NonFiniteJacobian`
    if any entry is not finite.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    ws = workspace if workspace is not None else JacobianWorkspace(n)
    if f0 is None:
        f0 = rhs(u, t)
    J = ws.matrix
    up = u.copy()
    for j in range(n):
        h = SQRT_EPS * max(abs(u[j]), ws.threshold)
        up[j] = u[j] + h
        h = up[j] - u[j]
        J[:, j] = (rhs(up, t) - f0) / h
        up[j] = u[j]
    if stats is not None:
        stats.njac += 1
    if ws.on_eval is not None:
        ws.on_eval()
    if not np.all(np.isfinite(J)):
        raise NonFiniteJacobian("finite-difference Jacobian has non-finite entries")
    return J.copy()


def _rms(x) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


def newton_solve(residual, jac, guess, tol, max_iters=10, norm=None, stats=None):
    """Solve ``residual(x) = 0`` by (modified) Newton iteration.

    ``jac`` may be a matrix or an :class:`LUFactor` (factorized once and
    held fixed: modified Newton) or a callable ``jac(x)`` (re-evaluated and
    re-factorized every iteration: full Newton). Convergence is declared
    when the correction that would follow the current iterate is below
    ``tol``, or when the observed contraction rate predicts it. Divergence
    or an exhausted budget returns ``converged=False``; nothing is raised.

    Returns ``(root, converged, iters)`` where ``iters`` counts the applied
    corrections before convergence was recognized.
    """
    norm = _rms if norm is None else norm
    x = np.array(guess, dtype=float, copy=True)
    if callable(jac):
        def factor(x_):
            if stats is not None:
                stats.nfactor += 1
            return lu_factor(np.atleast_2d(jac(x_)))
    else:
        fixed = jac if isinstance(jac, LUFactor) else lu_factor(np.atleast_2d(jac))
        if stats is not None and not isinstance(jac, LUFactor):
            stats.nfactor += 1

        def factor(x_):
            return fixed

    def correction(x_):
        r = np.atleast_1d(residual(x_))
        if not np.all(np.isfinite(r)):
            return None
        if stats is not None:
            stats.nsolve += 1
        return -lu_solve(factor(x_), r)

    dx = correction(x)
    if dx is None:
        return x, False, 0
    for it in range(1, max_iters + 1):
        x = x + dx
        dx_norm = norm(dx)
        dx = correction(x)
        if dx is None:
            return x, False, it
        nxt = norm(dx)
        if nxt <= tol:
            return x + dx, True, it
        if dx_norm > 0:
            rate = nxt / dx_norm
            if rate >= 1.0:
                return x, False, it
            if rate / (1.0 - rate) * nxt <= tol:
                return x + dx, True, it
    return x, False, max_iters


def spectral_radius(J, iters: int = 12, seed: int = 0) -> float:
    """Power-iteration estimate of the largest eigenvalue magnitude of ``J``."""
    J = np.asarray(J, dtype=float)
    n = J.shape[0]
    if n == 1:
        return abs(float(J[0, 0]))
    if n <= 8:
        return float(np.max(np.abs(np.linalg.eigvals(J))))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(iters):
        w = J @ v
        nw = np.linalg.norm(w)
        if nw == 0.0 or not math.isfinite(nw):
            return 0.0 if nw == 0.0 else math.inf
        rho = nw
        v = w / nw
    return float(rho)
