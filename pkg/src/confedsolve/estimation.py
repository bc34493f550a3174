"""Parameter-estimation loss built on top of ``solve``."""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from .core import SolverOptions, remake, solve
from .errors import InvalidOptions, ShapeMismatch


def parameter_l2loss(prob, alg: Optional[str], times, data,
                     opts: Optional[SolverOptions] = None, **solve_kwargs) -> Callable:
    """Return ``loss(p)``, the summed squared misfit of a solve against ``data``.

    Each call remakes ``prob`` with the candidate parameters, solves it
    with ``alg`` saving only at ``times``, and sums ``(data - sol)**2``
    over all samples and components. Any failure (bad shape, exception,
    non-success return code, non-finite output) gives ``+inf`` so the
    function can be handed to a black-box optimizer.

    Examples
    --------
    >>> from confedsolve.problems import linear_decay
    >>> prob = linear_decay(-1.0)
    >>> ts = [0.25, 0.5, 1.0]
    >>> data = [[prob.analytic(prob.u0, prob.p, t)[0]] for t in ts]
    >>> loss = parameter_l2loss(prob, "tsit5", ts, data, reltol=1e-10, abstol=1e-12)
    >>> loss([-1.0]) < 1e-10
    True
    """
    times = np.asarray(times, dtype=float).ravel()
    data = np.asarray(data, dtype=float)
    n = prob.n if hasattr(prob, "n") else np.size(prob.u0)
    if data.ndim == 1 and n == 1:
        data = data[:, None]
    if data.shape != (times.size, n):
        raise ShapeMismatch(f"data has shape {data.shape}, expected ({times.size}, {n})")
    t0, tf = prob.tspan
    if times.size and (times.min() < t0 or times.max() > tf):
        raise InvalidOptions("sample times must lie within tspan")
    if np.any(np.diff(times) < 0):
        raise InvalidOptions("sample times must be sorted")
    opts = SolverOptions() if opts is None else opts
    opts = replace(opts, saveat=tuple(times), save_everystep=False, dense=False)
    data = data.copy()

    def loss(p) -> float:
        try:
            candidate = remake(prob, p=p)
            sol = solve(candidate, alg, opts, **solve_kwargs)
        except Exception:
            return math.inf
        if not sol.success or sol.u.shape != data.shape:
            return math.inf
        value = float(np.sum((data - sol.u) ** 2))
        return value if math.isfinite(value) else math.inf

    return loss
