"""Error metrics, convergence studies and work-precision sweeps."""

from __future__ import annotations

import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ReturnCode, Solution, SolverOptions, default_registry, solve
from .errors import ConfedError, DomainMismatch, InvalidOptions, NonFiniteError

REFERENCE_TOL = 1e-14
DEFAULT_SAMPLES = 100
THREADS_ENV = "CONFED_SOLVE_THREADS"


@dataclass(frozen=True)
class TestSolution:
    """Ground truth for error measurement: an analytic map or a reference run.

    ``evaluate(t)`` returns the state at ``t`` and ``domain`` is the time
    interval on which it is valid.
    """

    __test__ = False  # keep pytest from collecting this class

    evaluate: Callable[[float], np.ndarray]
    domain: tuple[float, float]
    source: str = "analytic"

    def __call__(self, t):
        if np.ndim(t) == 0:
            return np.asarray(self.evaluate(float(t)), dtype=float)
        return np.array([self.evaluate(float(s)) for s in t], dtype=float)

    @classmethod
    def from_analytic(cls, prob) -> "TestSolution":
        if prob.analytic is None:
            raise InvalidOptions("problem has no analytic solution")
        u0, p = prob.u0, prob.p
        return cls(lambda t: prob.analytic(u0, p, t), tuple(prob.tspan), "analytic")

    @classmethod
    def from_solution(cls, sol: Solution) -> "TestSolution":
        return cls(sol, (float(sol.t[0]), float(sol.t[-1])), sol.algorithm_name)


def _is_stiff_profile(prob, callbacks) -> bool:
    """Probe: a problem is stiff when the default composite ever switches."""
    sol = solve(prob, "autoswitch(tsit5,rosenbrock23)", callbacks=callbacks)
    return any(new == "stiff" for _, _, new in sol.stats.metadata.get("switches", []))


def _radau_reference(prob, tol):
    from scipy.integrate import solve_ivp

    first = prob.to_first_order() if hasattr(prob, "to_first_order") else prob
    p = np.array(first.p, dtype=float, copy=True)

    def rhs(t, u):
        du = np.empty_like(u)
        first.f(du, u, p, t)
        return du

    # SciPy's floor on rtol; applied here so the clamp is explicit
    rtol = max(tol, 100 * np.finfo(float).eps)
    res = solve_ivp(rhs, first.tspan, first.u0, method="Radau", rtol=rtol, atol=tol,
                    dense_output=True)
    if not res.success:
        raise NonFiniteError(f"reference solve failed: {res.message}")
    return TestSolution(res.sol, tuple(first.tspan), "radau")


def reference_solution(prob, stiff: Optional[bool] = None, callbacks=(),
                       tol: float = REFERENCE_TOL) -> TestSolution:
    """Tight-tolerance reference for problems without a closed form.

    Nonstiff problems use ``dp5`` at ``tol``. Stiff problems use SciPy's
    Radau IIA, since a second-order Rosenbrock method at 1e-14 needs millions
    of steps. ``stiff=None`` probes with the autoswitch composite. Problems
    with callbacks always use ``dp5`` so events are honoured.
    """
    callbacks = tuple(callbacks)
    if stiff is None:
        stiff = False if callbacks else _is_stiff_profile(prob, callbacks)
    if stiff and not callbacks:
        return _radau_reference(prob, tol)
    sol = solve(prob, "dp5", abstol=tol, reltol=tol, callbacks=callbacks)
    if not sol.success:
        raise NonFiniteError(f"reference solve failed: {sol.retcode.value}")
    return TestSolution.from_solution(sol)


def as_truth(truth) -> TestSolution:
    if isinstance(truth, TestSolution):
        return truth
    if isinstance(truth, Solution):
        return TestSolution.from_solution(truth)
    if callable(truth):
        return TestSolution(truth, (-math.inf, math.inf), "callable")
    raise TypeError(f"cannot use {type(truth).__name__} as ground truth")


def default_times(prob, n: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.linspace(prob.tspan[0], prob.tspan[1], n)


def _within(times, domain, what):
    lo, hi = domain
    if np.min(times) < lo or np.max(times) > hi:
        raise DomainMismatch(f"sample times [{np.min(times)}, {np.max(times)}] "
                             f"outside {what} domain [{lo}, {hi}]")


def avg_timeseries_error(sol, truth, times) -> float:
    """Mean Euclidean distance between ``sol`` and ``truth`` over ``times``.

    ``sol`` may be a :class:`Solution` or a :class:`TestSolution`.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise DomainMismatch("no sample times")
    truth = as_truth(truth)
    dom = sol.domain if isinstance(sol, TestSolution) else (float(sol.t[0]), float(sol.t[-1]))
    _within(times, dom, "solution")
    _within(times, truth.domain, "reference")
    diff = sol(times) - truth(times)
    return float(np.mean(np.linalg.norm(diff.reshape(times.size, -1), axis=1)))


def final_error(prob, sol) -> float:
    tf = prob.tspan[1]
    exact = np.asarray(prob.analytic(prob.u0, prob.p, tf), dtype=float)
    return float(np.linalg.norm(sol.u[-1] - exact))


def convergence_errors(prob, alg: str, dts: Sequence[float], **options) -> np.ndarray:
    """Final-time errors of fixed-step runs against ``prob.analytic``."""
    if prob.analytic is None:
        raise InvalidOptions("convergence study needs an analytic solution")
    errs = []
    for dt in dts:
        sol = solve(prob, alg, dt=float(dt), adaptive=False, **options)
        err = final_error(prob, sol) if sol.success else math.nan
        if not math.isfinite(err):
            raise NonFiniteError(f"{alg} failed at dt={dt} ({sol.retcode.value})")
        errs.append(err)
    return np.array(errs)


def fit_order(dts, errs) -> float:
    """Least-squares slope of log(err) against log(dt); +inf if any error is 0."""
    errs = np.asarray(errs, dtype=float)
    if np.any(errs == 0.0):
        return math.inf
    slope, _ = np.polyfit(np.log(np.asarray(dts, dtype=float)), np.log(errs), 1)
    return float(slope)


def convergence_order(prob, alg: str, dts: Sequence[float], **options) -> float:
    """Observed order of ``alg`` on ``prob`` from at least four step sizes.

    Examples
    --------
    >>> from confedsolve.problems import linear_decay
    >>> round(convergence_order(linear_decay(), "rk4", [0.2, 0.1, 0.05, 0.025]))
    4
    """
    if len(dts) < 4:
        raise InvalidOptions("convergence_order needs at least 4 step sizes")
    return fit_order(dts, convergence_errors(prob, alg, dts, **options))


@dataclass
class WorkPrecisionEntry:
    alg: str
    abstol: float
    reltol: float
    error: float
    runtime: float
    stats: dict = field(default_factory=dict)
    retcode: ReturnCode = ReturnCode.SUCCESS

    @property
    def success(self) -> bool:
        return self.retcode is ReturnCode.SUCCESS


def tolerance_grid(reltols: Sequence[float], abs_ratio: float = 1.0) -> list[tuple[float, float]]:
    """``(abstol, reltol)`` pairs with ``abstol = abs_ratio * reltol``."""
    return [(abs_ratio * r, r) for r in reltols]


def thread_limit() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _run(prob, alg, abstol, reltol, options, registry):
    try:
        return solve(prob, alg, abstol=abstol, reltol=reltol, registry=registry, **options)
    except ConfedError:
        return None


def work_precision(prob, algs: Sequence[str], tol_grid, truth=None, times=None, reps: int = 5,
                   *, registry=None, threads: Optional[int] = None,
                   **options) -> list[WorkPrecisionEntry]:
    """Error and median runtime of every algorithm at every tolerance pair.

    Each cell is solved once untimed (this also serves as the warm-up)
    to get the error, stats and return code; these passes may run
    concurrently on up to ``threads`` workers (default from
    ``CONFED_SOLVE_THREADS``). The ``reps`` timed runs are then made
    one at a time. Failed cells are kept with ``error = nan``.
    Extra keyword arguments are passed on to :func:`solve`.
    """
    registry = default_registry() if registry is None else registry
    for alg in algs:
        registry.resolve(alg)
    if reps < 1:
        raise InvalidOptions("reps must be at least 1")
    cells = [(alg, float(a), float(r)) for alg in algs for a, r in tol_grid]
    times = default_times(prob) if times is None else np.asarray(times, dtype=float)
    truth = reference_solution(prob, callbacks=options.get("callbacks", ())) if truth is None else truth
    truth = as_truth(truth)
    SolverOptions(**options)  # validate once, before any run

    def measure(cell):
        alg, a, r = cell
        sol = _run(prob, alg, a, r, options, registry)
        if sol is None:
            return math.nan, {}, ReturnCode.FAILURE
        err = avg_timeseries_error(sol, truth, times) if sol.success else math.nan
        return err, sol.stats.snapshot(), sol.retcode

    workers = thread_limit() if threads is None else max(1, int(threads))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            measured = list(pool.map(measure, cells))
    else:
        measured = [measure(c) for c in cells]

    entries = []
    for (alg, a, r), (err, snap, code) in zip(cells, measured):
        runtime = math.nan
        if code is ReturnCode.SUCCESS:
            samples = []
            for _ in range(reps):
                t0 = time.perf_counter()
                _run(prob, alg, a, r, options, registry)
                samples.append(time.perf_counter() - t0)
            runtime = statistics.median(samples)
        entries.append(WorkPrecisionEntry(alg, a, r, err, runtime, snap, code))
    entries.sort(key=lambda e: (e.alg, e.reltol))
    return entries
