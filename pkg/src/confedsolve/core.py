"""Problem, option and solution value types plus the ``solve`` entry point.

``solve(prob, alg)`` looks the algorithm name up in a :class:`Registry` and
hands the problem to whatever integrator was registered under that name.
Nothing in this module knows about specific methods; the built-in ones are
registered by :mod:`confedsolve.builtins` the first time the default
registry is requested.
"""

from __future__ import annotations

import bisect
import enum
import re
import threading
from dataclasses import dataclass, field, fields, replace
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateName,
    InvalidOptions,
    InvalidProblem,
    KindMismatch,
    MissingDt,
    NoDenseOutput,
    OutOfRange,
    ShapeMismatch,
    UnknownAlgorithm,
)


class ProblemKind(str, enum.Enum):
    FIRST_ORDER = "FirstOrderODE"
    SECOND_ORDER = "SecondOrderODE"


class Family(str, enum.Enum):
    EXPLICIT_RK = "ExplicitRK"
    ROSENBROCK = "Rosenbrock"
    BDF = "BDF"
    SYMPLECTIC = "Symplectic"
    COMPOSITE = "Composite"


class ReturnCode(str, enum.Enum):
    SUCCESS = "Success"
    MAX_ITERS = "MaxIters"
    UNSTABLE = "Unstable"
    DT_LESS_THAN_MIN = "DtLessThanMin"
    FAILURE = "Failure"


class StiffnessHint(str, enum.Enum):
    NONE = "none"
    NONSTIFF = "nonstiff"
    STIFF = "stiff"


def _frozen_vector(x, name) -> np.ndarray:
    arr = np.array(x, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def _check_tspan(tspan) -> tuple[float, float]:
    if len(tspan) != 2:
        raise InvalidProblem(f"tspan must be a pair, got {tspan!r}")
    t0, tf = float(tspan[0]), float(tspan[1])
    if not t0 < tf:
        raise InvalidProblem(f"tspan must satisfy t0 < tf, got {tspan!r}")
    return t0, tf


def _values_equal(a, b) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    return a == b


class _ProblemBase:
    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(
            _values_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ODEProblem(_ProblemBase):
    """First-order system ``u' = f(u, p, t)`` with ``u(t0) = u0``.

    ``f`` is called as ``f(du, u, p, t)`` and must write the derivative
    into ``du``. ``analytic``, when given, is ``analytic(u0, p, t)`` and is
    used by the convergence and error tooling.
    """

    f: Callable
    u0: Any
    tspan: tuple
    p: Any = ()
    analytic: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "u0", _frozen_vector(self.u0, "u0"))
        object.__setattr__(self, "p", _frozen_vector(self.p, "p"))
        object.__setattr__(self, "tspan", _check_tspan(self.tspan))
        if self.u0.size == 0:
            raise InvalidProblem("u0 must be nonempty")

    kind = ProblemKind.FIRST_ORDER

    @property
    def n(self) -> int:
        return self.u0.size


@dataclass(frozen=True, eq=False)
class SecondOrderODEProblem(_ProblemBase):
    """Second-order system ``x'' = f_accel(v, x, p, t)``.

    ``f_accel(dv, v, x, p, t)`` writes the acceleration into ``dv``. The
    combined state used by solutions and by first-order reduction is the
    concatenation ``[x, v]``; ``analytic(u0, p, t)`` follows the same layout.
    """

    f_accel: Callable
    v0: Any
    x0: Any
    tspan: tuple
    p: Any = ()
    analytic: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "v0", _frozen_vector(self.v0, "v0"))
        object.__setattr__(self, "x0", _frozen_vector(self.x0, "x0"))
        object.__setattr__(self, "p", _frozen_vector(self.p, "p"))
        object.__setattr__(self, "tspan", _check_tspan(self.tspan))
        if self.x0.size == 0:
            raise InvalidProblem("x0 must be nonempty")
        if self.v0.size != self.x0.size:
            raise ShapeMismatch("v0 and x0 must have equal length")

    kind = ProblemKind.SECOND_ORDER

    @property
    def u0(self) -> np.ndarray:
        return np.concatenate([self.x0, self.v0])

    @property
    def n(self) -> int:
        return 2 * self.x0.size

    def to_first_order(self) -> ODEProblem:
        m = self.x0.size
        accel = self.f_accel

        def f(du, u, p, t):
            du[:m] = u[m:]
            accel(du[m:], u[m:], u[:m], p, t)

        return ODEProblem(f, self.u0, self.tspan, self.p, self.analytic)


def remake(prob, **overrides):
    """Return a copy of ``prob`` with selected fields replaced.

    Allowed overrides are ``u0``, ``p`` and ``tspan`` (plus ``x0``/``v0``
    for second-order problems). Shapes must match the original.
    """
    allowed = {"u0", "p", "tspan"}
    if isinstance(prob, SecondOrderODEProblem):
        allowed = {"x0", "v0", "p", "tspan"}
        if "u0" in overrides:
            u0 = np.asarray(overrides.pop("u0"), dtype=float).reshape(-1)
            if u0.size != prob.n:
                raise ShapeMismatch(f"u0 has length {u0.size}, expected {prob.n}")
            m = prob.x0.size
            overrides.setdefault("x0", u0[:m])
            overrides.setdefault("v0", u0[m:])
    unknown = set(overrides) - allowed
    if unknown:
        raise TypeError(f"cannot override {sorted(unknown)}")
    for name in ("u0", "x0", "v0", "p"):
        if name in overrides:
            new = np.asarray(overrides[name], dtype=float).reshape(-1)
            old = getattr(prob, name)
            if new.shape != old.shape:
                raise ShapeMismatch(
                    f"{name} has shape {new.shape}, expected {old.shape}"
                )
    return replace(prob, **overrides)


@dataclass(frozen=True)
class SolverOptions:
    abstol: float = 1e-6
    reltol: float = 1e-3
    dt: Optional[float] = None
    adaptive: bool = True
    saveat: Optional[Sequence[float]] = None
    save_everystep: bool = True
    dense: bool = True
    max_steps: int = 10**6
    callbacks: tuple = ()
    stiffness_hint: StiffnessHint = StiffnessHint.NONE

    def __post_init__(self):
        if self.abstol < 0 or self.reltol < 0:
            raise InvalidOptions("tolerances must be non-negative")
        if self.abstol == 0 and self.reltol == 0:
            raise InvalidOptions("abstol and reltol cannot both be zero")
        if self.dt is not None and not self.dt > 0:
            raise InvalidOptions(f"dt must be positive, got {self.dt}")
        if self.max_steps < 1:
            raise InvalidOptions("max_steps must be at least 1")
        object.__setattr__(self, "stiffness_hint", StiffnessHint(self.stiffness_hint))
        object.__setattr__(self, "callbacks", tuple(self.callbacks))
        if self.saveat is not None:
            saveat = tuple(float(s) for s in np.atleast_1d(self.saveat))
            if any(b < a for a, b in zip(saveat, saveat[1:])):
                raise InvalidOptions("saveat must be sorted")
            object.__setattr__(self, "saveat", saveat)


@dataclass
class Stats:
    nf: int = 0
    naccept: int = 0
    nreject: int = 0
    njac: int = 0
    nfactor: int = 0
    nsolve: int = 0
    nevents: int = 0
    # per-method traces (BDF order, autoswitch regime, ...)
    metadata: dict = field(default_factory=dict)

    def snapshot(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "metadata"}


class Solution:
    """Output of :func:`solve`.

    ``t`` and ``u`` hold the saved nodes (``u[i]`` is the state at
    ``t[i]``). Event times appear twice, first with the pre-event state and
    then with the post-event state. Calling the solution, ``sol(tq)``,
    evaluates the continuous extension.
    """

    def __init__(self, t, u, retcode, stats, algorithm_name, prob,
                 dense_nodes=None, dense_pieces=None):
        self.t = np.asarray(t, dtype=float)
        self.u = np.asarray(u, dtype=float).reshape(len(self.t), -1)
        self.retcode = ReturnCode(retcode)
        self.stats = stats
        self.algorithm_name = algorithm_name
        self.prob = prob
        self._nodes = dense_nodes
        self._pieces = dense_pieces
        self.t.setflags(write=False)
        self.u.setflags(write=False)

    @property
    def success(self) -> bool:
        return self.retcode is ReturnCode.SUCCESS

    @property
    def dense(self) -> bool:
        return self._pieces is not None

    def __len__(self):
        return len(self.t)

    def __repr__(self):
        return (f"Solution(alg={self.algorithm_name!r}, retcode={self.retcode.value}, "
                f"len={len(self.t)}, t_end={self.t[-1] if len(self.t) else None})")

    def __call__(self, tq):
        if np.ndim(tq) == 0:
            return interpolate(self, float(tq))
        return np.array([interpolate(self, float(s)) for s in tq])


def interpolate(sol: Solution, tq: float) -> np.ndarray:
    """State of ``sol`` at time ``tq``.

    Saved nodes are returned exactly (the post-event state at a duplicated
    event time). Between nodes the integrator's own continuous extension
    is used.
    """
    t = sol.t
    if len(t) == 0:
        raise OutOfRange("empty solution")
    t_lo = sol.prob.tspan[0] if sol.prob is not None else t[0]
    t_hi = t[-1] if sol._nodes is None else max(t[-1], sol._nodes[-1])
    if not t_lo <= tq <= t_hi:
        raise OutOfRange(f"t={tq} outside [{t_lo}, {t_hi}]")
    i = bisect.bisect_right(t, tq) - 1
    if i >= 0 and t[i] == tq:
        return sol.u[i].copy()
    if sol._pieces is None:
        raise NoDenseOutput("solution was built with dense=False; only saved nodes can be evaluated")
    nodes = sol._nodes
    j = bisect.bisect_right(nodes, tq) - 1
    j = min(max(j, 0), len(sol._pieces) - 1)
    while sol._pieces[j] is None and j > 0:
        j -= 1
    return np.asarray(sol._pieces[j](tq), dtype=float)


@dataclass(frozen=True)
class AlgorithmDescriptor:
    name: str
    problem_kinds: frozenset
    family: Family
    adaptive: bool
    stiff_capable: bool
    order: int
    description: str = ""

    def __post_init__(self):
        if not self.name or not re.fullmatch(r"[A-Za-z_][\w.-]*", self.name):
            raise ValueError(f"invalid algorithm name {self.name!r}")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        object.__setattr__(self, "problem_kinds",
                           frozenset(ProblemKind(k) for k in self.problem_kinds))
        object.__setattr__(self, "family", Family(self.family))


_COMPOSITE_NAME = re.compile(r"^\s*([A-Za-z_][\w.-]*)\s*\((.*)\)\s*$")


class Registry:
    """Name -> (descriptor, factory) table that :func:`solve` dispatches on.

    A factory is called as ``factory(prob, opts, stats, **params)`` and must
    return an :class:`~confedsolve.integrator.Integrator`. Composite
    algorithms are addressed as ``name(part1,part2)``; the parts are passed
    to the factory as ``parts=(...)`` along with ``registry=self``.
    """

    def __init__(self):
        self._entries: dict[str, tuple[AlgorithmDescriptor, Callable]] = {}
        self._lock = threading.Lock()

    def register(self, descriptor: AlgorithmDescriptor, factory: Callable) -> None:
        with self._lock:
            if descriptor.name in self._entries:
                raise DuplicateName(f"algorithm {descriptor.name!r} already registered")
            self._entries = {**self._entries, descriptor.name: (descriptor, factory)}

    def __contains__(self, name) -> bool:
        try:
            self.resolve(name)
        except UnknownAlgorithm:
            return False
        return True

    def lookup(self, name: str) -> tuple[AlgorithmDescriptor, Callable]:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownAlgorithm(name) from None

    def resolve(self, name: str):
        """Split ``name`` into (descriptor, factory, parts).

        Composite names such as ``autoswitch(tsit5,rosenbrock23)`` resolve to
        the composite's entry with ``parts == ("tsit5", "rosenbrock23")``.
        """
        if name in self._entries:
            desc, factory = self._entries[name]
            return desc, factory, ()
        m = _COMPOSITE_NAME.match(name)
        if m is None:
            raise UnknownAlgorithm(name)
        desc, factory = self.lookup(m.group(1))
        if desc.family is not Family.COMPOSITE:
            raise UnknownAlgorithm(name)
        parts = tuple(s.strip() for s in m.group(2).split(",") if s.strip())
        for part in parts:
            if part not in self._entries:
                raise UnknownAlgorithm(part)
        return desc, factory, parts

    def descriptors(self) -> list[AlgorithmDescriptor]:
        return [d for d, _ in self._entries.values()]


def register_algorithm(registry: Registry, descriptor: AlgorithmDescriptor,
                       factory: Callable) -> None:
    registry.register(descriptor, factory)


def list_algorithms(registry: Registry, kind=None) -> list[AlgorithmDescriptor]:
    """Registered descriptors sorted by name, optionally filtered by kind."""
    descs = registry.descriptors()
    if kind is not None:
        kind = ProblemKind(kind)
        descs = [d for d in descs if kind in d.problem_kinds]
    return sorted(descs, key=lambda d: d.name)


_default_registry: Optional[Registry] = None
_default_lock = threading.Lock()


def default_registry() -> Registry:
    """Process-wide registry pre-loaded with the built-in integrators."""
    global _default_registry
    with _default_lock:
        if _default_registry is None:
            from .builtins import register_builtins

            reg = Registry()
            register_builtins(reg)
            _default_registry = reg
    return _default_registry


def _validate(prob, opts: SolverOptions) -> None:
    if not isinstance(prob, (ODEProblem, SecondOrderODEProblem)):
        raise InvalidProblem(f"unsupported problem type {type(prob).__name__}")
    t0, tf = prob.tspan
    if opts.saveat is not None and opts.saveat:
        if opts.saveat[0] < t0 or opts.saveat[-1] > tf:
            raise InvalidOptions("saveat times must lie within tspan")


def solve(prob, alg: Optional[str] = None, opts: Optional[SolverOptions] = None, *,
          registry: Optional[Registry] = None, alg_params: Optional[dict] = None,
          **option_overrides) -> Solution:
    """Solve ``prob`` with the algorithm registered under ``alg``.

    When ``alg`` is omitted (or ``"auto"``) the choice is made by
    :func:`confedsolve.polyalg.default_algorithm`. Keyword arguments not
    listed here override fields of ``opts``, e.g. ``solve(prob, reltol=1e-8)``.
    Numerical failure is reported through ``Solution.retcode``.
    """
    from .driver import integrate
    from .polyalg import default_algorithm

    registry = default_registry() if registry is None else registry
    opts = SolverOptions() if opts is None else opts
    if option_overrides:
        opts = replace(opts, **option_overrides)
    _validate(prob, opts)

    if alg is None or alg == "auto":
        alg = default_algorithm(prob, opts)
    desc, factory, parts = registry.resolve(alg)

    run_prob = prob
    if prob.kind not in desc.problem_kinds:
        if prob.kind is ProblemKind.SECOND_ORDER and ProblemKind.FIRST_ORDER in desc.problem_kinds:
            run_prob = prob.to_first_order()
        else:
            raise KindMismatch(
                f"algorithm {desc.name!r} does not support {prob.kind.value} problems"
            )

    if (not desc.adaptive or not opts.adaptive) and opts.dt is None:
        raise MissingDt(f"dt required for {alg}")

    params = dict(alg_params or {})
    if desc.family is Family.COMPOSITE:
        params.setdefault("parts", parts)
        params.setdefault("registry", registry)

    stats = Stats()
    integrator = factory(run_prob, opts, stats, **params)
    return integrate(integrator, run_prob, opts, stats, algorithm_name=alg, original_prob=prob)
