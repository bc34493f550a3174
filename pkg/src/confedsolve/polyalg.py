"""Automatic algorithm choice when ``solve`` is called without one.

The decision table (thresholds are calibration choices, not derived):

1. Second-order problem, fixed step, no stiff hint -> ``verlet``.
   Otherwise second-order problems are reduced to first order and fall
   through with twice the dimension.
2. ``stiffness_hint="nonstiff"`` -> ``tsit5`` if ``reltol >= 1e-8`` else ``dp5``.
3. ``stiffness_hint="stiff"``: events -> ``rosenbrock23`` (BDF restarts at
   order 1 after every event); ``n <= 50`` -> ``rosenbrock23``; larger ->
   ``bdf`` (fewer function evaluations per step on big systems).
4. ``stiffness_hint="stiff"`` and ``n > 10_000`` -> ``bdf`` with a warning that
   the dense Jacobian may not fit in memory.
5. No hint -> ``autoswitch(tsit5,rosenbrock23)`` for ``n <= 50``,
   ``autoswitch(tsit5,bdf)`` above; with events the stiff arm is always
   ``rosenbrock23``.

No right-hand-side evaluation happens here; hint-free stiffness is
detected at run time by the autoswitch composite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ProblemKind, SolverOptions, StiffnessHint

SMALL_SYSTEM = 50
HUGE_SYSTEM = 10_000
LOW_TOL = 1e-8


@dataclass(frozen=True)
class SelectionContext:
    kind: ProblemKind
    n: int
    reltol: float
    abstol: float
    stiffness_hint: StiffnessHint
    has_events: bool
    adaptive: bool = True

    @classmethod
    def from_problem(cls, prob, opts: SolverOptions) -> "SelectionContext":
        return cls(prob.kind, prob.n, opts.reltol, opts.abstol, opts.stiffness_hint,
                   bool(opts.callbacks), opts.adaptive)


def _walk(ctx: SelectionContext):
    trace = []
    hint = StiffnessHint(ctx.stiffness_hint)
    n = ctx.n

    if ctx.kind is ProblemKind.SECOND_ORDER:
        fixed = not ctx.adaptive
        trace.append(("second-order problem", "yes"))
        if fixed and hint is not StiffnessHint.STIFF:
            trace.append(("fixed step and no stiff hint", "yes"))
            return trace, "verlet"
        trace.append(("fixed step and no stiff hint", "no -> reduce to first order"))
    else:
        trace.append(("second-order problem", "no"))

    trace.append((f"stiffness hint = {hint.value}", hint.value))
    if hint is StiffnessHint.NONSTIFF:
        if ctx.reltol >= LOW_TOL:
            trace.append((f"reltol >= {LOW_TOL:g}", "yes"))
            return trace, "tsit5"
        trace.append((f"reltol >= {LOW_TOL:g}", "no"))
        return trace, "dp5"

    if hint is StiffnessHint.STIFF:
        if n > HUGE_SYSTEM:
            trace.append((f"n > {HUGE_SYSTEM} (dense Jacobian may not fit in memory)", "yes"))
        if ctx.has_events:
            trace.append(("has events", "yes"))
            return trace, "rosenbrock23"
        trace.append(("has events", "no"))
        if n <= SMALL_SYSTEM:
            trace.append((f"n <= {SMALL_SYSTEM}", "yes"))
            return trace, "rosenbrock23"
        trace.append((f"n <= {SMALL_SYSTEM}", "no"))
        return trace, "bdf"

    if ctx.has_events:
        trace.append(("has events", "yes"))
        return trace, "autoswitch(tsit5,rosenbrock23)"
    trace.append(("has events", "no"))
    if n <= SMALL_SYSTEM:
        trace.append((f"n <= {SMALL_SYSTEM}", "yes"))
        return trace, "autoswitch(tsit5,rosenbrock23)"
    trace.append((f"n <= {SMALL_SYSTEM}", "no"))
    return trace, "autoswitch(tsit5,bdf)"


def choose(ctx: SelectionContext) -> str:
    return _walk(ctx)[1]


def default_algorithm(prob, opts: SolverOptions) -> str:
    """Algorithm name the decision table picks for ``(prob, opts)``."""
    return choose(SelectionContext.from_problem(prob, opts))


def explain_choice(prob, opts: SolverOptions) -> list[tuple[str, str]]:
    """Ordered ``(predicate, branch)`` pairs; the last pair names the choice."""
    return explain_context(SelectionContext.from_problem(prob, opts))


def explain_context(ctx: SelectionContext) -> list[tuple[str, str]]:
    trace, leaf = _walk(ctx)
    return trace + [("choice", leaf)]
