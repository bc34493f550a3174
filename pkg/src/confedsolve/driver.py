"""The generic time loop every registered integrator runs under.

Output policy: without ``saveat`` every accepted node is saved (only the
endpoints when ``save_everystep`` is false). With ``saveat``, the listed
times are produced from the continuous extension, merged with accepted
nodes if ``save_everystep`` is true. Event times are saved twice (pre-
and post-effect) whenever accepted nodes are saved.
"""

from __future__ import annotations

import numpy as np

from .core import ReturnCode, Solution
from .control import EPS
from .events import apply_event, earliest_event


class _Run:
    def __init__(self, integrator, prob, opts, stats):
        self.integrator = integrator
        self.prob = prob
        self.opts = opts
        self.stats = stats
        self.t0, self.tf = prob.tspan
        self.span = self.tf - self.t0
        self.fixed = not (integrator.adaptive and opts.adaptive)
        self.save_nodes = opts.save_everystep or opts.saveat is None
        self.every_node = opts.save_everystep
        self.saveat = opts.saveat or ()
        self.si = 0
        self.out_t: list[float] = []
        self.out_u: list[np.ndarray] = []
        self.nodes: list[float] = [self.t0]
        self.pieces: list = []
        self.callbacks = tuple(opts.callbacks)
        self.root_tol = 1e-12 * self.span

    def conditions(self, u, t):
        p = self.integrator.p
        return [float(cb.condition(u, p, t)) for cb in self.callbacks]

    def _emit(self, t, u):
        self.out_t.append(t)
        self.out_u.append(np.array(u, dtype=float, copy=True))

    def _emit_saveat(self, t_lo, t_hi, u_hi, interp, include_lo=False):
        sa = self.saveat
        while self.si < len(sa) and (sa[self.si] < t_hi or sa[self.si] == t_hi):
            s = sa[self.si]
            if s > t_lo or (include_lo and s == t_lo):
                if s == t_hi:
                    val = u_hi
                elif s == t_lo:
                    val = self.u
                else:
                    val = interp(s)
                if not (self.out_t and self.out_t[-1] == s and self.every_node):
                    self._emit(s, val)
            self.si += 1

    def start(self):
        self.t = self.t0
        self.u = np.array(self.prob.u0, dtype=float, copy=True)
        self.integrator.reset(self.t, self.u)
        self.g = self.conditions(self.u, self.t)
        self.dt = self.opts.dt if self.opts.dt is not None else self.integrator.initial_dt(self.t, self.u)
        if self.save_nodes:
            self._emit(self.t, self.u)
        self._emit_saveat(self.t, self.t, self.u, None, include_lo=True)

    def record_step_end(self, t_new, u_new, interp, event=False):
        """Close the current step at ``t_new`` (possibly an event time)."""
        self._emit_saveat(self.t, t_new, u_new, interp)
        if self.opts.dense:
            self.nodes.append(t_new)
            self.pieces.append(interp)
        if self.every_node or (event and self.save_nodes):
            if not (self.out_t and self.out_t[-1] == t_new):
                self._emit(t_new, u_new)

    def record_event_post(self, t, u):
        if self.opts.dense:
            self.nodes.append(t)
            self.pieces.append(None)
        if self.save_nodes:
            self._emit(t, u)

    def restart(self, t, u):
        self.t, self.u = t, u
        self.integrator.reset(t, u)
        self.g = self.conditions(u, t)
        if self.fixed:
            self.dt = self.opts.dt
        else:
            self.dt = self.integrator.initial_dt(t, u)

    def loop(self) -> ReturnCode:
        integ, stats = self.integrator, self.stats
        tf = self.tf
        while self.t < tf:
            if stats.naccept >= self.opts.max_steps:
                return ReturnCode.MAX_ITERS
            dt = self.dt
            last = tf - self.t <= dt * (1 + 1e-8)
            if last:
                dt = tf - self.t
            step = integ.attempt(self.t, self.u, dt)
            finite = step.ok and np.isfinite(step.err) and bool(np.all(np.isfinite(step.u_new)))
            accepted = finite and (self.fixed or step.err <= 1.0)
            if not accepted:
                if self.fixed:
                    return ReturnCode.UNSTABLE if step.ok else ReturnCode.FAILURE
                stats.nreject += 1
                integ.reject(step)
                self.dt = integ.propose_dt(step, False)
                if self.dt < 16 * EPS * max(abs(self.t), self.span):
                    return ReturnCode.DT_LESS_THAN_MIN
                continue

            t_new = tf if last else step.t_new
            stats.naccept += 1
            integ.accept(step)
            if self.callbacks:
                g_new = self.conditions(step.u_new, t_new)
                hit = earliest_event(self.callbacks, self.t, t_new, step.interp,
                                     integ.p, self.root_tol, self.g, g_new)
                if hit is not None:
                    apply_event(self, self.callbacks[hit[0]], hit[1], step.interp)
                    continue
                self.g = g_new
            self.dt = integ.propose_dt(step, True)
            self.record_step_end(t_new, step.u_new, step.interp)
            self.t, self.u = t_new, step.u_new
        return ReturnCode.SUCCESS

    def finish(self, retcode):
        if retcode is ReturnCode.SUCCESS and self.save_nodes and not self.every_node:
            if not self.out_t or self.out_t[-1] != self.t:
                self._emit(self.t, self.u)
        elif retcode is not ReturnCode.SUCCESS and self.save_nodes and not self.every_node:
            self._emit(self.t, self.u)


def integrate(integrator, prob, opts, stats, algorithm_name: str, original_prob=None) -> Solution:
    """Run ``integrator`` over ``prob.tspan`` and package a :class:`Solution`."""
    run = _Run(integrator, prob, opts, stats)
    # overflow and NaN surface as a retcode, not as floating-point warnings
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        run.start()
        retcode = run.loop()
        run.finish(retcode)
    n = prob.u0.size
    u = np.array(run.out_u, dtype=float).reshape(len(run.out_t), n)
    dense_nodes = np.array(run.nodes) if opts.dense else None
    pieces = run.pieces if opts.dense else None
    return Solution(run.out_t, u, retcode, stats, algorithm_name,
                    original_prob if original_prob is not None else prob,
                    dense_nodes, pieces)
