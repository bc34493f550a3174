"""The eight acceptance criteria, one test each, each printing a PASS/FAIL line.

Run under pytest (lines are repeated in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import subprocess
import sys
import textwrap
import time
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from confedsolve import (Family, ProblemKind, StiffnessHint, default_registry, list_algorithms,
                         remake, solve)
from confedsolve.devtools import convergence_errors, fit_order, tolerance_grid, work_precision
from confedsolve.estimation import parameter_l2loss
from confedsolve.polyalg import SelectionContext, choose, explain_context
from confedsolve.problems import bouncing_ball, harmonic, linear_decay, orego, van_der_pol

DTS_LOW = [2.0 ** -k for k in range(4, 10)]
# above roundoff for the fifth-order pairs, see the decisions ledger
DTS_HIGH = [0.05, 0.04, 0.03, 0.025]
COMPOSITE = "autoswitch(tsit5,rosenbrock23)"


def _fmt_checks(checks):
    failed = [name for name, ok in checks.items() if not ok]
    return "all checks hold" if not failed else "failed: " + ", ".join(failed)


# 1. convergence orders

def test_convergence_orders(report):
    t0 = time.perf_counter()
    cases = [("euler", 1, linear_decay(), DTS_LOW, {}),
             ("rk4", 4, linear_decay(), DTS_LOW, {}),
             ("dp5", 5, linear_decay(), DTS_HIGH, {}),
             ("tsit5", 5, linear_decay(), DTS_HIGH, {}),
             ("rosenbrock23", 2, linear_decay(), DTS_LOW, {}),
             ("bdf", 2, linear_decay(), DTS_LOW, {"alg_params": {"max_order": 2}}),
             ("verlet", 2, harmonic(), DTS_LOW, {})]
    slopes = {}
    for alg, _, prob, dts, kw in cases:
        slopes[alg] = fit_order(dts, convergence_errors(prob, alg, dts, **kw))
    elapsed = time.perf_counter() - t0
    ok = all(abs(slopes[alg] - p) <= 0.25 for alg, p, *_ in cases) and elapsed < 10
    detail = ", ".join(f"{a}={s:.3f}" for a, s in slopes.items()) + f"; {elapsed:.1f}s"
    assert report(1, "convergence orders within 0.25", ok, detail)


# 2. bouncing ball

def test_bouncing_ball(report):
    t0 = time.perf_counter()
    prob, cb = bouncing_ball()
    kw = dict(callbacks=[cb], reltol=1e-6, abstol=1e-8)
    sols = {alg: solve(prob, alg, **kw) for alg in ("tsit5", "rosenbrock23", "bdf")}
    expected = (2 * np.arange(1, 6) - 1) * math.sqrt(2 / 9.8)
    worst_time, worst_floor = 0.0, math.inf
    for sol in sols.values():
        t = np.asarray(sol.t)
        events = t[1:][np.diff(t) == 0][:5]
        worst_time = max(worst_time, float(np.max(np.abs(events - expected))))
        x = sol(np.linspace(0.0, 5.0, 1000))[:, 0]
        worst_floor = min(worst_floor, float(x.min()), float(sol.u[:, 0].min()))
    bdf = sols["bdf"]
    t = np.asarray(bdf.t)
    after, step = [], 0
    for j in range(len(t) - 1):
        if t[j + 1] == t[j]:
            after.append(step)
        else:
            step += 1
    trace = bdf.stats.metadata["order_trace"]
    elapsed = time.perf_counter() - t0
    checks = {
        "event times": worst_time < 1e-4,
        "floor": worst_floor >= -1e-6,
        "order reset": len(after) == bdf.stats.nevents and all(trace[k] == 1 for k in after),
        "bdf steps > rosenbrock23 steps": bdf.stats.naccept > sols["rosenbrock23"].stats.naccept,
        "runtime": elapsed < 5,
    }
    detail = (f"max |t_k err|={worst_time:.1e}, min x={worst_floor:.1e}, naccept bdf="
              f"{bdf.stats.naccept} vs rosenbrock23={sols['rosenbrock23'].stats.naccept}; "
              f"{elapsed:.1f}s; {_fmt_checks(checks)}")
    assert report(2, "bouncing-ball events, floor, BDF order reset", all(checks.values()), detail)


# 3. OREGO work-precision

def test_orego_work_precision(report):
    t0 = time.perf_counter()
    prob = remake(orego(), tspan=(0.0, 24.0))
    algs = ["tsit5", "rosenbrock23", "bdf"]
    reltols = [10.0 ** -k for k in range(2, 8)]
    grid = tolerance_grid(reltols)
    first = work_precision(prob, algs, grid, reps=5)
    again = work_precision(prob, algs, grid, reps=1)
    elapsed = time.perf_counter() - t0
    cell = {(e.alg, e.reltol): e for e in first}
    rhos = {}
    for alg in algs:
        rows = [e for e in first if e.alg == alg]
        rhos[alg] = spearmanr([e.reltol for e in rows], [e.error for e in rows])[0]
    at = {alg: cell[(alg, 1e-4)] for alg in algs}
    checks = {
        "all succeed": all(e.success for e in first),
        "deterministic errors": [e.error for e in first] == [e.error for e in again],
        "spearman": all(r >= 0.8 for r in rhos.values()),
        "runtime rosenbrock23 < tsit5": at["rosenbrock23"].runtime < at["tsit5"].runtime,
        "nf bdf < tsit5": at["bdf"].stats["nf"] < at["tsit5"].stats["nf"],
        "budget": elapsed < 60,
    }
    detail = (", ".join(f"rho[{a}]={r:.2f}" for a, r in rhos.items())
              + f"; at 1e-4 runtime ros={at['rosenbrock23'].runtime:.3f}s tsit5="
              f"{at['tsit5'].runtime:.3f}s, nf bdf={at['bdf'].stats['nf']} tsit5="
              f"{at['tsit5'].stats['nf']}; {elapsed:.1f}s; {_fmt_checks(checks)}")
    assert report(3, "OREGO work-precision (horizon 0..24)", all(checks.values()), detail)


# 4. polyalgorithm table

def _contexts():
    out = []
    for n, reltol, hint, events in itertools.product(
            (3, 51, 20_000), (1e-3, 1e-8, 1e-10), tuple(StiffnessHint), (False, True)):
        out.append(SelectionContext(ProblemKind.FIRST_ORDER, n, reltol, 1e-6, hint, events))
        for adaptive in (True, False):
            out.append(SelectionContext(ProblemKind.SECOND_ORDER, n, reltol, 1e-6, hint, events,
                                        adaptive))
    return out


def test_polyalgorithm(report):
    t0 = time.perf_counter()
    reg = default_registry()
    FO, SO = ProblemKind.FIRST_ORDER, ProblemKind.SECOND_ORDER
    N, NS, S = StiffnessHint.NONE, StiffnessHint.NONSTIFF, StiffnessHint.STIFF

    def c(kind=FO, n=3, reltol=1e-3, hint=N, events=False, adaptive=True):
        return SelectionContext(kind, n, reltol, 1e-6, hint, events, adaptive)

    rows = [(c(SO, 2, adaptive=False), "verlet"),
            (c(SO, 2), "autoswitch(tsit5,rosenbrock23)"),
            (c(hint=NS), "tsit5"), (c(hint=NS, reltol=1e-9), "dp5"),
            (c(hint=S, events=True, n=500), "rosenbrock23"),
            (c(hint=S, n=50), "rosenbrock23"), (c(hint=S, n=51), "bdf"),
            (c(hint=S, n=20_000), "bdf"),
            (c(n=3), "autoswitch(tsit5,rosenbrock23)"), (c(n=51), "autoswitch(tsit5,bdf)"),
            (c(n=51, events=True), "autoswitch(tsit5,rosenbrock23)")]
    rows_ok = all(choose(ctx) == name for ctx, name in rows)
    huge = explain_context(c(hint=S, n=20_000))
    rows_ok = rows_ok and any(p.startswith("n > 10000") and b == "yes" for p, b in huge)

    grid = _contexts()
    implicit = {Family.ROSENBROCK, Family.BDF}
    fam = lambda name: reg.resolve(name)[0].family  # noqa: E731
    order = lambda name: reg.resolve(name)[0].order  # noqa: E731
    dominance = events = mono = total = True
    for ctx in grid:
        name = choose(ctx)
        total &= name in reg and explain_context(ctx)[-1] == ("choice", name)
        if ctx.stiffness_hint is S:
            dominance &= fam(name) in implicit
        if ctx.stiffness_hint is NS:
            dominance &= fam(name) not in implicit and fam(name) is not Family.COMPOSITE
        if ctx.has_events:
            events &= "bdf" not in name
        prev = None
        for r in (1e-2, 1e-3, 1e-6, 1e-8, 1e-9, 1e-12):
            cur = choose(SelectionContext(**{**ctx.__dict__, "reltol": r}))
            if prev is not None and fam(prev) == fam(cur):
                mono &= order(cur) >= order(prev)
            prev = cur
    elapsed = time.perf_counter() - t0
    checks = {"rows": rows_ok, "hint dominance": dominance, "event rule": events,
              "tolerance monotonicity": mono, "totality": total, "grid <= 200": len(grid) <= 200,
              "runtime": elapsed < 1}
    detail = f"{len(rows)} rows, {len(grid)} contexts; {elapsed * 1e3:.0f}ms; {_fmt_checks(checks)}"
    assert report(4, "polyalgorithm decision table and properties", all(checks.values()), detail)


# 5. autoswitch

def test_autoswitch_van_der_pol(report):
    t0 = time.perf_counter()
    prob = remake(van_der_pol(mu=1e3), tspan=(0.0, 3.0))
    reltol = 1e-3
    comp = solve(prob, COMPOSITE)
    ref = solve(prob, "rosenbrock23", reltol=1e-8, abstol=1e-10)
    explicit = solve(prob, "tsit5")
    rel = float(np.max(np.abs(comp.u[-1] - ref.u[-1]) / np.maximum(np.abs(ref.u[-1]), 1e-6)))
    nsw = len(comp.stats.metadata["switches"])
    elapsed = time.perf_counter() - t0
    checks = {
        "composite ok": comp.success and ref.success and explicit.success,
        "accuracy": rel <= 100 * reltol,
        "switches": nsw >= 1,
        "explicit > 10x": explicit.stats.naccept > 10 * comp.stats.naccept,
        "runtime": elapsed < 30,
    }
    detail = (f"rel err={rel:.1e}, switches={nsw}, naccept tsit5={explicit.stats.naccept} vs "
              f"composite={comp.stats.naccept}; {elapsed:.1f}s; {_fmt_checks(checks)}")
    assert report(5, "autoswitch on Van der Pol mu=1e3", all(checks.values()), detail)


# 6. parameter loss

def test_parameter_loss(report):
    t0 = time.perf_counter()
    prob = linear_decay(-1.0)
    times = np.linspace(0.1, 1.0, 10)
    data = np.exp(-times)[:, None]
    tight = dict(reltol=1e-8, abstol=1e-10)
    loss = parameter_l2loss(prob, "tsit5", times, data, **tight)
    self_loss = loss([-1.0])
    grid = np.linspace(-3.0, 0.0, 31)
    best = float(grid[int(np.argmin([loss([lam]) for lam in grid]))])
    adaptive = [d.name for d in list_algorithms(default_registry())
                if d.adaptive and d.family is not Family.COMPOSITE]
    adaptive += ["autoswitch(tsit5,rosenbrock23)", "autoswitch(tsit5,bdf)"]
    per_alg = {a: parameter_l2loss(prob, a, times, data, **tight)([-1.0]) for a in adaptive}
    elapsed = time.perf_counter() - t0
    checks = {"self-consistency": self_loss < 1e-10, "grid search": abs(best + 1.0) < 0.05,
              "agnostic": all(v < 1e-8 for v in per_alg.values()), "runtime": elapsed < 10}
    detail = (f"loss(true)={self_loss:.1e}, argmin={best:g}, worst over {len(per_alg)} algs="
              f"{max(per_alg.values()):.1e}; {elapsed:.1f}s; {_fmt_checks(checks)}")
    assert report(6, "L2 parameter loss", all(checks.values()), detail)


# 7. registry extension

PLUGIN_SCRIPT = textwrap.dedent("""
    import io, sys
    sys.path.insert(0, {tests!r})
    import ext_midpoint
    from confedsolve import default_registry, solve
    from confedsolve.cli import main
    from confedsolve.problems import linear_decay
    ext_midpoint.register(default_registry())
    sol = solve(linear_decay(), ext_midpoint.NAME, dt=0.01)
    out = io.StringIO()
    code = main(["list"], out, io.StringIO())
    listed = any(line.split()[0] == ext_midpoint.NAME for line in out.getvalue().splitlines()[1:])
    e1, e2 = ext_midpoint.midpoint_error(0.02), ext_midpoint.midpoint_error(0.01)
    print(sol.algorithm_name, sol.retcode.value, code, listed, e1 / e2)
""")


def test_registry_extension(report):
    src = Path(__file__).resolve().parents[1] / "src" / "confedsolve"
    before = {p.name: p.read_bytes() for p in src.glob("*.py")}
    script = PLUGIN_SCRIPT.format(tests=str(Path(__file__).resolve().parent))
    res = subprocess.run([sys.executable, "-c", script], capture_output=True, text=True, timeout=120)
    after = {p.name: p.read_bytes() for p in src.glob("*.py")}
    fields = res.stdout.split()
    ok = (res.returncode == 0 and fields[:4] == ["ext_midpoint", "Success", "0", "True"]
          and abs(float(fields[4]) - 4.0) < 0.2 and before == after)
    detail = (f"solve -> {fields[0]} {fields[1]}, listed={fields[3]}, error ratio at dt/2="
              f"{float(fields[4]):.2f}" if len(fields) == 5 else res.stderr.strip()[-200:])
    assert report(7, "external integrator via the public registry", ok, detail)


# 8. tolerance tracking

def test_tolerance_tracking(report):
    prob = linear_decay()
    exact = math.exp(-1.0)
    ratios = {}
    for alg in ("tsit5", "dp5", "rosenbrock23"):
        for r in (1e-3, 1e-6, 1e-9):
            # abstol well below reltol so the relative tolerance governs
            sol = solve(prob, alg, reltol=r, abstol=r * 1e-3)
            ratios[(alg, r)] = abs(sol.u[-1][0] - exact) / r if sol.success else math.inf
    worst = max(ratios, key=ratios.get)
    ok = all(v <= 100 for v in ratios.values())
    detail = f"worst {worst[0]} at reltol {worst[1]:g}: error = {ratios[worst]:.1f} x reltol"
    assert report(8, "final error <= 100 x reltol", ok, detail)


if __name__ == "__main__":
    def _print_report(number, title, ok, detail=""):
        print(f"[{number}] {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else ""))
        return ok

    failures = 0
    for test in (test_convergence_orders, test_bouncing_ball, test_orego_work_precision,
                 test_polyalgorithm, test_autoswitch_van_der_pol, test_parameter_loss,
                 test_registry_extension, test_tolerance_tracking):
        try:
            test(_print_report)
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
