"""Command-line interface: ``confedsolve <command> [flags]``.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from contextlib import contextmanager

import numpy as np

from .core import (ProblemKind, SolverOptions, StiffnessHint, default_registry,
                   list_algorithms, remake, solve)
from .devtools import convergence_errors, fit_order, tolerance_grid, work_precision
from .errors import ConfedError, InvalidOptions, NonFiniteError, UnknownAlgorithm
from .estimation import parameter_l2loss
from .polyalg import default_algorithm, explain_choice
from .problems import CATALOG, catalog_entry
from .svgplot import line_plot

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

KINDS = {"first_order": ProblemKind.FIRST_ORDER, "second_order": ProblemKind.SECOND_ORDER}
BENCH_COLUMNS = ("alg", "abstol", "reltol", "error", "runtime_s", "nf", "naccept", "nreject",
                 "njac", "retcode")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    return f"{float(x):.17g}"


def parse_pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def parse_saveat(text: str) -> np.ndarray:
    """``a:b:n`` -> ``n`` evenly spaced times; a comma list is taken as is."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(s) for s in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time grid {text!r}") from None


def parse_tol_grid(text: str) -> list[float]:
    """``1e-2:1e-7`` -> one tolerance per decade, inclusive; or a comma list."""
    try:
        if ":" in text:
            a, b = (float(s) for s in text.split(":"))
            if a <= 0 or b <= 0:
                raise ValueError
            ea, eb = math.log10(a), math.log10(b)
            n = int(round(abs(ea - eb))) + 1
            step = -1 if eb < ea else 1
            return [10.0 ** (ea + step * k) for k in range(n)]
        return [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance grid {text!r}") from None


def parse_list(text: str) -> list[str]:
    """Comma-separated names; commas inside parentheses do not split."""
    out, depth, cur = [], 0, ""
    for ch in text:
        depth += (ch == "(") - (ch == ")")
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


@contextmanager
def output(path, default):
    if path is None or path == "-":
        yield default
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _problem(args):
    if args.problem not in CATALOG:
        raise UsageError(f"unknown problem {args.problem!r}; choose from {', '.join(sorted(CATALOG))}")
    entry = catalog_entry(args.problem)
    prob = entry.prob
    if getattr(args, "tspan", None) is not None:
        prob = remake(prob, tspan=args.tspan)
    return prob, entry.callbacks


def _options(args, callbacks) -> SolverOptions:
    kw = dict(callbacks=callbacks)
    for name in ("abstol", "reltol", "dt", "max_steps"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    if getattr(args, "fixed", False):
        kw["adaptive"] = False
    if getattr(args, "saveat", None) is not None:
        # a requested grid replaces the per-step rows
        kw["saveat"] = tuple(args.saveat)
        kw["save_everystep"] = False
    hint = getattr(args, "stiffness_hint", None)
    if hint is not None:
        kw["stiffness_hint"] = StiffnessHint(hint)
    return SolverOptions(**kw)


def _alg(args, prob, opts, err) -> str:
    alg = getattr(args, "alg", None)
    if alg is None or alg == "auto":
        alg = default_algorithm(prob, opts)
        print(f"polyalgorithm chose {alg}", file=err)
    return alg


def write_solution_csv(fh, sol) -> None:
    n = sol.u.shape[1]
    fh.write(",".join(["t"] + [f"u{i + 1}" for i in range(n)]) + "\n")
    for t, u in zip(sol.t, sol.u):
        fh.write(",".join([fmt(t)] + [fmt(x) for x in u]) + "\n")


def read_solution_csv(path):
    """Inverse of :func:`write_solution_csv`: returns ``(t, u)`` arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:]


def cmd_solve(args, out, err) -> int:
    prob, callbacks = _problem(args)
    opts = _options(args, callbacks)
    alg = _alg(args, prob, opts, err)
    sol = solve(prob, alg, opts)
    with output(args.out, out) as fh:
        write_solution_csv(fh, sol)
    if args.plot:
        series = {f"u{i + 1}": (sol.t, sol.u[:, i]) for i in range(sol.u.shape[1])}
        with open(args.plot, "w") as fh:
            fh.write(line_plot(series, "t", "u", f"{args.problem} ({alg})"))
    if not sol.success:
        print(f"retcode: {sol.retcode.value}", file=err)
        return EXIT_FAIL
    return EXIT_OK


def write_bench_csv(fh, entries) -> None:
    fh.write(",".join(BENCH_COLUMNS) + "\n")
    for e in entries:
        s = e.stats
        row = [e.alg, fmt(e.abstol), fmt(e.reltol), fmt(e.error), fmt(e.runtime),
               str(s.get("nf", 0)), str(s.get("naccept", 0)), str(s.get("nreject", 0)),
               str(s.get("njac", 0)), e.retcode.value]
        fh.write(",".join(f'"{c}"' if "," in c else c for c in row) + "\n")


def bench_plot(entries, title: str) -> str:
    series = {}
    for e in entries:
        xs, ys = series.setdefault(e.alg, ([], []))
        if e.success:
            xs.append(e.error)
            ys.append(e.runtime)
    return line_plot(series, "error", "runtime (s)", title, logx=True, logy=True)


def cmd_bench(args, out, err) -> int:
    prob, callbacks = _problem(args)
    algs = parse_list(args.algs)
    grid = tolerance_grid(args.reltols, args.abs_ratio)
    kw = dict(callbacks=callbacks)
    if args.max_steps is not None:
        kw["max_steps"] = args.max_steps
    times = np.linspace(prob.tspan[0], prob.tspan[1], args.samples)
    entries = work_precision(prob, algs, grid, None, times, reps=args.reps, **kw)
    with output(args.out, out) as fh:
        write_bench_csv(fh, entries)
    if args.plot:
        with open(args.plot, "w") as fh:
            fh.write(bench_plot(entries, f"work-precision: {args.problem}"))
    failed = [e for e in entries if not e.success]
    for e in failed:
        print(f"retcode: {e.retcode.value} ({e.alg}, reltol={e.reltol:g})", file=err)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_explain(args, out, err) -> int:
    prob, callbacks = _problem(args)
    opts = _options(args, callbacks)
    for predicate, branch in explain_choice(prob, opts):
        out.write(f"{predicate}: {branch}\n")
    return EXIT_OK


def cmd_list(args, out, err) -> int:
    kind = KINDS[args.kind] if args.kind else None
    rows = [("name", "kinds", "family", "adaptive", "stiff", "order", "description")]
    for d in list_algorithms(default_registry(), kind):
        kinds = "+".join(sorted(k.value for k in d.problem_kinds))
        rows.append((d.name, kinds, d.family.value, str(d.adaptive).lower(),
                     str(d.stiff_capable).lower(), str(d.order), d.description))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]) - 1)]
    for r in rows:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)) + "  " + r[-1] + "\n")
    return EXIT_OK


def cmd_converge(args, out, err) -> int:
    prob, _ = _problem(args)
    if prob.analytic is None:
        raise UsageError(f"problem {args.problem!r} has no analytic solution")
    if args.dts is not None:
        dts = list(args.dts)
    else:
        span = prob.tspan[1] - prob.tspan[0]
        dts = [span / 10 / 2 ** k for k in range(4)]
    if len(dts) < 4:
        raise UsageError("need at least 4 step sizes")
    try:
        errs = convergence_errors(prob, args.alg, dts)
    except NonFiniteError as exc:
        print(f"retcode: failure ({exc})", file=err)
        return EXIT_FAIL
    out.write("dt,error\n")
    for dt, e in zip(dts, errs):
        out.write(f"{fmt(dt)},{fmt(e)}\n")
    out.write(f"order,{fit_order(dts, errs):.4f}\n")
    return EXIT_OK


def cmd_estimate(args, out, err) -> int:
    prob, callbacks = _problem(args)
    p_true = np.array(prob.p, dtype=float)
    if not 0 <= args.param < p_true.size:
        raise UsageError(f"--param must be in 0..{p_true.size - 1}")
    t0, tf = prob.tspan
    times = np.linspace(t0, tf, args.samples + 1)[1:]
    ref = solve(prob, "dp5", abstol=1e-12, reltol=1e-12, saveat=times, save_everystep=False,
                callbacks=callbacks)
    if not ref.success:
        print(f"retcode: {ref.retcode.value} (data generation)", file=err)
        return EXIT_FAIL
    opts = _options(args, callbacks)
    alg = _alg(args, prob, opts, err)
    loss = parameter_l2loss(prob, alg, times, ref.u, opts)
    with output(args.out, out) as fh:
        fh.write("p,loss\n")
        for value in args.grid:
            cand = p_true.copy()
            cand[args.param] = value
            fh.write(f"{fmt(value)},{fmt(loss(cand))}\n")
    return EXIT_OK


def _common(sp, alg=True, tol=True):
    sp.add_argument("--problem", required=True, help=f"one of {', '.join(sorted(CATALOG))}")
    if alg:
        sp.add_argument("--alg", default=None, help="registered name, composite, or 'auto'")
    if tol:
        sp.add_argument("--abstol", type=float)
        sp.add_argument("--reltol", type=float)
    sp.add_argument("--tspan", type=parse_pair, help="a,b")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="confedsolve", description="ODE solving from the command line")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a catalog problem and write t,u1..un rows")
    _common(sp)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--fixed", action="store_true", help="fixed step (needs --dt)")
    sp.add_argument("--saveat", type=parse_saveat, help="a:b:n or t1,t2,...")
    sp.add_argument("--max-steps", dest="max_steps", type=int)
    sp.add_argument("--stiffness-hint", choices=[h.value for h in StiffnessHint])
    sp.add_argument("--out")
    sp.add_argument("--plot", help="write an SVG plot of the solution")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="work-precision sweep")
    _common(sp, alg=False, tol=False)
    sp.add_argument("--algs", required=True, help="comma-separated algorithm names")
    sp.add_argument("--reltols", type=parse_tol_grid, default=parse_tol_grid("1e-2:1e-7"),
                    help="decade grid like 1e-2:1e-7, or a comma list")
    sp.add_argument("--abs-ratio", dest="abs_ratio", type=float, default=1.0,
                    help="abstol = ratio * reltol")
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--samples", type=int, default=100, help="error sample times")
    sp.add_argument("--max-steps", dest="max_steps", type=int)
    sp.add_argument("--out")
    sp.add_argument("--plot", help="write a log-log SVG work-precision plot")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("explain", help="show the polyalgorithm's decision path")
    _common(sp, alg=False)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--fixed", action="store_true")
    sp.add_argument("--stiffness-hint", choices=[h.value for h in StiffnessHint])
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("list", help="registered algorithms")
    sp.add_argument("--kind", choices=sorted(KINDS))
    sp.set_defaults(func=cmd_list)

    sp = sub.add_parser("converge", help="observed order from fixed-step runs")
    _common(sp, tol=False)
    sp.add_argument("--dts", type=parse_saveat, help="comma list (or a:b:n)")
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("estimate", help="L2 loss over a parameter grid")
    _common(sp)
    sp.add_argument("--param", type=int, default=0, help="index into p")
    sp.add_argument("--grid", type=parse_saveat, required=True, help="a:b:n or comma list")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_estimate)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "converge" and args.alg is None:
        print("converge needs --alg", file=err)
        return EXIT_USAGE
    try:
        return args.func(args, out, err)
    except UnknownAlgorithm as exc:
        print(str(exc), file=err)
        return EXIT_USAGE
    except (UsageError, InvalidOptions) as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except ConfedError as exc:
        print(f"{type(exc).__name__}: {exc}", file=err)
        return EXIT_USAGE
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"retcode: failure ({exc})", file=err)
        return EXIT_FAIL
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
