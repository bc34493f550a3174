"""
Work-precision on a stiff chemical oscillator
=============================================

Error against a tight reference versus median runtime, over a
tolerance sweep. The horizon covers the first relaxation spike.
"""

# %%
import os

from confedsolve import remake
from confedsolve.cli import bench_plot
from confedsolve.devtools import tolerance_grid, work_precision
from confedsolve.problems import orego

from _common import out_dir

prob = remake(orego(), tspan=(0.0, 24.0))
reps = int(os.environ.get("CONFED_DEMO_REPS", "1"))
entries = work_precision(prob, ["tsit5", "rosenbrock23", "bdf"],
                         tolerance_grid([1e-2, 1e-3, 1e-4, 1e-5, 1e-6]), reps=reps)

# %%
print(f"{'alg':>13s} {'reltol':>8s} {'error':>10s} {'runtime':>9s} {'nf':>7s}")
for e in entries:
    print(f"{e.alg:>13s} {e.reltol:8.0e} {e.error:10.3e} {e.runtime:9.4f} {e.stats['nf']:7d}")

(out_dir() / "orego_work_precision.svg").write_text(bench_plot(entries, "OREGO, t in [0, 24]"))
