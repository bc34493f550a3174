"""
Observed order of accuracy
==========================

Fixed-step runs on problems with closed-form solutions give the slope of
log(error) against log(dt). The fifth-order pairs are measured on coarser
steps because their error reaches roundoff below dt of about 0.02.
"""

# %%
from confedsolve.devtools import convergence_errors, fit_order
from confedsolve.problems import harmonic, linear_decay

fine = [2.0 ** -k for k in range(4, 10)]
coarse = [0.05, 0.04, 0.03, 0.025]
cases = [("euler", linear_decay(), fine, {}),
         ("rk4", linear_decay(), fine, {}),
         ("tsit5", linear_decay(), coarse, {}),
         ("dp5", linear_decay(), coarse, {}),
         ("rosenbrock23", linear_decay(), fine, {}),
         ("bdf", linear_decay(), fine, {"alg_params": {"max_order": 2}}),
         ("verlet", harmonic(), fine, {})]

# %%
for alg, prob, dts, kw in cases:
    errs = convergence_errors(prob, alg, dts, **kw)
    print(f"{alg:>13s}  order {fit_order(dts, errs):5.2f}   smallest error {errs[-1]:.2e}")
