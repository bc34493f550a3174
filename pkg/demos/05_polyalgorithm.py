"""
Letting the library choose
==========================

``solve(prob)`` without an algorithm walks a small decision table over
problem kind, size, tolerance, stiffness hint and events.
``explain_choice`` shows the path taken.
"""

# %%
from confedsolve import SolverOptions, explain_choice, solve
from confedsolve.problems import bouncing_ball, harmonic, lorenz

prob, floor = bouncing_ball()
cases = [("lorenz, defaults", lorenz(), SolverOptions()),
         ("lorenz, nonstiff, reltol 1e-10", lorenz(), SolverOptions(stiffness_hint="nonstiff", reltol=1e-10)),
         ("ball, stiff hint", prob, SolverOptions(stiffness_hint="stiff", callbacks=(floor,))),
         ("oscillator, fixed dt", harmonic(), SolverOptions(dt=0.1, adaptive=False))]

for label, p, opts in cases:
    print(label)
    for predicate, branch in explain_choice(p, opts):
        print(f"   {predicate}: {branch}")

# %%
sol = solve(lorenz())
print("solve(lorenz()) used", sol.algorithm_name)
