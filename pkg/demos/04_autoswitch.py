"""
Switching between nonstiff and stiff methods
============================================

Van der Pol with a large damping parameter alternates between slow
stiff drift and fast transitions. The composite starts explicit, detects
stiffness from its own stages, and hands the state to Rosenbrock23.
"""

# %%
from confedsolve import remake, solve
from confedsolve.problems import van_der_pol

prob = remake(van_der_pol(mu=1e3), tspan=(0.0, 3.0))
explicit = solve(prob, "tsit5")
comp = solve(prob, "autoswitch(tsit5,rosenbrock23)")
print("tsit5     :", explicit.stats.naccept, "steps")
print("composite :", comp.stats.naccept, "steps")
for t, old, new in comp.stats.metadata["switches"]:
    print(f"  switched {old} -> {new} at t = {t:.4g}")

# %%
# With mu = 1e6 the explicit method is hopeless; the composite barely notices.
hard = remake(van_der_pol(mu=1e6), tspan=(0.0, 1.0))
print("mu = 1e6 composite:", solve(hard, "autoswitch(tsit5,rosenbrock23)").stats.naccept, "steps")
