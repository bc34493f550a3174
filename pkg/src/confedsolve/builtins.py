"""Descriptors and factories for the methods shipped with the package."""

from __future__ import annotations

from .autoswitch import AutoSwitch
from .bdf import BDF
from .core import AlgorithmDescriptor, Family, ProblemKind, Registry
from .explicit import DP5Integrator, Euler, RK4Integrator, Tsit5, Verlet
from .rosenbrock import Rosenbrock23

FIRST = frozenset({ProblemKind.FIRST_ORDER})
SECOND = frozenset({ProblemKind.SECOND_ORDER})

BUILTINS = (
    (AlgorithmDescriptor("euler", FIRST, Family.EXPLICIT_RK, False, False, 1,
                         "forward Euler, fixed step"), Euler),
    (AlgorithmDescriptor("rk4", FIRST, Family.EXPLICIT_RK, False, False, 4,
                         "classical Runge-Kutta, fixed step"), RK4Integrator),
    (AlgorithmDescriptor("tsit5", FIRST, Family.EXPLICIT_RK, True, False, 5,
                         "Tsitouras 5(4) pair"), Tsit5),
    (AlgorithmDescriptor("dp5", FIRST, Family.EXPLICIT_RK, True, False, 5,
                         "Dormand-Prince 5(4) pair"), DP5Integrator),
    (AlgorithmDescriptor("verlet", SECOND, Family.SYMPLECTIC, False, False, 2,
                         "velocity Verlet, fixed step"), Verlet),
    (AlgorithmDescriptor("rosenbrock23", FIRST, Family.ROSENBROCK, True, True, 2,
                         "L-stable Rosenbrock 2(3) pair"), Rosenbrock23),
    (AlgorithmDescriptor("bdf", FIRST, Family.BDF, True, True, 3,
                         "variable-order BDF, orders 1-3"), BDF),
    (AlgorithmDescriptor("autoswitch", FIRST, Family.COMPOSITE, True, True, 2,
                         "stiffness-detecting composite: autoswitch(nonstiff,stiff)"), AutoSwitch),
)


def register_builtins(registry: Registry) -> None:
    for desc, factory in BUILTINS:
        registry.register(desc, factory)
