"""Modular ODE solving behind a single ``solve`` entry point.

Integrators register under a name in a :class:`Registry`; ``solve(prob, alg)``
dispatches on that name, and ``solve(prob)`` lets the polyalgorithm choose.
"""

from .core import (AlgorithmDescriptor, Family, ODEProblem, ProblemKind, Registry, ReturnCode,
                   SecondOrderODEProblem, Solution, SolverOptions, Stats, StiffnessHint,
                   default_registry, interpolate, list_algorithms, register_algorithm, remake,
                   solve)
from .devtools import (TestSolution, WorkPrecisionEntry, avg_timeseries_error,
                       convergence_order, reference_solution, work_precision)
from .errors import (ConfedError, DomainMismatch, DuplicateName, InvalidOptions, InvalidProblem,
                     KindMismatch, MissingDt, NoDenseOutput, NonFiniteError, NonFiniteJacobian,
                     OutOfRange, ShapeMismatch, SingularMatrix, UnknownAlgorithm)
from .estimation import parameter_l2loss
from .events import ContinuousCallback, Direction
from .integrator import Integrator, Step
from .polyalg import SelectionContext, default_algorithm, explain_choice

__version__ = "0.1.0"

__all__ = [
    "AlgorithmDescriptor", "ConfedError", "ContinuousCallback", "Direction", "DomainMismatch",
    "DuplicateName", "Family", "Integrator", "InvalidOptions", "InvalidProblem", "KindMismatch",
    "MissingDt", "NoDenseOutput", "NonFiniteError", "NonFiniteJacobian", "ODEProblem",
    "OutOfRange", "ProblemKind", "Registry", "ReturnCode", "SecondOrderODEProblem",
    "SelectionContext", "ShapeMismatch", "SingularMatrix", "Solution", "SolverOptions", "Stats",
    "Step", "StiffnessHint", "TestSolution", "UnknownAlgorithm", "WorkPrecisionEntry",
    "avg_timeseries_error", "convergence_order", "default_algorithm", "default_registry",
    "explain_choice", "interpolate", "list_algorithms", "parameter_l2loss", "reference_solution",
    "register_algorithm", "remake", "solve", "work_precision",
]
