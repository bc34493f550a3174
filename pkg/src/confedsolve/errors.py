"""Exception types raised by the solver framework.

Numerical failures during integration are reported through
:class:`~confedsolve.core.ReturnCode`, not exceptions. The classes here
cover misuse: bad names, bad shapes, bad options.
"""


class ConfedError(Exception):
    """Base class for all framework errors."""


class UnknownAlgorithm(ConfedError, KeyError):
    def __str__(self):
        return f"UnknownAlgorithm: {self.args[0]!r} is not registered"


class DuplicateName(ConfedError, ValueError):
    pass


class KindMismatch(ConfedError, TypeError):
    pass


class MissingDt(ConfedError, ValueError):
    pass


class ShapeMismatch(ConfedError, ValueError):
    pass


class InvalidProblem(ConfedError, ValueError):
    pass


class InvalidOptions(ConfedError, ValueError):
    pass


class OutOfRange(ConfedError, ValueError):
    pass


class NoDenseOutput(ConfedError, ValueError):
    pass


class NonFiniteJacobian(ConfedError, ArithmeticError):
    pass


class SingularMatrix(ConfedError, ArithmeticError):
    pass


class DomainMismatch(ConfedError, ValueError):
    pass


class NonFiniteError(ConfedError, ArithmeticError):
    pass
