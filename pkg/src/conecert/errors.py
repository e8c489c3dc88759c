"""Exception hierarchy shared by all conecert modules."""


class ConecertError(Exception):
    """Base class for every error raised by this package."""


class ExpressionError(ConecertError, ValueError):
    """A formula uses syntax outside the supported grammar."""


class ConfigError(ConecertError, ValueError):
    """A problem file is malformed, incomplete or inconsistent."""


class DomainError(ConecertError, ValueError):
    """An argument lies outside the operation's admissible domain."""


class EvaluationError(ConecertError, ArithmeticError):
    """A function produced a non-finite value at a quadrature node."""


class ParameterError(ConecertError, ValueError):
    """Boundary coefficients violate their positivity constraints."""


class AdmissibilityError(ConecertError, ValueError):
    """Cone interval or kernel bounds fail their defining inequalities."""


class CoverageError(ConecertError, ValueError):
    """No declared piece of the nonlinearity claims a requested point."""


class DegenerateWeightError(ConecertError, ValueError):
    """The weight makes a normalization integral vanish."""


class OrderingError(ConecertError, ValueError):
    """The radii passed to the certifier admit no branch ordering."""


class DivergenceError(ConecertError, RuntimeError):
    """Fixed-point iteration left the admissible ball.

    Carries the sup-norm history of the iterates in ``trace``.
    """

    def __init__(self, message: str, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)
