"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Quantum numbers, parameters or options that violate a precondition."""


class DomainError(ValueError):
    """Argument outside the open domain of a coordinate map."""


class SingularPointError(ValueError):
    """Evaluation requested at a point where a formula is singular."""


class ParameterError(ValueError):
    """Hypergeometric parameters hit a pole of the Pochhammer denominator."""


class EvaluationError(RuntimeError):
    """A user-supplied callable failed while being evaluated."""


class QuadratureError(ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        Best value obtained before giving up.
    error : float
        Difference between the last two refinement levels.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BracketError(RuntimeError):
    """Sturm-count bisection lost its bracket (non-monotone count)."""
