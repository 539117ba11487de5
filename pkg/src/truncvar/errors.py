"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class DomainError(ValueError):
    """A closed-form formula was evaluated outside its domain of validity."""


class RegimeError(ValueError):
    """Horizon does not belong to the regime a check was asked to verify."""


class InfeasibleError(RuntimeError):
    """No admissible step could be found for an iterated bound."""


class SeriesTruncationError(ArithmeticError):
    """A series did not reach its tolerance within the allowed number of terms.

    The partial sum and the last residual are kept so callers can decide
    whether the truncated value is still usable.
    """

    def __init__(self, message: str, partial_sum: float, n_terms: int, residual: float):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.n_terms = n_terms
        self.residual = residual


class ConsistencyError(RuntimeError):
    """Two routes to the same quantity disagreed beyond round-off."""
