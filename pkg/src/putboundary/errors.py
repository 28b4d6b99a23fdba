"""Exception hierarchy shared by the solvers, pricers and the CLI."""


class PutBoundaryError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PutBoundaryError, ValueError):
    """An argument lies outside the domain of the operation."""


class BracketError(PutBoundaryError, ValueError):
    """A root-finding bracket does not contain a sign change."""


class ModelValidityError(PutBoundaryError):
    """The parameter set does not define a valid model (e.g. non-positive boundary)."""


class SolverError(PutBoundaryError, RuntimeError):
    """An iterative solver failed to converge.

    Parameters
    ----------
    message : str
        Human readable description.
    node : int, optional
        Index of the time node at which the failure occurred.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ContractError(PutBoundaryError, ValueError):
    """Inputs violate an interface contract (wrong model family, boundary gaps, ...)."""


class EvaluationError(PutBoundaryError, ArithmeticError):
    """An integrand or model function produced a non-finite value."""
