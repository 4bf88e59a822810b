"""Exception types raised across the package."""


class LadderOpsError(Exception):
    """Base class for all package errors."""


class DomainError(LadderOpsError, ValueError):
    """An argument lies outside the domain of an operation (bad mode, mismatched basis, ...)."""


class NumericDomainError(DomainError):
    """A scalar function produced a non-finite value where a finite one is required."""


class PreconditionError(LadderOpsError, ValueError):
    """A documented precondition of an operation does not hold."""


class CatalogError(LadderOpsError, KeyError):
    """Unknown identity id requested from the verification catalog."""


class ConsistencyError(LadderOpsError, RuntimeError):
    """An internal consistency check failed; indicates a bug or a broken invariant."""
