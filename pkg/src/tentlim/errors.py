"""Exception types shared across the package."""


class TentLimError(Exception):
    """Base class for all library errors."""


class DomainError(TentLimError, ValueError):
    """Input outside the mathematical domain of an operation."""


class PreconditionError(TentLimError, ValueError):
    """A documented operation precondition was violated."""


class NotSameComposantError(TentLimError):
    """Two points admit no common arc representation (different tail rules)."""


class NoInjectiveLevelError(TentLimError):
    """No projection level makes the connecting arc injective within the search bound."""


class AmbiguityError(TentLimError):
    """An arc component of a chain link did not contain exactly one p-point."""

    def __init__(self, message, link_index=None, count=None):
        super().__init__(message)
        self.link_index = link_index
        self.count = count


class FoldingEnumerationError(TentLimError):
    """Folding-point enumeration refused: the omega set is not certified finite."""


class ResourceLimitError(TentLimError):
    """A configured size cap would be exceeded (e.g. chain partition cap)."""


class ChainBuildError(TentLimError):
    """Chain construction produced a degenerate partition or broken link pattern."""
