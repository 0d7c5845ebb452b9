"""Exception hierarchy shared by all solver modules."""


class LinkdrainError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LinkdrainError, ValueError):
    """An argument lies outside the domain of the operation."""


class SchemaError(LinkdrainError, ValueError):
    """A serialized instance or schedule violates the file schema."""


class GenerationError(LinkdrainError):
    """Random instance generation gave up after too many rejections."""


class BudgetExceeded(LinkdrainError):
    """An exhaustive enumeration would exceed its link-count cap."""


class InfeasibleStrategy(LinkdrainError):
    """A scheduling strategy cannot drain every queue on this instance."""
