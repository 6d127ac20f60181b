"""Exception types raised across sqlab."""


class SqlabError(Exception):
    """Base class for all sqlab errors."""


class DomainError(SqlabError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonInvertibleError(DomainError):
    """A residue has no multiplicative inverse modulo q."""


class DegenerateMapError(DomainError):
    """The affine map a -> r*a + s is not a bijection modulo q."""


class HypothesisError(DomainError):
    """Inputs violate q not dividing r*s."""


class CapacityError(SqlabError, ValueError):
    """The requested range or budget exceeds what the implementation supports."""
