"""sqlab: squarefree numbers in arithmetic progressions, computed and cross-checked."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    DegenerateMapError,
    DomainError,
    HypothesisError,
    NonInvertibleError,
    SqlabError,
)

__all__ = [
    "__version__",
    "CapacityError",
    "DegenerateMapError",
    "DomainError",
    "HypothesisError",
    "NonInvertibleError",
    "SqlabError",
]
