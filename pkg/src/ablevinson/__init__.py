"""Two-dimensional Aharonov-Bohm scattering and the Levinson relation."""

from .errors import (
    ABError,
    DomainError,
    FitError,
    MatchingError,
    ModelError,
    NumericalError,
    UnwrapError,
)

__version__ = "0.1.0"

__all__ = [
    "ABError",
    "DomainError",
    "FitError",
    "MatchingError",
    "ModelError",
    "NumericalError",
    "UnwrapError",
    "__version__",
]
