"""Exception hierarchy shared by the numerical modules."""


class ABError(Exception):
    """Base class for all errors raised by ablevinson."""


class DomainError(ABError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ModelError(ABError, ValueError):
    """A scattering model could not be built or evaluated."""


class NumericalError(ABError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class MatchingError(NumericalError):
    """Asymptotic matching was unstable against a shift of the matching radii."""


class UnwrapError(NumericalError):
    """Phase unwrapping was ambiguous on the supplied wavenumber grid."""


class FitError(NumericalError):
    """A zero-energy tail fit was ill-conditioned."""
