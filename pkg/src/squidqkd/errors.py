"""Exception hierarchy shared by every module of the package."""


class SquidQKDError(Exception):
    """Base class for all package errors."""


class TruncationTooSmall(SquidQKDError):
    """The Fock-space truncation cannot hold the requested state."""


class DimensionMismatch(SquidQKDError):
    pass


class GridTooNarrow(SquidQKDError):
    """A quadrature grid misses a non-negligible part of the density."""


class NonRealResult(SquidQKDError):
    """A closed form that must be real produced an imaginary residue."""


class NotCoprime(SquidQKDError):
    pass


class RegimeViolation(SquidQKDError):
    """Device parameters fall outside mu >> Omega >> nu."""


class EveBelowVacuum(SquidQKDError):
    """Eve's noise was requested below the vacuum floor N0."""


class TooFewSamples(SquidQKDError):
    pass


class ReconciliationFailure(SquidQKDError):
    """Residual bit errors survived all reconciliation passes."""


class ConfigError(SquidQKDError):
    """Invalid experiment configuration; the message names the field."""
