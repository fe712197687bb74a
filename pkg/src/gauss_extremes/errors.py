"""Exception types raised by the simulation and numerics layers."""


class GaussExtremesError(Exception):
    """Base class for all package-specific errors."""


class EmbeddingFailure(GaussExtremesError):
    """Circulant embedding produced eigenvalues too negative to clip."""


class MemoryCapExceeded(GaussExtremesError):
    """Requested grid exceeds the configured point-count cap."""


class AlignmentError(GaussExtremesError):
    """Grid spacing does not divide the unit block length exactly."""


class InvalidMixError(GaussExtremesError):
    """Mixture weight r/log(T) is not in [0, 1)."""


class EmptyRegionError(GaussExtremesError):
    """No grid point falls inside the requested region."""


class LadderTooShort(GaussExtremesError):
    """Extrapolation ladder needs at least three rungs."""


class UnstableRegime(GaussExtremesError):
    """Estimated probabilities too close to 0 or 1 for a stable log-ratio."""


class NotInAsymptoticRegime(GaussExtremesError):
    """First-order tail approximation returned a value >= 1."""


class NonintegrableTail(GaussExtremesError):
    """Radial tail integral diverges for the requested index."""


class NoRootInRange(GaussExtremesError):
    """Threshold inversion target lies outside the monotone range."""


class MissingMoment(GaussExtremesError):
    """Radial spec lacks the second moment required by this regime."""


class MissingSurvival(GaussExtremesError):
    """Radial spec lacks the survival-function callback required here."""


class ConfigError(GaussExtremesError):
    """Run configuration failed schema validation."""
