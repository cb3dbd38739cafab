"""Exceptions and warning categories raised by cvsteg."""


class CvstegError(Exception):
    """Base class for library errors. ``exit_code`` is what the CLI returns."""
    exit_code = 1


class DomainError(CvstegError, ValueError):
    """A parameter lies outside the range where the quantity is defined."""


class CutoffMismatch(CvstegError, ValueError):
    """Objects combined in one expression carry different Fock cutoffs."""
    exit_code = 3


class ModeError(CvstegError, ValueError):
    """Operation needs a different number of modes than the state has."""


class DimMismatch(CvstegError, ValueError):
    """Matrix dimensions do not agree."""


class GridOverflow(CvstegError, RuntimeError):
    """A quadrature grid failed to capture enough probability mass."""
    exit_code = 3


class NonGaussianResource(CvstegError, ValueError):
    """A Gaussian-only shortcut was asked to handle a non-Gaussian resource."""


class InvalidState(CvstegError, ValueError):
    """Matrix is not a valid density operator."""


class ZeroTrace(CvstegError, ValueError):
    """Nothing survives positive-part projection."""


class ConfigError(CvstegError, ValueError):
    """Bad experiment name, parameter, or environment override."""
    exit_code = 2


class TruncationFailure(CvstegError, RuntimeError):
    """A strict run lost more probability mass to the cutoff than tau_norm allows."""
    exit_code = 3


class CutoffTooSmall(UserWarning):
    """Truncation shed more probability mass than the configured tolerance."""
