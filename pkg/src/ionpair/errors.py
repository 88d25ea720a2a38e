"""Exception types raised across the package."""


class IonPairError(Exception):
    """Base class for all package errors."""


class ConfigError(IonPairError, ValueError):
    """Inconsistent or invalid configuration."""


class IdenticalLevels(ConfigError):
    """A level pair was built from two identical sublevels."""


class ZeroNoise(IonPairError, ValueError):
    """A noise-derived quantity was requested from a noiseless model."""


class InsufficientData(IonPairError, ValueError):
    """Too few (or degenerate) points to attempt a fit."""


class NoConvergence(IonPairError, RuntimeError):
    """The least-squares solver did not reach a usable minimum."""


class DegenerateDesign(IonPairError, ValueError):
    """The design matrix of a linear fit is singular."""


class UnknownScenario(IonPairError, KeyError):
    """No built-in scenario with the requested name."""
