"""Exception types shared across the package."""


class AuxcellError(Exception):
    """Base class for all package errors."""


class ConfigError(AuxcellError):
    """Invalid configuration value or malformed config document."""


class IllPosedMaterialError(AuxcellError):
    """Material distribution makes the elasticity operator singular
    beyond rigid translations (e.g. a phase with zero moduli)."""


class SolverError(AuxcellError):
    """Iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateLevelSetError(AuxcellError):
    """Level set has one sign everywhere; no interface to work with."""


class DegenerateTensorError(AuxcellError):
    """Homogenized tensor is singular; derived quantities undefined."""


class StaleSolutionError(AuxcellError):
    """Cell solutions were computed for a different material field."""
