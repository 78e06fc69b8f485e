"""Exception types shared across the package."""


class FsviError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(FsviError, ValueError):
    """Array shapes are inconsistent with each other or with a model."""


class InvalidPosteriorError(FsviError, ValueError):
    """The posterior factor is singular or otherwise unusable."""


class DegeneratePosteriorError(FsviError, ValueError):
    """A hyperparameter update would divide by a vanishing posterior norm."""


class DegenerateFitError(FsviError, ValueError):
    """A noise-precision update would divide by identically zero residuals."""


class ConfigError(FsviError, ValueError):
    """A configuration value is missing, malformed, or out of range."""


class InsufficientDataError(FsviError, ValueError):
    """Not enough recorded iterations to reach a verdict."""


class InvalidStartError(FsviError, ValueError):
    """The optimiser was started at a point with a non-finite objective."""


class NumericalFailureError(FsviError, ArithmeticError):
    """A non-finite bound or gradient was encountered during a fit."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class IndefiniteHessianError(FsviError, ArithmeticError):
    """The negated Hessian at the mode is not positive definite."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class RankError(FsviError, ValueError):
    """The data do not support the requested latent dimension."""


class CoverageError(FsviError, ValueError):
    """The quadrature grid misses too much probability mass."""

    def __init__(self, message, masses=None):
        super().__init__(message)
        self.masses = masses


class InvalidLabelError(FsviError, ValueError):
    """Class labels are outside the accepted coding."""


class DataFormatError(FsviError, ValueError):
    """A data file could not be parsed; carries a 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class PosteriorIOError(FsviError, ValueError):
    """A posterior file failed version, parse, or invariant checks."""
