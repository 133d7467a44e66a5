"""Exception hierarchy shared by the library and the command-line front end."""


class SeaperError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ParameterError(SeaperError, ValueError):
    """A model parameter lies outside its admissible domain."""

    exit_code = 2


class ConfigError(SeaperError, ValueError):
    """A run configuration is malformed or inconsistent."""

    exit_code = 2


class GridError(SeaperError, ValueError):
    """The pole-aligned frequency grid would be empty or malformed."""

    exit_code = 2


class DataError(SeaperError, ValueError):
    """Input data are unusable (wrong shape, non-finite, degenerate)."""

    exit_code = 2


class NumericError(SeaperError, ArithmeticError):
    """A numerical procedure failed (quadrature, factorization, optimizer)."""

    exit_code = 3


class EstimationError(NumericError):
    """Model fitting failed at every candidate point."""


class IOFailure(SeaperError, OSError):
    """Reading or writing a file failed."""

    exit_code = 4
