"""Exception hierarchy shared by all levyavg modules."""


class LevyAvgError(Exception):
    """Base class for all package errors."""


class ParameterError(LevyAvgError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ConfigError(LevyAvgError, ValueError):
    """An experiment configuration is malformed or inconsistent."""


class ShapeError(LevyAvgError, ValueError):
    """Array shapes or grids do not match between cooperating objects."""


class ResolutionError(LevyAvgError, RuntimeError):
    """The discretisation is too coarse for the requested computation."""


class DegenerateInputError(LevyAvgError, ValueError):
    """An input is identically zero (or numerically indistinguishable from it)."""


class LambdaTooSmallError(LevyAvgError, RuntimeError):
    """The elliptic fixed-point iteration does not contract at this damping."""


class NoKbmError(LevyAvgError, RuntimeError):
    """The long-time average of a coefficient does not appear to converge."""


class RegionError(LevyAvgError, ValueError):
    """The (alpha, beta) pair lies outside the region needed for this result."""


class IndependenceError(LevyAvgError, ValueError):
    """Two noise streams that must be independent share a seed."""
