"""Exception hierarchy shared by all ganbalance modules."""


class GanbalanceError(Exception):
    """Base class for all library errors."""


class ParseError(GanbalanceError):
    """Malformed input file (ragged rows, non-numeric cells, ...)."""


class ConfigError(GanbalanceError):
    """Invalid user-supplied configuration."""


class DegenerateDataError(GanbalanceError):
    """Data too small or too uniform for the requested operation."""


class ParameterError(GanbalanceError):
    """Parameter value incompatible with the data (e.g. k too large)."""


class TrainingError(GanbalanceError):
    """Numerical failure during training (divergence, non-finite loss)."""
