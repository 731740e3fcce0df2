"""Exception hierarchy shared by all modules."""


class GridFreqError(Exception):
    """Base class for data and configuration errors raised by gridfreq."""


class WindowRangeError(GridFreqError, IndexError):
    pass


class EmptyDataError(GridFreqError, ValueError):
    pass


class OrderingError(GridFreqError, ValueError):
    pass


class TimestampError(GridFreqError, ValueError):
    pass


class InsufficientDataError(GridFreqError, ValueError):
    pass


class ShapeError(GridFreqError, ValueError):
    pass


class DegenerateSeriesError(GridFreqError, ValueError):
    pass


class DegenerateFeatureError(GridFreqError, ValueError):
    pass


class NoCandidatesError(GridFreqError, ValueError):
    pass


class ConfigurationError(GridFreqError, ValueError):
    pass
