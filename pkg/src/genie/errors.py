"""Exception types raised by the clustering engine."""


class GenieError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(GenieError, ValueError):
    """Incompatible options, e.g. a string metric applied to numeric data."""


class ParseError(GenieError, ValueError):
    """Malformed input file. Carries the offending line number when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class InternalConsistencyError(GenieError, RuntimeError):
    """A structural invariant of the algorithm was violated."""


class UndefinedScoreError(GenieError, ValueError):
    """A validity score is undefined for the given partitions."""


class ResourceLimitError(GenieError, RuntimeError):
    """The requested operation would exceed a configured size cap."""
