"""Exception hierarchy shared by every splitlab module."""


class SplitlabError(Exception):
    """Base class for all errors raised by splitlab."""


class IngestError(SplitlabError, ValueError):
    """Raised when a dataset file does not follow the CSV schema."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(SplitlabError, ValueError):
    """Raised for infeasible or malformed configuration values."""


class PartitionError(SplitlabError):
    """Raised when no group partition satisfies the requested sizes."""


class DegenerateDataError(SplitlabError, ValueError):
    """Raised when data lacks the variability an operation needs."""


class DiagnosticError(DegenerateDataError):
    """Raised when the similarity diagnostic cannot be trained."""
