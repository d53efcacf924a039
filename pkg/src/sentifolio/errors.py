"""Exception hierarchy. The CLI maps each family onto a stable exit code."""


class SentifolioError(Exception):
    """Base class for all package errors."""


class ConfigError(SentifolioError):
    """Invalid or incomplete configuration (CLI exit code 1)."""


class DataError(SentifolioError):
    """Malformed, missing, or inconsistent input data (CLI exit code 2)."""


class FetchError(DataError):
    """Remote data could not be retrieved or did not match the expected schema."""


class SolverError(SentifolioError):
    """The portfolio optimizer failed (CLI exit code 3)."""


class BacktestError(SentifolioError):
    """The walk-forward simulation could not be completed (CLI exit code 3)."""


class TransportError(SentifolioError):
    """A chat-completion request failed. ``status`` is the HTTP status when known."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status
