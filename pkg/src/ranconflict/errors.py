"""Exception hierarchy. Every error raised on bad input derives from ``RanConflictError``."""


class RanConflictError(Exception):
    """Base class for all package errors."""


class CatalogError(RanConflictError):
    """Invalid profile document or failed catalog lookup."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class UnknownApplicationError(CatalogError, KeyError):
    pass


class MissingConditionError(CatalogError, KeyError):
    """The application has no profile for the requested condition; profile it in the sandbox first."""


class GraphError(RanConflictError):
    pass


class EvaluationError(RanConflictError):
    pass


class MitigationError(RanConflictError):
    pass


class ScenarioError(RanConflictError):
    pass
