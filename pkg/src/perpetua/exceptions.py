class PerpetuaError(Exception):
    """Base class for library errors."""


class InputError(PerpetuaError, ValueError):
    """Arguments outside the documented domain."""


class UnsupportedQueryError(PerpetuaError):
    """The model has no closed form for the requested quantity."""


class PreconditionError(PerpetuaError):
    """The model/command combination falls outside the method's hypotheses."""


class PropertyFailure(PerpetuaError):
    """A numerical property check failed beyond its tolerance."""

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst
