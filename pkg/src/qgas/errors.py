"""Exception types raised by the qgas core modules."""


class QgasError(Exception):
    """Base class for all qgas errors."""


class DomainError(QgasError, ValueError):
    """An input lies outside the domain where a formula is defined.

    ``level`` names the offending single-particle level (0-based) when the
    failure is tied to one, and ``branch`` names the reason, e.g. ``"pole"``
    or ``"analytic-continuation"``.
    """

    def __init__(self, message, level=None, branch=None):
        super().__init__(message)
        self.level = level
        self.branch = branch


class EnumerationLimitError(QgasError, ValueError):
    """A basis or configuration space exceeds the configured size limit."""

    def __init__(self, message, size=None, limit=None):
        super().__init__(message)
        self.size = size
        self.limit = limit


class CapacityError(QgasError, ValueError):
    """A target particle number exceeds what the allowed mu branch can hold."""

    def __init__(self, message, supremum):
        super().__init__(message)
        self.supremum = supremum


class CondensationError(QgasError, ValueError):
    """The target density lies beyond the z -> 1 limit of the excited states."""

    def __init__(self, message, critical):
        super().__init__(message)
        self.critical = critical
