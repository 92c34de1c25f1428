"""Exception and warning types raised across the package."""


class CVQKDError(Exception):
    """Base class for all errors raised by cvqkdnet."""


class DomainError(CVQKDError, ValueError):
    """An argument lies outside the domain where a model is defined."""


class PhysicalityError(DomainError):
    """A covariance matrix violates the uncertainty principle."""


class GeometryError(DomainError):
    """A geometric construction has no solution (e.g. arcsin argument > 1)."""


class NumericalError(CVQKDError, ArithmeticError):
    """A numerical routine failed or produced a non-physical value."""


class ParseError(CVQKDError, ValueError):
    """Malformed input data. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ClassificationError(CVQKDError, ValueError):
    """A node-kind pairing does not correspond to any known link family."""


class UncoveredLinkError(CVQKDError):
    """Dynamic links have no capacity data for the requested time window."""

    def __init__(self, link_ids):
        self.link_ids = tuple(link_ids)
        super().__init__("no capacity data covering window for links: " + ", ".join(self.link_ids))


class UntrustedRelayError(CVQKDError):
    """The only available routes relay the key through an untrusted node."""


class ScenarioError(CVQKDError, ValueError):
    """A scenario document failed validation. ``path`` locates the bad field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ModelValidityWarning(UserWarning):
    """Inputs are outside the range where an empirical model is trusted."""
