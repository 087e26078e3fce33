"""Exception types shared across the package."""


class Ot12Error(Exception):
    """Base class for all package-specific errors."""


class GeometryError(Ot12Error):
    """Malformed geometry or coordinates outside the declared range."""


class MarginError(GeometryError):
    """A box does not fit inside the geometry with the required margin."""


class ParseError(Ot12Error):
    """Malformed configuration file.

    `offset` is the byte offset of the first offending byte.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class InvalidConfigurationError(Ot12Error):
    """An operation required a valid 1-2 configuration but got violations."""

    def __init__(self, message, vertices=()):
        super().__init__(message)
        self.vertices = tuple(vertices)


class EnumerationCapError(Ot12Error):
    """Edge count exceeds the enumeration cap."""


class FrozenBoundaryError(Ot12Error):
    """An exterior condition admits no valid completion of the window."""


class InsufficientClustersError(Ot12Error):
    """Fewer than three admissible clusters meet the box."""

    def __init__(self, message, n_admissible, n_meeting):
        super().__init__(message)
        self.n_admissible = n_admissible
        self.n_meeting = n_meeting


class SurgeryFailure(Ot12Error):
    """A surgery could not produce a valid configuration.

    `vertex` is the first vertex still violating the 1-2 law.
    """

    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex
