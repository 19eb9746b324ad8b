"""Exception types shared across the engine and the service layer."""


class MetaforgeError(Exception):
    """Base class for all engine errors."""


class ValidationError(MetaforgeError):
    """Invalid input or invariant violation.

    `ids` optionally names the offending question/field ids so callers
    (API, CLI) can surface them verbatim.
    """

    def __init__(self, message: str, ids: list[str] | None = None):
        super().__init__(message)
        self.ids = list(ids or [])


class NotFoundError(MetaforgeError):
    """Referenced entity (project, document, result, group) does not exist."""


class ConflictError(MetaforgeError):
    """Compare-and-set failure: the supplied revision is stale."""

    def __init__(self, message: str, expected: int, actual: int):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class VersionError(MetaforgeError):
    """Project file schema_version is newer than this build supports."""


class ParseError(MetaforgeError):
    """Project file is not well-formed; `offset` is the byte offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class EmptyGroupError(MetaforgeError):
    """Pooling requested over zero studies."""


class IncompatibleKindsError(MetaforgeError):
    """A group mixes effect-size families that cannot be pooled together."""


class DegenerateVarianceError(MetaforgeError):
    """Effect-size computation would produce an undefined or zero denominator."""
