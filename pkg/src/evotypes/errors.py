class EvotypesError(ValueError):
    pass


class DuplicateEdge(EvotypesError):
    pass


class SelfLoop(EvotypesError):
    pass


class VertexOutOfRange(EvotypesError):
    pass


class LengthMismatch(EvotypesError):
    pass


class InvalidAttachment(EvotypesError):
    pass


class PoolTooSmall(EvotypesError):
    pass


class EmptyInput(EvotypesError):
    pass


class NonPositiveInput(EvotypesError):
    pass


class TooFewPoints(EvotypesError):
    pass


class FormatError(EvotypesError):
    """Malformed edge-list or report file."""
