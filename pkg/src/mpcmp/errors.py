"""Exception hierarchy shared by every layer of the engine."""


class MPCError(Exception):
    """Base class for all engine errors."""


class InvalidArgument(MPCError, ValueError):
    pass


class DomainTooSmall(MPCError, ValueError):
    """The modulus cannot hold the values a protocol needs (requires p > l + 1)."""


class Incomplete(MPCError):
    """A reconstruction was attempted without every party's share."""


class TapeError(MPCError):
    """Malformed, truncated, mismatched or replayed tape file."""


class TapeExhausted(TapeError):
    """A single-use preprocessing object was consumed twice."""


class TapeMismatch(TapeError):
    """Preprocessing material was generated for different wires or parameters."""


class TransportError(MPCError):
    pass


class Abort(MPCError):
    """Raised when the MAC check fails or any party aborts the session."""
