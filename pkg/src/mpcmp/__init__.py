"""Dealer-assisted secure comparison and MSB extraction for n parties."""

from .errors import (
    Abort,
    DomainTooSmall,
    Incomplete,
    InvalidArgument,
    MPCError,
    TapeError,
    TapeExhausted,
    TapeMismatch,
    TransportError,
)
from .session import Params, run

__version__ = "0.1.0"

__all__ = [
    "Abort",
    "DomainTooSmall",
    "Incomplete",
    "InvalidArgument",
    "MPCError",
    "Params",
    "TapeError",
    "TapeExhausted",
    "TapeMismatch",
    "TransportError",
    "run",
]
