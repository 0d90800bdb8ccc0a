"""Exception types shared across the engine."""

from __future__ import annotations


class PeerFlowError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PeerFlowError, ValueError):
    """Malformed or out-of-range input (scores, deductions, parameters)."""


class StateError(PeerFlowError):
    """Operation not admissible in the task's current lifecycle state."""


class NotFoundError(PeerFlowError, LookupError):
    """Referenced task, student, case, or slot does not exist."""


class AuthorizationError(PeerFlowError):
    """Caller is not allowed to touch the referenced slot."""
