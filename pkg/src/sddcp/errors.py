"""Shared exception types."""


class SddcpError(Exception):
    """Base class for errors raised by this package."""


class CapabilityError(SddcpError):
    """The configured solver backend lacks a required cone type."""


class SolverFailure(SddcpError):
    """The solver terminated without a usable answer or certificate."""


class FormatError(SddcpError):
    """Malformed instance, graph, or certificate data."""


class SizeLimitError(SddcpError):
    """Input exceeds the configured limit for exact computation."""
