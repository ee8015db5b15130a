"""
Exception roots shared by every module.
The service layer maps them onto process exit statuses.
"""


class ToolkitError(Exception):
    """
    Base exception for the toolkit.
    """


class InvalidInputError(ToolkitError, ValueError):
    """
    Raised when an operation receives input outside its preconditions.
    """


class BudgetExceededError(ToolkitError):
    """
    Raised when a step budget or a size guard is exceeded.
    """


class CertificationError(ToolkitError):
    """
    Raised when a constructive certificate cannot be produced or a verified property fails.
    """


class InternalInvariantError(ToolkitError, AssertionError):
    """
    Raised when a post-condition re-check fails. Never expected to fire.
    """
