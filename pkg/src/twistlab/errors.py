"""Exception types shared across the package."""


class TwistlabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(TwistlabError, ValueError):
    """Invalid space, couple or centralizer parameters."""


class InputError(TwistlabError, ValueError):
    """Malformed vectors, families or preconditions that do not hold."""


class SizeError(TwistlabError):
    """A resource cap (support size, derivative depth) was exceeded."""


class BracketError(TwistlabError, ArithmeticError):
    """Root bracketing failed to enclose a solution."""
