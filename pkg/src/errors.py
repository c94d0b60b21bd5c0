"""
Haar-Ruelle Lab - Errors
Exception hierarchy shared by the library and the command-line runner.
"""


class HaarRuelleError(Exception):
    """Base class for every error raised by the lab."""
    exit_code = 2


class SymbolError(HaarRuelleError, ValueError):
    """Raised when a symbol, class index or text form is out of range or malformed."""
    pass


class DepthError(HaarRuelleError):
    """Raised when a free set or cocycle reaches past the depth an operator is applied at."""
    pass


class EquivalenceError(HaarRuelleError):
    """Raised when a cocycle is evaluated on a pair that is not equivalent."""
    pass


class ConfigError(HaarRuelleError):
    """Raised when an experiment configuration fails validation."""
    pass


class ConvergenceError(HaarRuelleError):
    """Raised when power iteration does not settle within max_iter steps."""
    exit_code = 3


class VerificationError(HaarRuelleError):
    """Raised when a computed residual exceeds its tolerance."""
    exit_code = 1
