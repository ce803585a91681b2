"""Exception types.

Every exception carries a short ``code`` that the command-line front end
prints as a machine-parseable reason.
"""


class RevDMPError(Exception):
    code = "error"


class InvalidArgument(RevDMPError, ValueError):
    code = "invalid-argument"


class ValidationError(RevDMPError, ValueError):
    """A model or data file violates an invariant."""
    code = "validation"


class DegenerateDemoError(RevDMPError, ValueError):
    """The demonstration cannot define a scaling (zero displacement)."""
    code = "degenerate-demo"


class DomainError(RevDMPError, ValueError):
    """Numeric input outside the domain where a map is defined."""
    code = "domain"


class IntegrationError(RevDMPError, FloatingPointError):
    """Non-finite values appeared while integrating."""
    code = "integration"


class NoMotionError(DegenerateDemoError):
    code = "no-motion"
