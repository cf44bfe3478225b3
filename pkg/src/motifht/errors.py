"""Exception hierarchy shared by the library and the CLI.

Validation problems (bad input, bad parameters, degenerate estimands) exit
with code 2; resource-cap refusals exit with code 3.
"""

EXIT_VALIDATION = 2
EXIT_RESOURCE = 3


class MotifHTError(Exception):
    """Base class for all library errors."""

    exit_code = EXIT_VALIDATION


class ValidationError(MotifHTError):
    """Structurally invalid input (self-loops, bad motif, bad grid, ...)."""


class ParseError(ValidationError):
    """Malformed textual input; message carries the offending line number."""


class DomainError(ValidationError):
    """Arguments outside an operation's domain (p not in (0,1), N=0, ...)."""


class ResourceCapError(MotifHTError):
    """Work refused because it exceeds a configured cap."""

    exit_code = EXIT_RESOURCE
