"""Exception taxonomy shared across the package.

Three classes matter to callers: configuration problems, file format
problems, and numeric-domain violations. The CLI maps each class to a
distinct exit code.
"""


class HhsarError(Exception):
    """Base class for all package-raised errors."""


class ConfigError(HhsarError):
    """Invalid configuration, argument, or geometry supplied by the caller."""


class IoFormatError(HhsarError):
    """Malformed, truncated, or inconsistent file content."""


class NumericDomainError(HhsarError):
    """Inputs outside the mathematical domain of an operation.

    Raised for points too close to the array plane for the spectrum
    box to exist, delays outside the alias-free profile window,
    non-convergent coordinate inversions, and unmeasurable profiles.
    """
