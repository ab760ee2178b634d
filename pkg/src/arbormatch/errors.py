"""Exception types shared across the package.

Data problems (unreadable files, malformed records, broken tree topology,
degenerate geometry) raise subclasses of :class:`ArborMatchError` so callers
can distinguish them from programming mistakes, which surface as the usual
``ValueError`` / ``TypeError``.
"""

from __future__ import annotations


class ArborMatchError(Exception):
    """Base class for data-level errors raised by this package."""


class SwcParseError(ArborMatchError):
    """A line of an SWC file could not be parsed."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)


class SwcValidationError(ArborMatchError):
    """Parsed SWC records violate a structural constraint."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)


class MultipleRootsError(SwcValidationError):
    """An SWC file contains more than one root record."""


class DegeneratePathError(ArborMatchError):
    """A path has no usable geometry (coincident consecutive points)."""


class ManifestError(ArborMatchError):
    """A corpus manifest or cached distance matrix is malformed or stale."""


class StratificationError(ArborMatchError):
    """A stratified split left some class without cluster members."""
