"""Exception types shared across the package."""


class RelblurError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(RelblurError, ValueError):
    """A parameter violates an operation's precondition."""


class ShapeError(RelblurError, ValueError):
    """Array dimensions do not match the operation's contract."""


class OutOfSupportError(RelblurError, ValueError):
    """A requested radius or kernel exceeds the available spatial support."""


class MemoryCapExceededError(RelblurError, RuntimeError):
    """A requested allocation exceeds the configured entry cap."""


class EmptyDomainError(RelblurError, ValueError):
    """A reduction was requested over an empty pixel set."""


class NoRealFocusError(RelblurError, ValueError):
    """Thin-lens geometry admits no real focus for the given distances."""


class DivergenceError(RelblurError, ValueError):
    """A geometric quantity diverged beyond the representable range."""


class SingularDepthError(RelblurError, ValueError):
    """Depth recovery is singular (blur circle equals its asymptote)."""


class ImageIOError(RelblurError, OSError):
    """An image file could not be read or written."""
